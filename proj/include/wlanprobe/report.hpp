#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanprobe/diagnose.hpp"

namespace wlanprobe {

/// Stable report.json document:
/// {verdict, reason, kendall:{S,tau,p}, ratio:{p_u,p_c,value}, rate_status,
///  trains_used, trains_total, profile, thresholds:{alpha, ratio, median_us,
///  std_us, od_us, ld_us}, percentiles:[{size_ip, a95_us, n}], scenario?}
/// Numbers that were not computed are null.
std::string diagnosis_to_json(const Diagnosis& dx, const std::optional<std::string>& scenario = std::nullopt);

/// JSON Lines {train, mode_rate, mode_fraction, status}.
void write_rates_report(const ExperimentRates& rates, std::ostream& out);
/// JSON Lines {train, seq, size_ip, w_us, tx_us, a_us, usable}.
void write_delays_report(std::span<const AccessDelayRecord> delays, std::ostream& out);

struct ReportEntry {
  std::string scenario;  // "unlabeled" when the report carries none
  Verdict verdict = Verdict::Aborted;
};

/// Throws Error(MalformedReport).
ReportEntry parse_report(const std::string& json_text);

struct VerdictMatrix {
  std::map<std::string, std::map<Verdict, std::size_t>> rows;

  std::size_t total(const std::string& scenario) const;
  double fraction(const std::string& scenario, Verdict v) const;
};

/// Throws Error(InsufficientData) for an empty input.
VerdictMatrix build_matrix(std::span<const ReportEntry> entries);

/// Plain text by default, a markdown table when `markdown` is set.
std::string render_matrix(const VerdictMatrix& matrix, bool markdown = false);

}  // namespace wlanprobe
