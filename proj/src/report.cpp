#include "wlanprobe/report.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wlanprobe/error.hpp"

namespace wlanprobe {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr Verdict kColumns[] = {Verdict::Congestion, Verdict::LowSNR, Verdict::SymmetricHT,
                                Verdict::Aborted};

template <typename T>
ordered_json or_null(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string diagnosis_to_json(const Diagnosis& dx, const std::optional<std::string>& scenario) {
  ordered_json j;
  j["verdict"] = to_string(dx.verdict);
  j["reason"] = dx.reason.empty() ? ordered_json(nullptr) : ordered_json(dx.reason);

  ordered_json kendall;
  kendall["S"] = dx.trend ? ordered_json(dx.trend->score) : ordered_json(nullptr);
  kendall["tau"] = dx.trend ? ordered_json(dx.trend->tau) : ordered_json(nullptr);
  kendall["p"] = dx.trend ? ordered_json(dx.trend->p_value) : ordered_json(nullptr);
  j["kendall"] = kendall;

  ordered_json ratio;
  ratio["p_u"] = dx.ratio ? ordered_json(dx.ratio->p_u) : ordered_json(nullptr);
  ratio["p_c"] = dx.ratio ? ordered_json(dx.ratio->p_c) : ordered_json(nullptr);
  ratio["value"] = dx.ratio ? ordered_json(dx.ratio->ratio) : ordered_json(nullptr);
  j["ratio"] = ratio;

  j["rate_status"] = to_string(dx.rate_status);
  j["trains_used"] = dx.trains_used;
  j["trains_total"] = dx.trains_total;
  j["profile"] = dx.profile == ProbeProfile::Standard ? "standard" : "ht";

  ordered_json th;
  th["alpha"] = dx.alpha;
  th["ratio"] = dx.ratio_threshold;
  th["median_us"] = dx.thresholds ? ordered_json(dx.thresholds->median_us) : ordered_json(nullptr);
  th["std_us"] = dx.thresholds ? ordered_json(dx.thresholds->stddev_us) : ordered_json(nullptr);
  th["od_us"] = dx.thresholds ? ordered_json(dx.thresholds->od_threshold_us) : ordered_json(nullptr);
  th["ld_us"] = dx.thresholds ? or_null(dx.thresholds->ld_threshold_us) : ordered_json(nullptr);
  j["thresholds"] = th;

  ordered_json pct = ordered_json::array();
  if (dx.percentiles) {
    for (const auto& p : dx.percentiles->pairs) {
      ordered_json e;
      e["size_ip"] = p.size_ip;
      e["a95_us"] = p.a95_us;
      e["n"] = p.samples;
      pct.push_back(e);
    }
  }
  j["percentiles"] = pct;
  if (scenario) j["scenario"] = *scenario;
  return j.dump(2);
}

void write_rates_report(const ExperimentRates& rates, std::ostream& out) {
  for (const auto& t : rates.trains) {
    ordered_json j;
    j["train"] = t.train_id;
    j["mode_rate"] = or_null(t.mode_rate);
    j["mode_fraction"] = t.mode_fraction;
    j["status"] = to_string(t.status);
    out << j.dump() << '\n';
  }
}

void write_delays_report(std::span<const AccessDelayRecord> delays, std::ostream& out) {
  for (const auto& r : delays) {
    ordered_json j;
    j["train"] = r.train_id;
    j["seq"] = r.seq;
    j["size_ip"] = r.size_ip;
    j["w_us"] = r.usable ? ordered_json(r.w_us) : ordered_json(nullptr);
    j["tx_us"] = r.tx_us;
    j["a_us"] = r.usable ? ordered_json(r.a_us) : ordered_json(nullptr);
    j["usable"] = r.usable;
    out << j.dump() << '\n';
  }
}

ReportEntry parse_report(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedReport, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_string())
    throw Error(ErrorCode::MalformedReport, "missing string field 'verdict'");
  const auto verdict = verdict_from_string(j["verdict"].get<std::string>());
  if (!verdict) throw Error(ErrorCode::MalformedReport, "unknown verdict '" + j["verdict"].get<std::string>() + "'");
  ReportEntry e;
  e.verdict = *verdict;
  e.scenario = (j.contains("scenario") && j["scenario"].is_string()) ? j["scenario"].get<std::string>()
                                                                      : "unlabeled";
  return e;
}

std::size_t VerdictMatrix::total(const std::string& scenario) const {
  std::size_t n = 0;
  if (auto it = rows.find(scenario); it != rows.end()) {
    for (const auto& [v, c] : it->second) n += c;
  }
  return n;
}

double VerdictMatrix::fraction(const std::string& scenario, Verdict v) const {
  const std::size_t n = total(scenario);
  if (n == 0) return 0.0;
  const auto& row = rows.at(scenario);
  const auto it = row.find(v);
  return it == row.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
}

VerdictMatrix build_matrix(std::span<const ReportEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::InsufficientData, "no verdicts to summarize");
  VerdictMatrix m;
  for (const auto& e : entries) ++m.rows[e.scenario][e.verdict];
  return m;
}

std::string render_matrix(const VerdictMatrix& matrix, bool markdown) {
  std::ostringstream out;
  if (markdown) {
    out << "| scenario | n |";
    for (Verdict v : kColumns) out << ' ' << to_string(v) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << "---|";
    out << '\n';
    for (const auto& [scenario, row] : matrix.rows) {
      out << "| " << scenario << " | " << matrix.total(scenario) << " |";
      for (Verdict v : kColumns) out << ' ' << fixed2(matrix.fraction(scenario, v)) << " |";
      out << '\n';
    }
    return out.str();
  }
  out << "scenario";
  for (Verdict v : kColumns) out << " / " << to_string(v);
  out << '\n';
  for (const auto& [scenario, row] : matrix.rows) {
    out << scenario << ": ";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) {
      if (i) out << " / ";
      out << fixed2(matrix.fraction(scenario, kColumns[i]));
    }
    out << "  (n=" << matrix.total(scenario) << ")\n";
  }
  return out.str();
}

}  // namespace wlanprobe
