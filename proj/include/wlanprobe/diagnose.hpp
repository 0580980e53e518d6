#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanprobe/access_delay.hpp"
#include "wlanprobe/rate_inference.hpp"
#include "wlanprobe/schedule.hpp"
#include "wlanprobe/trace.hpp"

namespace wlanprobe {

// ---- size-dependence ----

struct SizePercentile {
  int size_ip = 0;
  Micros a95_us = 0;
  std::size_t samples = 0;
};

/// One entry per surviving size, sizes strictly increasing.
struct SizePercentilePairs {
  std::vector<SizePercentile> pairs;
};

/// Nearest-rank 95th percentile of usable non-tiny access delays per size.
/// Throws Error(InsufficientData) when fewer than `min_sizes` sizes keep
/// at least `min_samples` records.
SizePercentilePairs percentile95_by_size(std::span<const AccessDelayRecord> records,
                                         std::size_t min_samples = 30, std::size_t min_sizes = 5);

enum class TrendDecision { SizeDependent, SizeIndependent };
const char* to_string(TrendDecision d);

struct TrendResult {
  int score = 0;
  double tau = 0.0;
  double p_value = 1.0;
  TrendDecision decision = TrendDecision::SizeIndependent;
  bool degenerate = false;  // all percentiles equal
};

/// One-sided exact Kendall test for an increasing trend, 5 <= n <= 10.
TrendResult kendall_trend_test(const SizePercentilePairs& pairs, double alpha = 0.01);

// ---- low SNR vs hidden terminals ----

enum class EventLabel { Plain, OD, LD, L3, Unlabeled };
const char* to_string(EventLabel label);

struct EventThresholds {
  double median_us = 0.0;
  double stddev_us = 0.0;
  double od_threshold_us = 0.0;  // median + 3 std
  std::optional<double> ld_threshold_us;  // p90 of the non-OD delays
};

/// Labels for a flat sample of delays (experiment-wide).
struct DelayLabels {
  std::vector<EventLabel> labels;  // OD, LD or Plain
  EventThresholds thresholds;
};
DelayLabels label_delays(std::span<const double> delays);

struct EventLabels {
  std::vector<std::vector<EventLabel>> trains;  // per scheduled packet
  EventThresholds thresholds;
};

/// Lost packets are L3. Received packets get OD/LD/Plain from the
/// experiment-wide sample of usable access delays, or Unlabeled when their
/// delay is unknown. Trains with `include_train[t] == false` are entirely
/// Unlabeled.
EventLabels label_events(const Trace& trace, std::span<const AccessDelayRecord> records,
                         const std::vector<bool>& include_train);

struct RatioResult {
  double p_u = 0.0;
  double p_c = 0.0;
  double ratio = 0.0;
  std::size_t labeled = 0;
  std::size_t triggers = 0;
  std::size_t triggers_with_successor = 0;
  std::size_t successor_events = 0;
};

/// p_u = P[OD or L3], p_c = P[successor is LD or L3 | OD or L3]. Successors
/// never cross train boundaries. Throws Error(NoTriggers).
RatioResult probability_ratio(const EventLabels& labels);

enum class Verdict { Congestion, LowSNR, SymmetricHT, Aborted };
const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

/// ratio > threshold -> LowSNR, else SymmetricHT.
Verdict classify_snr_ht(double ratio, double threshold = 4.0);

/// The tree edges for fixed evidence.
Verdict decide(double p_value, double alpha, std::optional<double> ratio, double ratio_threshold);

// ---- pipeline ----

struct DiagnoseConfig {
  RateInferenceConfig rates;
  double alpha = 0.01;
  double ratio_threshold = 4.0;
  std::size_t min_samples = 30;
  ProbeProfile profile = ProbeProfile::Standard;
};

struct Diagnosis {
  Verdict verdict = Verdict::Aborted;
  std::string reason;
  ExperimentStatus rate_status = ExperimentStatus::Abort;
  std::size_t trains_total = 0;
  std::size_t trains_used = 0;
  std::optional<SizePercentilePairs> percentiles;
  std::optional<TrendResult> trend;
  std::optional<EventThresholds> thresholds;
  std::optional<RatioResult> ratio;
  double alpha = 0.01;
  double ratio_threshold = 4.0;
  ProbeProfile profile = ProbeProfile::Standard;
};

/// Intermediate products kept for the per-train and per-packet reports.
struct DiagnosisRun {
  Diagnosis diagnosis;
  ExperimentRates rates;
  std::vector<AccessDelayRecord> delays;
};

DiagnosisRun diagnose_detailed(const Trace& trace, const DiagnoseConfig& config = {});
Diagnosis diagnose(const Trace& trace, const DiagnoseConfig& config = {});

}  // namespace wlanprobe
