#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wlanprobe/trace.hpp"

namespace wlanprobe {

/// 802.11b/g rates in Mbps (= bits per microsecond).
std::vector<double> default_rate_set();

/// MAC header 24 + FCS 4 + LLC/SNAP 8 bytes added on top of size_ip.
inline constexpr int kDefaultL2Overhead = 36;

struct RateInferenceConfig {
  std::vector<double> rate_set = default_rate_set();
  int l2_overhead = kDefaultL2Overhead;
  double mode_threshold = 0.30;
  double min_rate_mbps = 1.0;
  bool revise_tiny = true;
};

/// Frame size in bits the way the rate estimator sees it.
inline double frame_bits(int size_ip, int l2_overhead) {
  return 8.0 * static_cast<double>(size_ip + l2_overhead);
}

enum class RateFlag { Ok, Tiny, PredecessorLost, SubMinimum, Imputed, Lost };
const char* to_string(RateFlag flag);

struct RateEstimate {
  std::optional<double> raw_rate;
  std::optional<double> snapped_rate;
  RateFlag flag = RateFlag::Ok;
  std::optional<double> final_rate;  // absent when the train is rejected
};

enum class TrainRateStatus { Ok, TooNoisy };
const char* to_string(TrainRateStatus status);

struct TrainRateResult {
  int train_id = 0;
  std::vector<RateEstimate> estimates;
  std::optional<double> mode_rate;
  double mode_fraction = 0.0;
  TrainRateStatus status = TrainRateStatus::TooNoisy;
  std::optional<double> tiny_dispersion_us;
  bool revised = false;
};

/// Receiver-side dispersions; entry i is set when packets i-1 and i were received.
std::vector<std::optional<Micros>> dispersions(const Train& train);

/// Dispersions of every received pair whose second packet is a tiny-probe.
std::vector<double> tiny_pair_dispersions(const Train& train);

/// Median tiny-pair dispersion. Throws Error(NoTinyPairs).
double tiny_median_dispersion(const Train& train);

/// Nearest rate in the set; ties go to the lower rate.
double snap_to_standard(double raw_rate, std::span<const double> rate_set);

/// Raw and snapped first-transmission rates with per-packet flags.
std::vector<RateEstimate> estimate_raw_rates(const Train& train, double tiny_dispersion_us,
                                             const RateInferenceConfig& config = {});

/// Mode of the unflagged snapped estimates; imputes it everywhere unless the
/// mode covers less than `mode_threshold` of them.
TrainRateResult mode_correct(std::vector<RateEstimate> estimates, double mode_threshold = 0.30);

/// Tiny-probe dispersion corrected for the tiny-probes' own transmission
/// latency at `mode_rate`.
double revised_tiny_dispersion(const Train& train, double mode_rate, int l2_overhead);

/// One extra pass with the corrected tiny dispersion. A second pass that
/// turns TooNoisy leaves the first pass in place.
TrainRateResult revise_tiny_and_rerun(const Train& train, const TrainRateResult& first_pass,
                                      const RateInferenceConfig& config = {});

/// Full per-train pipeline; never throws for unusable trains.
TrainRateResult infer_train_rates(const Train& train, const RateInferenceConfig& config = {});

enum class ExperimentStatus { Ok, Abort };
const char* to_string(ExperimentStatus status);

struct ExperimentRates {
  std::vector<TrainRateResult> trains;
  std::size_t too_noisy = 0;
  ExperimentStatus status = ExperimentStatus::Abort;
};

/// Abort when strictly more than half of the trains are TooNoisy.
ExperimentStatus experiment_status(std::size_t too_noisy, std::size_t total);

ExperimentRates infer_experiment_rates(const Trace& trace, const RateInferenceConfig& config = {});

}  // namespace wlanprobe
