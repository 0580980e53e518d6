#include "wlanprobe/rate_inference.hpp"

#include <cmath>
#include <map>

#include "wlanprobe/error.hpp"
#include "wlanprobe/stats.hpp"

namespace wlanprobe {

std::vector<double> default_rate_set() { return {1, 2, 5.5, 6, 9, 11, 12, 18, 24, 36, 48, 54}; }

const char* to_string(RateFlag flag) {
  switch (flag) {
    case RateFlag::Ok: return "ok";
    case RateFlag::Tiny: return "tiny";
    case RateFlag::PredecessorLost: return "predecessor_lost";
    case RateFlag::SubMinimum: return "sub_minimum";
    case RateFlag::Imputed: return "imputed";
    case RateFlag::Lost: return "lost";
  }
  return "?";
}

const char* to_string(TrainRateStatus status) {
  return status == TrainRateStatus::Ok ? "ok" : "too_noisy";
}

const char* to_string(ExperimentStatus status) {
  return status == ExperimentStatus::Ok ? "ok" : "abort";
}

std::vector<std::optional<Micros>> dispersions(const Train& train) {
  const auto& recs = train.records;
  std::vector<std::optional<Micros>> out(recs.size());
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].recv_ts && recs[i - 1].recv_ts) out[i] = *recs[i].recv_ts - *recs[i - 1].recv_ts;
  }
  return out;
}

std::vector<double> tiny_pair_dispersions(const Train& train) {
  const auto disp = dispersions(train);
  std::vector<double> out;
  for (std::size_t i = 1; i < disp.size(); ++i) {
    if (train.records[i].is_tiny && disp[i]) out.push_back(static_cast<double>(*disp[i]));
  }
  return out;
}

double tiny_median_dispersion(const Train& train) {
  auto values = tiny_pair_dispersions(train);
  if (values.empty()) {
    throw Error(ErrorCode::NoTinyPairs,
                "train " + std::to_string(train.train_id) + " has no received tiny-probe pair");
  }
  return stats::median(std::move(values));
}

double snap_to_standard(double raw_rate, std::span<const double> rate_set) {
  double best = rate_set.front();
  double best_dist = std::abs(raw_rate - best);
  for (double r : rate_set) {
    const double dist = std::abs(raw_rate - r);
    if (dist < best_dist || (dist == best_dist && r < best)) {
      best = r;
      best_dist = dist;
    }
  }
  return best;
}

std::vector<RateEstimate> estimate_raw_rates(const Train& train, double tiny_dispersion_us,
                                             const RateInferenceConfig& config) {
  const auto& recs = train.records;
  const auto disp = dispersions(train);
  std::vector<RateEstimate> out(recs.size());

  for (std::size_t i = 0; i < recs.size(); ++i) {
    RateEstimate& e = out[i];
    if (recs[i].lost()) {
      e.flag = RateFlag::Lost;
    } else if (recs[i].is_tiny) {
      e.flag = RateFlag::Tiny;
    } else if (!disp[i]) {
      // First packet of a train has no dispersion, same as a lost predecessor.
      e.flag = RateFlag::PredecessorLost;
    } else {
      const double denom = static_cast<double>(*disp[i]) - tiny_dispersion_us;
      if (denom <= 0.0) {
        e.flag = RateFlag::SubMinimum;
        continue;
      }
      const double raw = frame_bits(recs[i].size_ip, config.l2_overhead) / denom;
      e.raw_rate = raw;
      if (raw < config.min_rate_mbps) {
        e.flag = RateFlag::SubMinimum;
      } else {
        e.flag = RateFlag::Ok;
        e.snapped_rate = snap_to_standard(raw, config.rate_set);
      }
    }
  }
  return out;
}

TrainRateResult mode_correct(std::vector<RateEstimate> estimates, double mode_threshold) {
  TrainRateResult result;
  std::map<double, std::size_t> counts;
  std::size_t unflagged = 0;
  for (const auto& e : estimates) {
    if (e.flag == RateFlag::Ok && e.snapped_rate) {
      ++counts[*e.snapped_rate];
      ++unflagged;
    }
  }

  if (unflagged > 0) {
    // Ascending iteration with strict '>' keeps the lower rate on count ties.
    double mode = 0.0;
    std::size_t best = 0;
    for (const auto& [rate, n] : counts) {
      if (n > best) {
        mode = rate;
        best = n;
      }
    }
    result.mode_rate = mode;
    result.mode_fraction = static_cast<double>(best) / static_cast<double>(unflagged);
  }

  result.status = (unflagged > 0 && result.mode_fraction >= mode_threshold)
                      ? TrainRateStatus::Ok
                      : TrainRateStatus::TooNoisy;
  if (result.status == TrainRateStatus::Ok) {
    for (auto& e : estimates) {
      e.final_rate = result.mode_rate;
      if (e.flag != RateFlag::Ok && e.flag != RateFlag::Lost) e.flag = RateFlag::Imputed;
    }
  }
  result.estimates = std::move(estimates);
  return result;
}

double revised_tiny_dispersion(const Train& train, double mode_rate, int l2_overhead) {
  const auto disp = dispersions(train);
  std::vector<double> corrected;
  for (std::size_t i = 1; i < disp.size(); ++i) {
    if (!train.records[i].is_tiny || !disp[i]) continue;
    const double tx = frame_bits(train.records[i].size_ip, l2_overhead) / mode_rate;
    corrected.push_back(static_cast<double>(*disp[i]) - tx);
  }
  if (corrected.empty()) {
    throw Error(ErrorCode::NoTinyPairs,
                "train " + std::to_string(train.train_id) + " has no received tiny-probe pair");
  }
  return stats::median(std::move(corrected));
}

TrainRateResult revise_tiny_and_rerun(const Train& train, const TrainRateResult& first_pass,
                                      const RateInferenceConfig& config) {
  if (first_pass.status != TrainRateStatus::Ok || !first_pass.mode_rate) return first_pass;
  const double revised = revised_tiny_dispersion(train, *first_pass.mode_rate, config.l2_overhead);
  TrainRateResult second =
      mode_correct(estimate_raw_rates(train, revised, config), config.mode_threshold);
  if (second.status != TrainRateStatus::Ok) return first_pass;
  second.train_id = train.train_id;
  second.tiny_dispersion_us = revised;
  second.revised = true;
  return second;
}

TrainRateResult infer_train_rates(const Train& train, const RateInferenceConfig& config) {
  TrainRateResult result;
  result.train_id = train.train_id;
  const auto tiny = tiny_pair_dispersions(train);
  if (tiny.empty()) {
    result.status = TrainRateStatus::TooNoisy;
    result.estimates.resize(train.records.size());
    for (std::size_t i = 0; i < train.records.size(); ++i) {
      if (train.records[i].lost()) result.estimates[i].flag = RateFlag::Lost;
    }
    return result;
  }
  const double tiny_disp = stats::median(tiny);
  result = mode_correct(estimate_raw_rates(train, tiny_disp, config), config.mode_threshold);
  result.train_id = train.train_id;
  result.tiny_dispersion_us = tiny_disp;
  if (config.revise_tiny) result = revise_tiny_and_rerun(train, result, config);
  return result;
}

ExperimentStatus experiment_status(std::size_t too_noisy, std::size_t total) {
  if (total == 0) return ExperimentStatus::Abort;
  return 2 * too_noisy > total ? ExperimentStatus::Abort : ExperimentStatus::Ok;
}

ExperimentRates infer_experiment_rates(const Trace& trace, const RateInferenceConfig& config) {
  ExperimentRates out;
  out.trains.reserve(trace.trains.size());
  for (const auto& train : trace.trains) {
    out.trains.push_back(infer_train_rates(train, config));
    if (out.trains.back().status == TrainRateStatus::TooNoisy) ++out.too_noisy;
  }
  out.status = experiment_status(out.too_noisy, out.trains.size());
  return out;
}

}  // namespace wlanprobe
