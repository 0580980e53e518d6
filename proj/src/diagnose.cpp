#include "wlanprobe/diagnose.hpp"

#include <algorithm>
#include <map>

#include "wlanprobe/error.hpp"
#include "wlanprobe/kendall.hpp"
#include "wlanprobe/stats.hpp"

namespace wlanprobe {

const char* to_string(TrendDecision d) {
  return d == TrendDecision::SizeDependent ? "size_dependent" : "size_independent";
}

const char* to_string(EventLabel label) {
  switch (label) {
    case EventLabel::Plain: return "plain";
    case EventLabel::OD: return "OD";
    case EventLabel::LD: return "LD";
    case EventLabel::L3: return "L3";
    case EventLabel::Unlabeled: return "unlabeled";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Congestion: return "congestion";
    case Verdict::LowSNR: return "low_snr";
    case Verdict::SymmetricHT: return "symmetric_ht";
    case Verdict::Aborted: return "aborted";
  }
  return "?";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::Congestion, Verdict::LowSNR, Verdict::SymmetricHT, Verdict::Aborted}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

SizePercentilePairs percentile95_by_size(std::span<const AccessDelayRecord> records,
                                         std::size_t min_samples, std::size_t min_sizes) {
  std::map<int, std::vector<Micros>> by_size;
  for (const auto& r : records) {
    if (r.usable && !r.is_tiny) by_size[r.size_ip].push_back(r.a_us);
  }
  SizePercentilePairs out;
  for (auto& [size, delays] : by_size) {
    if (delays.size() < min_samples) continue;
    const std::size_t n = delays.size();
    out.pairs.push_back({size, stats::nearest_rank(std::move(delays), 95.0), n});
  }
  if (out.pairs.size() < min_sizes) {
    throw Error(ErrorCode::InsufficientData,
                "only " + std::to_string(out.pairs.size()) + " probe sizes have at least " +
                    std::to_string(min_samples) + " usable access delays (need " +
                    std::to_string(min_sizes) + ")");
  }
  return out;
}

TrendResult kendall_trend_test(const SizePercentilePairs& pairs, double alpha) {
  const std::size_t n = pairs.pairs.size();
  if (n < 5) throw Error(ErrorCode::InsufficientData, "Kendall trend test needs at least 5 sizes");
  if (n > 10) throw Error(ErrorCode::InvalidConfig, "Kendall trend test supports at most 10 sizes");

  std::vector<double> y;
  y.reserve(n);
  for (const auto& p : pairs.pairs) y.push_back(static_cast<double>(p.a95_us));

  TrendResult result;
  if (std::ranges::adjacent_find(y, std::ranges::not_equal_to{}) == y.end()) {
    result.degenerate = true;
    return result;
  }
  const KendallTail tail = kendall_upper_tail(y);
  result.score = tail.score;
  result.tau = static_cast<double>(tail.score) / static_cast<double>(n * (n - 1) / 2);
  result.p_value = tail.p_value();
  result.decision = result.p_value < alpha ? TrendDecision::SizeDependent : TrendDecision::SizeIndependent;
  return result;
}

DelayLabels label_delays(std::span<const double> delays) {
  DelayLabels out;
  out.labels.assign(delays.size(), EventLabel::Plain);
  if (delays.empty()) return out;

  EventThresholds& th = out.thresholds;
  th.median_us = stats::median({delays.begin(), delays.end()});
  th.stddev_us = stats::sample_stddev(delays);
  th.od_threshold_us = th.median_us + 3.0 * th.stddev_us;

  std::vector<double> rest;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (delays[i] > th.od_threshold_us)
      out.labels[i] = EventLabel::OD;
    else
      rest.push_back(delays[i]);
  }
  if (rest.empty()) return out;
  th.ld_threshold_us = stats::nearest_rank(rest, 90.0);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    if (out.labels[i] == EventLabel::Plain && delays[i] > *th.ld_threshold_us)
      out.labels[i] = EventLabel::LD;
  }
  return out;
}

EventLabels label_events(const Trace& trace, std::span<const AccessDelayRecord> records,
                         const std::vector<bool>& include_train) {
  EventLabels out;
  out.trains.resize(trace.trains.size());
  for (std::size_t t = 0; t < trace.trains.size(); ++t) {
    const auto& train = trace.trains[t];
    const bool included = t < include_train.size() && include_train[t];
    out.trains[t].resize(train.records.size(), EventLabel::Unlabeled);
    if (!included) continue;
    for (std::size_t i = 0; i < train.records.size(); ++i) {
      if (train.records[i].lost()) out.trains[t][i] = EventLabel::L3;
    }
  }

  std::vector<double> sample;
  std::vector<const AccessDelayRecord*> sources;
  for (const auto& r : records) {
    const auto t = static_cast<std::size_t>(r.train_id);
    if (!r.usable || t >= include_train.size() || !include_train[t]) continue;
    sample.push_back(static_cast<double>(r.a_us));
    sources.push_back(&r);
  }
  DelayLabels labeled = label_delays(sample);
  out.thresholds = labeled.thresholds;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const auto t = static_cast<std::size_t>(sources[k]->train_id);
    const auto i = static_cast<std::size_t>(sources[k]->seq);
    if (t < out.trains.size() && i < out.trains[t].size()) out.trains[t][i] = labeled.labels[k];
  }
  return out;
}

RatioResult probability_ratio(const EventLabels& labels) {
  RatioResult r;
  auto trigger = [](EventLabel l) { return l == EventLabel::OD || l == EventLabel::L3; };
  std::size_t events = 0;

  for (const auto& train : labels.trains) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train[i] == EventLabel::Unlabeled) continue;
      ++r.labeled;
      if (!trigger(train[i])) continue;
      ++events;
      if (i + 1 >= train.size()) continue;
      ++r.triggers_with_successor;
      if (train[i + 1] == EventLabel::LD || train[i + 1] == EventLabel::L3) ++r.successor_events;
    }
  }
  r.triggers = events;
  if (r.triggers_with_successor == 0) {
    throw Error(ErrorCode::NoTriggers, "no OD or L3 event with an in-train successor");
  }
  r.p_u = static_cast<double>(events) / static_cast<double>(r.labeled);
  r.p_c = static_cast<double>(r.successor_events) / static_cast<double>(r.triggers_with_successor);
  r.ratio = r.p_c / r.p_u;
  return r;
}

Verdict classify_snr_ht(double ratio, double threshold) {
  return ratio > threshold ? Verdict::LowSNR : Verdict::SymmetricHT;
}

Verdict decide(double p_value, double alpha, std::optional<double> ratio, double ratio_threshold) {
  if (!(p_value < alpha)) return Verdict::Congestion;
  if (!ratio) return Verdict::Aborted;
  return classify_snr_ht(*ratio, ratio_threshold);
}

DiagnosisRun diagnose_detailed(const Trace& trace, const DiagnoseConfig& config) {
  DiagnosisRun run;
  Diagnosis& dx = run.diagnosis;
  dx.alpha = config.alpha;
  dx.ratio_threshold = config.ratio_threshold;
  dx.profile = config.profile;
  dx.trains_total = trace.trains.size();

  const auto owd = relative_owd_all(trace);
  run.rates = infer_experiment_rates(trace, config.rates);
  dx.rate_status = run.rates.status;
  dx.trains_used = run.rates.trains.size() - run.rates.too_noisy;
  if (run.rates.status == ExperimentStatus::Abort) {
    dx.verdict = Verdict::Aborted;
    dx.reason = std::to_string(run.rates.too_noisy) + " of " + std::to_string(run.rates.trains.size()) +
                " trains have no dominant transmission rate";
    return run;
  }

  run.delays = compute_access_delays(trace, owd, run.rates, config.rates.l2_overhead);

  if (config.profile == ProbeProfile::Standard) {
    try {
      dx.percentiles = percentile95_by_size(run.delays, config.min_samples);
      dx.trend = kendall_trend_test(*dx.percentiles, config.alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData) throw;
      dx.verdict = Verdict::Aborted;
      dx.reason = e.what();
      return run;
    }
    if (dx.trend->decision == TrendDecision::SizeIndependent) {
      dx.verdict = Verdict::Congestion;
      return run;
    }
  }

  std::vector<bool> include(trace.trains.size(), false);
  for (std::size_t t = 0; t < trace.trains.size(); ++t) {
    include[t] = run.rates.trains[t].status == TrainRateStatus::Ok ||
                 trace.trains[t].received_count() == 0;
  }
  const EventLabels labels = label_events(trace, run.delays, include);
  dx.thresholds = labels.thresholds;
  try {
    dx.ratio = probability_ratio(labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoTriggers) throw;
    dx.verdict = Verdict::Aborted;
    dx.reason = e.what();
    return run;
  }
  dx.verdict = classify_snr_ht(dx.ratio->ratio, config.ratio_threshold);
  return run;
}

Diagnosis diagnose(const Trace& trace, const DiagnoseConfig& config) {
  return diagnose_detailed(trace, config).diagnosis;
}

}  // namespace wlanprobe
