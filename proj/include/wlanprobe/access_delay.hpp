#pragma once

#include <optional>
#include <vector>

#include "wlanprobe/rate_inference.hpp"
#include "wlanprobe/trace.hpp"

namespace wlanprobe {

struct AccessDelayRecord {
  int train_id = 0;
  int seq = 0;
  int size_ip = 0;
  bool is_tiny = false;
  Micros w_us = 0;
  Micros tx_us = 0;
  Micros a_us = 0;
  bool usable = false;
};

/// Sender queue wait behind the previous packet: max(d_prev - gap, 0).
Micros wait_time(Micros d_prev, Micros gap);

/// First-transmission latency 8*(size_ip + l2_overhead)/rate, rounded to the
/// nearest microsecond.
Micros tx_latency_us(int size_ip, double rate_mbps, int l2_overhead);

/// a = d - w - tx. Not clamped: small negative values are estimation noise.
Micros access_delay(Micros d, Micros w, int size_ip, double rate_mbps, int l2_overhead);

/// Records for every received packet of every rate-Ok train. `owd[t]` is empty
/// for trains with nothing received.
std::vector<AccessDelayRecord> compute_access_delays(const Trace& trace,
                                                     const std::vector<std::optional<OwdSeries>>& owd,
                                                     const ExperimentRates& rates,
                                                     int l2_overhead = kDefaultL2Overhead);

/// relative_owd for every train, empty where the train lost everything.
std::vector<std::optional<OwdSeries>> relative_owd_all(const Trace& trace);

}  // namespace wlanprobe
