#include "wlanprobe/access_delay.hpp"

#include <algorithm>
#include <cmath>

namespace wlanprobe {

Micros wait_time(Micros d_prev, Micros gap) { return std::max<Micros>(d_prev - gap, 0); }

Micros tx_latency_us(int size_ip, double rate_mbps, int l2_overhead) {
  return static_cast<Micros>(std::llround(frame_bits(size_ip, l2_overhead) / rate_mbps));
}

Micros access_delay(Micros d, Micros w, int size_ip, double rate_mbps, int l2_overhead) {
  return d - w - tx_latency_us(size_ip, rate_mbps, l2_overhead);
}

std::vector<std::optional<OwdSeries>> relative_owd_all(const Trace& trace) {
  std::vector<std::optional<OwdSeries>> out;
  out.reserve(trace.trains.size());
  for (const auto& train : trace.trains) {
    if (train.received_count() == 0)
      out.emplace_back(std::nullopt);
    else
      out.emplace_back(relative_owd(train));
  }
  return out;
}

std::vector<AccessDelayRecord> compute_access_delays(const Trace& trace,
                                                     const std::vector<std::optional<OwdSeries>>& owd,
                                                     const ExperimentRates& rates,
                                                     int l2_overhead) {
  std::vector<AccessDelayRecord> out;
  for (std::size_t t = 0; t < trace.trains.size(); ++t) {
    const TrainRateResult& rate = rates.trains.at(t);
    if (rate.status != TrainRateStatus::Ok || !rate.mode_rate || !owd.at(t)) continue;
    const Train& train = trace.trains[t];
    const OwdSeries& series = *owd[t];

    for (std::size_t i = 0; i < train.records.size(); ++i) {
      const ProbeRecord& r = train.records[i];
      if (r.lost()) continue;
      AccessDelayRecord rec;
      rec.train_id = r.train_id;
      rec.seq = r.seq;
      rec.size_ip = r.size_ip;
      rec.is_tiny = r.is_tiny;
      const double rate_mbps = rate.estimates[i].final_rate.value_or(*rate.mode_rate);
      rec.tx_us = tx_latency_us(r.size_ip, rate_mbps, l2_overhead);

      if (i == 0) {
        // The inter-train idle period leaves the sender queue empty.
        rec.w_us = 0;
        rec.usable = true;
      } else if (!series.lost(i - 1)) {
        rec.w_us = wait_time(*series.delay[i - 1], series.gap[i]);
        rec.usable = true;
      }
      if (rec.usable) rec.a_us = *series.delay[i] - rec.w_us - rec.tx_us;
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace wlanprobe
