#include "wlanprobe/trace.hpp"

#include <algorithm>
#include <limits>

#include "wlanprobe/error.hpp"

namespace wlanprobe {

std::size_t Train::received_count() const {
  return static_cast<std::size_t>(
      std::ranges::count_if(records, [](const ProbeRecord& r) { return !r.lost(); }));
}

std::size_t Trace::record_count() const {
  std::size_t n = 0;
  for (const auto& t : trains) n += t.records.size();
  return n;
}

std::size_t Trace::loss_count() const {
  std::size_t n = 0;
  for (const auto& t : trains) n += t.records.size() - t.received_count();
  return n;
}

OwdSeries relative_owd(const Train& train) {
  Micros min_owd = std::numeric_limits<Micros>::max();
  for (const auto& r : train.records) {
    if (r.recv_ts) min_owd = std::min(min_owd, *r.recv_ts - r.send_ts);
  }
  if (min_owd == std::numeric_limits<Micros>::max()) {
    throw Error(ErrorCode::EmptyTrain,
                "train " + std::to_string(train.train_id) + " has no received packets");
  }

  OwdSeries out;
  out.delay.reserve(train.records.size());
  out.gap.reserve(train.records.size());
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    const auto& r = train.records[i];
    if (r.recv_ts)
      out.delay.emplace_back(*r.recv_ts - r.send_ts - min_owd);
    else
      out.delay.emplace_back(std::nullopt);
    out.gap.push_back(i == 0 ? 0 : r.send_ts - train.records[i - 1].send_ts);
  }
  return out;
}

ValidationReport validate_trace(const Trace& trace, int expected_train_len) {
  ValidationReport report;
  auto add = [&](int train, int seq, std::string msg) {
    report.issues.push_back({train, seq, std::move(msg)});
  };

  if (trace.schedule.n_trains != static_cast<int>(trace.trains.size())) {
    add(-1, -1, "header declares " + std::to_string(trace.schedule.n_trains) +
                    " trains but trace has " + std::to_string(trace.trains.size()));
  }

  for (std::size_t t = 0; t < trace.trains.size(); ++t) {
    const Train& train = trace.trains[t];
    const int id = train.train_id;
    if (id != static_cast<int>(t)) {
      add(id, -1, "train_id " + std::to_string(id) + " out of order, expected " +
                      std::to_string(t));
    }
    if (expected_train_len > 0 &&
        static_cast<int>(train.records.size()) != expected_train_len) {
      add(id, -1, "train length " + std::to_string(train.records.size()) +
                      " != " + std::to_string(expected_train_len));
    }
    bool any_tiny = false;
    for (std::size_t i = 0; i < train.records.size(); ++i) {
      const ProbeRecord& r = train.records[i];
      if (r.train_id != id) add(id, r.seq, "record carries train_id " + std::to_string(r.train_id));
      if (i > 0) {
        const ProbeRecord& prev = train.records[i - 1];
        if (r.seq <= prev.seq) add(id, r.seq, "seq not strictly increasing");
        if (r.send_ts < prev.send_ts) add(id, r.seq, "send_ts decreasing");
      }
      if (r.size_ip < kTinySizeIp) {
        add(id, r.seq, "size_ip " + std::to_string(r.size_ip) + " below the 8-byte probe header");
      }
      if (r.is_tiny != (r.size_ip == kTinySizeIp)) {
        add(id, r.seq, r.is_tiny ? "tiny flag on a non-tiny size"
                                 : "tiny-sized packet without tiny flag");
      }
      any_tiny = any_tiny || r.is_tiny;
    }
    if (!any_tiny) add(id, -1, "no tiny-probe in train");
  }
  return report;
}

}  // namespace wlanprobe
