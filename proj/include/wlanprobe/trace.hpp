#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wlanprobe {

using Micros = std::int64_t;

/// UDP (8) + IPv4 (20) header bytes carried on top of the probe payload.
inline constexpr int kUdpIpHeaderBytes = 28;
/// Payload of a tiny-probe: 4-byte sequence number + 4-byte timestamp.
inline constexpr int kTinyPayloadBytes = 8;
inline constexpr int kTinySizeIp = kTinyPayloadBytes + kUdpIpHeaderBytes;

struct ProbeRecord {
  int train_id = 0;
  int seq = 0;
  int size_ip = 0;
  bool is_tiny = false;
  Micros send_ts = 0;
  std::optional<Micros> recv_ts;

  bool lost() const { return !recv_ts.has_value(); }
  int payload_bytes() const { return size_ip - kUdpIpHeaderBytes; }

  friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

struct Train {
  int train_id = 0;
  std::vector<ProbeRecord> records;

  std::size_t received_count() const;

  friend bool operator==(const Train&, const Train&) = default;
};

enum class Direction { ClientToServer };

/// Header metadata persisted with a trace.
struct TraceSchedule {
  int n_trains = 0;
  int packets_per_train = 0;

  friend bool operator==(const TraceSchedule&, const TraceSchedule&) = default;
};

struct Trace {
  std::vector<Train> trains;
  TraceSchedule schedule;
  Direction direction = Direction::ClientToServer;

  std::size_t record_count() const;
  std::size_t loss_count() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Per-train relative one-way delays after clock-offset removal.
struct OwdSeries {
  /// d_i, absent for lost packets. The minimum over received packets is 0.
  std::vector<std::optional<Micros>> delay;
  /// g_i = send_ts(i) - send_ts(i-1); gap[0] is 0.
  std::vector<Micros> gap;

  std::size_t size() const { return delay.size(); }
  bool lost(std::size_t i) const { return !delay[i].has_value(); }
};

/// Subtracts the per-train minimum raw OWD. Throws Error(EmptyTrain) when
/// nothing in the train was received.
OwdSeries relative_owd(const Train& train);

struct ValidationIssue {
  int train_id = -1;  // -1 for trace-level issues
  int seq = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
};

/// Lists every invariant violation. `expected_train_len` of 0 skips the
/// train-length check.
ValidationReport validate_trace(const Trace& trace, int expected_train_len = 50);

}  // namespace wlanprobe
