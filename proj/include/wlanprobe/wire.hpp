#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanprobe/schedule.hpp"
#include "wlanprobe/trace.hpp"

namespace wlanprobe {

inline constexpr std::uint16_t kDefaultProbePort = 9802;
inline constexpr std::size_t kProbeHeaderBytes = 8;

struct ProbePayload {
  std::uint32_t seq = 0;
  std::uint32_t send_ts = 0;  // sender monotonic clock, microseconds mod 2^32

  friend bool operator==(const ProbePayload&, const ProbePayload&) = default;
};

/// Big-endian seq, big-endian timestamp, zero padding up to total_size.
std::vector<std::uint8_t> encode_probe(const ProbePayload& payload, std::size_t total_size);
/// Throws Error(ShortDatagram) below 8 bytes; padding is ignored.
ProbePayload decode_probe(std::span<const std::uint8_t> bytes);

/// Monotonic microsecond clock shared by sender and receiver code paths.
Micros monotonic_now_us();

/// Expands a 32-bit wire timestamp to the 64-bit value nearest to `reference`.
Micros unwrap_timestamp(std::uint32_t wire, Micros reference);

/// "host:port", ":port", "port" or "[v6addr]:port".
struct Endpoint {
  std::string host;  // empty means any address
  std::uint16_t port = kDefaultProbePort;

  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

struct SendLogEntry {
  int train_id = 0;
  int seq = 0;
  int size_ip = 0;
  bool is_tiny = false;
  Micros send_ts = 0;
};

struct SendLog {
  std::vector<SendLogEntry> entries;
};

/// Wire sequence number of (train, seq): trains are numbered consecutively.
inline std::uint32_t global_sequence(int train_id, int seq, int packets_per_train) {
  return static_cast<std::uint32_t>(train_id) * static_cast<std::uint32_t>(packets_per_train) +
         static_cast<std::uint32_t>(seq);
}

/// Emits each train back-to-back and sleeps inter_train_gap between trains.
SendLog run_sender(const ProbeSchedule& schedule, const Endpoint& dest);

struct Arrival {
  std::uint32_t global_seq = 0;
  std::uint32_t wire_ts = 0;
  Micros recv_ts = 0;
  std::size_t payload_bytes = 0;
};

struct ReceiveResult {
  std::vector<Arrival> arrivals;
  bool timed_out = false;  // stopped on the idle timeout before all probes arrived
  std::size_t malformed = 0;
};

/// Bound UDP socket collecting probe arrivals.
class ProbeReceiver {
 public:
  explicit ProbeReceiver(const Endpoint& listen);
  ~ProbeReceiver();
  ProbeReceiver(const ProbeReceiver&) = delete;
  ProbeReceiver& operator=(const ProbeReceiver&) = delete;

  std::uint16_t port() const { return port_; }

  /// Reads until `expected` distinct probes arrived or no datagram was seen
  /// for `idle_timeout`.
  ReceiveResult receive(std::size_t expected, std::chrono::milliseconds idle_timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Merges arrivals with the schedule. With a send log the sender's 64-bit
/// timestamps are authoritative; otherwise the wire timestamps are unwrapped.
Trace assemble_trace(const ProbeSchedule& schedule, const std::vector<Arrival>& arrivals,
                     const SendLog* send_log = nullptr);

struct ReceiverRun {
  Trace trace;
  bool timed_out = false;
  std::size_t arrivals = 0;
};

ReceiverRun run_receiver(const Endpoint& listen, const ProbeSchedule& expected,
                         std::chrono::milliseconds idle_timeout);

}  // namespace wlanprobe
