#include "wlanprobe/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <memory>
#include <utility>
#include <thread>
#include <unordered_map>

#include "wlanprobe/error.hpp"

namespace wlanprobe {

namespace {

void put_be32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t get_be32(const std::uint8_t* in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
         (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

struct AddrInfoDeleter {
  void operator()(addrinfo* ai) const { freeaddrinfo(ai); }
};
using AddrInfoPtr = std::unique_ptr<addrinfo, AddrInfoDeleter>;

AddrInfoPtr resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = ep.host.empty() ? AF_INET : AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? (passive ? nullptr : "127.0.0.1") : ep.host.c_str();
  if (int rc = getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    throw Error(passive ? ErrorCode::BindFailure : ErrorCode::InvalidConfig,
                "cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  }
  return AddrInfoPtr(res);
}

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

}  // namespace

std::vector<std::uint8_t> encode_probe(const ProbePayload& payload, std::size_t total_size) {
  if (total_size < kProbeHeaderBytes)
    throw Error(ErrorCode::InvalidConfig, "probe size below the 8-byte header");
  std::vector<std::uint8_t> out(total_size, 0);
  put_be32(out.data(), payload.seq);
  put_be32(out.data() + 4, payload.send_ts);
  return out;
}

ProbePayload decode_probe(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kProbeHeaderBytes)
    throw Error(ErrorCode::ShortDatagram,
                "datagram of " + std::to_string(bytes.size()) + " bytes is shorter than 8");
  return {get_be32(bytes.data()), get_be32(bytes.data() + 4)};
}

Micros monotonic_now_us() {
  using namespace std::chrono;
  return duration_cast<microseconds>(steady_clock::now().time_since_epoch()).count();
}

Micros unwrap_timestamp(std::uint32_t wire, Micros reference) {
  constexpr Micros kWrap = Micros{1} << 32;
  const Micros base = reference - (reference % kWrap + kWrap) % kWrap;
  Micros best = base + wire;
  for (Micros cand : {best - kWrap, best + kWrap}) {
    if (std::llabs(cand - reference) < std::llabs(best - reference)) best = cand;
  }
  return best;
}

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint ep;
  std::string port_text;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string::npos || close + 1 >= text.size() || text[close + 1] != ':')
      throw Error(ErrorCode::InvalidConfig, "bad address '" + text + "'");
    ep.host = text.substr(1, close - 1);
    port_text = text.substr(close + 2);
  } else if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  } else {
    port_text = text;
  }
  try {
    std::size_t used = 0;
    const int port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad port in '" + text + "'");
  }
  return ep;
}

std::string Endpoint::to_string() const {
  if (host.find(':') != std::string::npos) return "[" + host + "]:" + std::to_string(port);
  return host + ":" + std::to_string(port);
}

SendLog run_sender(const ProbeSchedule& schedule, const Endpoint& dest) {
  const ScheduleLayout layout = build_schedule(schedule);
  AddrInfoPtr addr = resolve(dest, false);
  Socket sock(::socket(addr->ai_family, addr->ai_socktype, addr->ai_protocol));
  if (sock.get() < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));

  // Pre-encode every datagram so the send loop does no allocation.
  std::vector<std::vector<std::uint8_t>> buffers;
  SendLog log;
  log.entries.reserve(layout.packet_count());

  for (std::size_t t = 0; t < layout.trains.size(); ++t) {
    const auto& train = layout.trains[t];
    buffers.clear();
    for (std::size_t i = 0; i < train.size(); ++i) {
      buffers.push_back(encode_probe({}, static_cast<std::size_t>(train[i].size_ip - kUdpIpHeaderBytes)));
    }
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto& buf = buffers[i];
      const std::uint32_t gseq = global_sequence(static_cast<int>(t), static_cast<int>(i),
                                                 schedule.packets_per_train);
      const Micros ts = monotonic_now_us();
      put_be32(buf.data(), gseq);
      put_be32(buf.data() + 4, static_cast<std::uint32_t>(ts));
      // Losses are signal; a failed send is recorded like any other.
      (void)::sendto(sock.get(), buf.data(), buf.size(), 0, addr->ai_addr, addr->ai_addrlen);
      log.entries.push_back({static_cast<int>(t), static_cast<int>(i), train[i].size_ip,
                             train[i].is_tiny, ts});
    }
    if (t + 1 < layout.trains.size()) {
      std::this_thread::sleep_for(std::chrono::duration<double>(schedule.inter_train_gap_s));
    }
  }
  return log;
}

ProbeReceiver::ProbeReceiver(const Endpoint& listen) {
  AddrInfoPtr addr = resolve(listen, true);
  Socket sock(::socket(addr->ai_family, addr->ai_socktype, addr->ai_protocol));
  if (sock.get() < 0) throw Error(ErrorCode::BindFailure, std::string("socket: ") + std::strerror(errno));
  int rcvbuf = 4 << 20;
  ::setsockopt(sock.get(), SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
  if (::bind(sock.get(), addr->ai_addr, addr->ai_addrlen) != 0) {
    throw Error(ErrorCode::BindFailure,
                "cannot bind " + listen.to_string() + ": " + std::strerror(errno));
  }
  sockaddr_storage bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(sock.get(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = bound.ss_family == AF_INET6
              ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
              : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
  fd_ = sock.release();
}

ProbeReceiver::~ProbeReceiver() {
  if (fd_ >= 0) ::close(fd_);
}

ReceiveResult ProbeReceiver::receive(std::size_t expected, std::chrono::milliseconds idle_timeout) {
  ReceiveResult result;
  std::unordered_map<std::uint32_t, bool> seen;
  std::array<std::uint8_t, 65536> buf{};

  while (seen.size() < expected) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(idle_timeout.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) {
      result.timed_out = true;
      break;
    }
    // Drain everything queued, stamping each datagram right after recv.
    for (;;) {
      const ssize_t n = ::recv(fd_, buf.data(), buf.size(), MSG_DONTWAIT);
      const Micros now = monotonic_now_us();
      if (n < 0) break;
      if (static_cast<std::size_t>(n) < kProbeHeaderBytes) {
        ++result.malformed;
        continue;
      }
      const ProbePayload p = decode_probe(std::span(buf.data(), static_cast<std::size_t>(n)));
      if (!seen.emplace(p.seq, true).second) continue;
      result.arrivals.push_back({p.seq, p.send_ts, now, static_cast<std::size_t>(n)});
    }
  }
  return result;
}

Trace assemble_trace(const ProbeSchedule& schedule, const std::vector<Arrival>& arrivals,
                     const SendLog* send_log) {
  const ScheduleLayout layout = build_schedule(schedule);
  Trace trace;
  trace.schedule = {schedule.n_trains, schedule.packets_per_train};
  trace.trains.resize(layout.trains.size());

  std::unordered_map<std::uint32_t, const Arrival*> by_seq;
  for (const auto& a : arrivals) by_seq.emplace(a.global_seq, &a);

  std::unordered_map<std::uint32_t, Micros> logged_send;
  if (send_log) {
    for (const auto& e : send_log->entries)
      logged_send[global_sequence(e.train_id, e.seq, schedule.packets_per_train)] = e.send_ts;
  }

  Micros reference = 0;
  bool have_reference = false;
  for (std::size_t t = 0; t < layout.trains.size(); ++t) {
    Train& train = trace.trains[t];
    train.train_id = static_cast<int>(t);
    for (std::size_t i = 0; i < layout.trains[t].size(); ++i) {
      const PacketSpec& spec = layout.trains[t][i];
      ProbeRecord r;
      r.train_id = static_cast<int>(t);
      r.seq = static_cast<int>(i);
      r.size_ip = spec.size_ip;
      r.is_tiny = spec.is_tiny;
      const std::uint32_t gseq = global_sequence(r.train_id, r.seq, schedule.packets_per_train);
      const auto arrival = by_seq.find(gseq);
      if (arrival != by_seq.end()) {
        r.recv_ts = arrival->second->recv_ts;
        r.size_ip = static_cast<int>(arrival->second->payload_bytes) + kUdpIpHeaderBytes;
        r.is_tiny = r.size_ip == kTinySizeIp;
      }

      if (auto it = logged_send.find(gseq); it != logged_send.end()) {
        r.send_ts = it->second;
      } else if (arrival != by_seq.end()) {
        const std::uint32_t wire = arrival->second->wire_ts;
        r.send_ts = have_reference ? unwrap_timestamp(wire, reference) : Micros{wire};
      } else {
        // Lost and unlogged: hold the previous send time to keep send_ts monotone.
        r.send_ts = train.records.empty() ? reference : train.records.back().send_ts;
      }
      if (!train.records.empty()) r.send_ts = std::max(r.send_ts, train.records.back().send_ts);
      reference = r.send_ts;
      have_reference = have_reference || arrival != by_seq.end() || logged_send.contains(gseq);
      train.records.push_back(r);
    }
  }
  return trace;
}

ReceiverRun run_receiver(const Endpoint& listen, const ProbeSchedule& expected,
                         std::chrono::milliseconds idle_timeout) {
  ProbeReceiver receiver(listen);
  const auto total = static_cast<std::size_t>(expected.n_trains) *
                     static_cast<std::size_t>(expected.packets_per_train);
  ReceiveResult rx = receiver.receive(total, idle_timeout);
  ReceiverRun run;
  run.timed_out = rx.timed_out;
  run.arrivals = rx.arrivals.size();
  run.trace = assemble_trace(expected, rx.arrivals, nullptr);
  return run;
}

}  // namespace wlanprobe
