#include "wlanprobe/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "wlanprobe/access_delay.hpp"
#include "wlanprobe/error.hpp"

namespace wlanprobe::sim {

namespace {

using Rng = std::mt19937_64;
constexpr Micros kNever = std::numeric_limits<Micros>::max() / 4;

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

Micros draw_exponential(Rng& rng, double mean_us) {
  if (mean_us <= 0.0) return 0;
  return static_cast<Micros>(std::llround(std::exponential_distribution<double>(1.0 / mean_us)(rng)));
}

/// Frames of a carrier-sensed station; the probe sender defers to them.
class SensedTraffic {
 public:
  SensedTraffic(const std::optional<Contender>& c, const ChannelModel& ch, std::uint64_t seed)
      : rng_(make_stream(seed, 11)), difs_(ch.difs) {
    if (!c) return;
    active_ = true;
    busy_us_ = tx_latency_us(c->frame_bytes, c->rate_mbps, ch.l2_overhead) + ch.sifs + ch.ack;
    // utilization = busy / (busy + difs + mean idle)
    idle_mean_us_ = std::max(0.0, static_cast<double>(busy_us_) * (1.0 - c->utilization) / c->utilization -
                                      static_cast<double>(difs_));
    next_start_ = gap();
  }

  /// First instant >= t at which the medium is idle.
  Micros idle_at(Micros t) {
    if (!active_) return t;
    for (;;) {
      const Micros end = next_start_ + busy_us_;
      if (end <= t) {
        next_start_ = end + gap();
      } else if (next_start_ <= t) {
        t = end;
      } else {
        return t;
      }
    }
  }

  Micros next_start() const { return active_ ? next_start_ : kNever; }

  /// The probe holds the medium over [start, end); a pending frame waits.
  void defer(Micros end) {
    if (active_ && next_start_ < end) next_start_ = end + gap();
  }

 private:
  Micros gap() { return difs_ + draw_exponential(rng_, idle_mean_us_); }

  Rng rng_;
  bool active_ = false;
  Micros difs_;
  Micros busy_us_ = 0;
  double idle_mean_us_ = 0.0;
  Micros next_start_ = kNever;
};

/// Frames of a station outside carrier-sense range.
class HiddenTraffic {
 public:
  HiddenTraffic(const std::optional<HiddenNode>& h, const ChannelModel& ch, std::uint64_t seed)
      : rng_(make_stream(seed, 12)) {
    if (!h) return;
    active_ = true;
    frame_us_ = tx_latency_us(h->frame_bytes, h->rate_mbps, ch.l2_overhead);
    idle_mean_us_ = std::max(1.0, 1e6 / h->frames_per_s - static_cast<double>(frame_us_));
    backoff_mean_us_ = h->backoff_mean_us;
    next_start_ = draw_exponential(rng_, idle_mean_us_);
  }

  /// True when a hidden frame overlaps [start, end). Queries must not go back in time.
  bool collides(Micros start, Micros end) {
    if (!active_) return false;
    while (next_start_ < end) {
      frames_.push_back({next_start_, next_start_ + frame_us_});
      next_start_ += frame_us_ + draw_exponential(rng_, idle_mean_us_);
    }
    while (!frames_.empty() && frames_.front().end <= start) frames_.pop_front();
    for (std::size_t k = 0; k < frames_.size(); ++k) {
      const Frame f = frames_[k];
      if (f.start < end && f.end > start) {
        // Both frames are lost; the hidden station backs off before sending again.
        frames_.resize(k + 1);
        next_start_ = std::max(f.end, end) + draw_exponential(rng_, backoff_mean_us_);
        return true;
      }
    }
    return false;
  }

 private:
  struct Frame {
    Micros start;
    Micros end;
  };

  Rng rng_;
  bool active_ = false;
  Micros frame_us_ = 0;
  double idle_mean_us_ = 0.0;
  double backoff_mean_us_ = 0.0;
  Micros next_start_ = kNever;
  std::deque<Frame> frames_;
};

/// Per-attempt frame error process: constant BER or Gilbert-Elliott.
class BitErrors {
 public:
  BitErrors(const Scenario& s, std::uint64_t seed) : rng_(make_stream(seed, 13)), ber_(s.ber) {
    if (!s.fading) return;
    ge_ = *s.fading;
    const double p_bad = ge_->mean_bad_us / (ge_->mean_good_us + ge_->mean_bad_us);
    bad_ = std::bernoulli_distribution(p_bad)(rng_);
    state_end_ = sojourn();
  }

  double ber_at(Micros t) {
    if (!ge_) return ber_;
    while (t >= state_end_) {
      bad_ = !bad_;
      state_end_ += sojourn();
    }
    return bad_ ? ge_->ber_bad : ge_->ber_good;
  }

  bool frame_fails(Micros t, double bits) {
    const double ber = ber_at(t);
    if (ber <= 0.0) return false;
    const double p_fail = -std::expm1(bits * std::log1p(-ber));
    return std::bernoulli_distribution(p_fail)(rng_);
  }

 private:
  Micros sojourn() { return std::max<Micros>(1, draw_exponential(rng_, bad_ ? ge_->mean_bad_us : ge_->mean_good_us)); }

  Rng rng_;
  double ber_;
  std::optional<GilbertElliott> ge_;
  bool bad_ = false;
  Micros state_end_ = kNever;
};

class RateAdapter {
 public:
  RateAdapter(const RateAdapterConfig& cfg, const ChannelModel& ch, std::uint64_t seed)
      : cfg_(cfg), rates_(ch.rate_set), rng_(make_stream(seed, 14)) {
    std::ranges::sort(rates_);
  }

  void begin_train() {
    failures_ = 0;
    switch (cfg_.kind) {
      case AdapterKind::Fixed: current_ = cfg_.rate; break;
      case AdapterKind::Sticky: current_ = pick(cfg_.sticky_rates); break;
      case AdapterKind::Sampler: current_ = cfg_.rate; break;
    }
  }

  double rate_for_packet() {
    if (cfg_.kind != AdapterKind::Sampler) return current_;
    if (!std::bernoulli_distribution(cfg_.p_probe)(rng_)) return current_;
    if (!cfg_.probe_rates.empty()) return pick(cfg_.probe_rates);
    // Probe the next faster rate; at the top of the set, the next slower one.
    const auto it = std::ranges::find(rates_, current_);
    if (it == rates_.end()) return current_;
    if (it + 1 != rates_.end()) return *(it + 1);
    return it != rates_.begin() ? *(it - 1) : current_;
  }

  void on_attempt(bool success) {
    if (cfg_.kind != AdapterKind::Sampler) return;
    if (success) {
      failures_ = 0;
      return;
    }
    if (++failures_ < cfg_.failures_to_drop) return;
    failures_ = 0;
    const auto it = std::ranges::find(rates_, current_);
    if (it != rates_.end() && it != rates_.begin()) current_ = *(it - 1);
  }

 private:
  double pick(const std::vector<double>& from) {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng_)];
  }

  RateAdapterConfig cfg_;
  std::vector<double> rates_;
  Rng rng_;
  double current_ = 0.0;
  int failures_ = 0;
};

}  // namespace

int ChannelModel::next_window(int cw) const { return std::min(2 * cw + 1, cw_max); }

RateAdapterConfig RateAdapterConfig::fixed(double rate) {
  RateAdapterConfig c;
  c.kind = AdapterKind::Fixed;
  c.rate = rate;
  return c;
}

RateAdapterConfig RateAdapterConfig::sticky(std::vector<double> rates) {
  RateAdapterConfig c;
  c.kind = AdapterKind::Sticky;
  c.sticky_rates = std::move(rates);
  return c;
}

RateAdapterConfig RateAdapterConfig::sampler(double base, double p_probe, std::vector<double> probe_rates) {
  RateAdapterConfig c;
  c.kind = AdapterKind::Sampler;
  c.rate = base;
  c.p_probe = p_probe;
  c.probe_rates = std::move(probe_rates);
  return c;
}

const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::None: return "none";
    case FailureCause::BitError: return "bit_error";
    case FailureCause::Collision: return "collision";
  }
  return "?";
}

void validate_scenario(const Scenario& s, const ChannelModel& ch) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidScenario, why); };
  auto in_set = [&](double r) { return std::ranges::find(ch.rate_set, r) != ch.rate_set.end(); };

  if (ch.slot <= 0 || ch.difs < 0 || ch.sifs < 0 || ch.ack < 0) fail("negative channel timing");
  if (ch.cw_min < 1 || ch.cw_max < ch.cw_min) fail("contention window bounds invalid");
  if (ch.retry_limit < 0) fail("retry_limit must be >= 0");
  if (ch.rate_set.empty()) fail("empty rate set");

  const auto& a = s.adapter;
  switch (a.kind) {
    case AdapterKind::Fixed:
      if (!in_set(a.rate)) fail("fixed rate not in the rate set");
      break;
    case AdapterKind::Sticky:
      if (a.sticky_rates.empty() || !std::ranges::all_of(a.sticky_rates, in_set))
        fail("sticky rates must be a non-empty subset of the rate set");
      break;
    case AdapterKind::Sampler:
      if (!in_set(a.rate)) fail("sampler base rate not in the rate set");
      if (!(a.p_probe >= 0.0 && a.p_probe <= 1.0)) fail("p_probe must lie in [0,1]");
      if (!std::ranges::all_of(a.probe_rates, in_set)) fail("sampler probe rates not in the rate set");
      if (a.failures_to_drop < 1) fail("failures_to_drop must be >= 1");
      break;
  }
  if (!(s.ber >= 0.0 && s.ber < 1.0)) fail("ber must lie in [0,1)");
  if (s.fading) {
    const auto& g = *s.fading;
    if (!(g.ber_good >= 0.0 && g.ber_good < 1.0 && g.ber_bad >= 0.0 && g.ber_bad < 1.0))
      fail("Gilbert-Elliott bit error rates must lie in [0,1)");
    if (!(g.mean_good_us > 0.0 && g.mean_bad_us > 0.0)) fail("Gilbert-Elliott sojourns must be positive");
  }
  if (s.contender) {
    const auto& c = *s.contender;
    if (!(c.utilization > 0.0 && c.utilization < 1.0)) fail("contender utilization must lie in (0,1)");
    if (c.frame_bytes <= 0 || !(c.rate_mbps > 0.0)) fail("contender frame invalid");
  }
  if (s.hidden) {
    const auto& h = *s.hidden;
    if (!(h.frames_per_s > 0.0) || h.frame_bytes <= 0 || !(h.rate_mbps > 0.0) || h.backoff_mean_us < 0.0)
      fail("hidden node parameters invalid");
  }
  if (s.sender.gap_min_us < 0 || s.sender.gap_jitter_us < 0) fail("sender gaps must be >= 0");
}

SimulationResult simulate(const ProbeSchedule& schedule, const Scenario& scenario,
                          const ChannelModel& channel) {
  validate_scenario(scenario, channel);
  const ScheduleLayout layout = build_schedule(schedule);

  Rng sender_rng = make_stream(scenario.rng_seed, 1);
  Rng backoff_rng = make_stream(scenario.rng_seed, 2);
  SensedTraffic medium(scenario.contender, channel, scenario.rng_seed);
  HiddenTraffic hidden(scenario.hidden, channel, scenario.rng_seed);
  BitErrors errors(scenario, scenario.rng_seed);
  RateAdapter adapter(scenario.adapter, channel, scenario.rng_seed);

  SimulationResult out;
  GroundTruth& truth = out.truth;
  truth.kind = scenario.kind;
  truth.intensity = scenario.intensity;
  truth.seed = scenario.rng_seed;
  truth.clock_offset_us = std::uniform_int_distribution<Micros>(1'000'000'000, 2'000'000'000)(sender_rng);
  truth.packets.reserve(layout.packet_count());

  Trace& trace = out.trace;
  trace.schedule = {schedule.n_trains, schedule.packets_per_train};
  trace.trains.resize(layout.trains.size());

  const auto inter_train = static_cast<Micros>(std::llround(schedule.inter_train_gap_s * 1e6));
  std::uniform_int_distribution<Micros> jitter(0, scenario.sender.gap_jitter_us);

  // DIFS, backoff countdown frozen while the medium is busy, then transmit.
  auto contend = [&](Micros ready, int cw, PacketTruth& pkt) {
    int slots = std::uniform_int_distribution<int>(0, cw)(backoff_rng);
    pkt.backoffs.push_back({cw, slots});
    Micros t = ready;
    for (;;) {
      t = medium.idle_at(t);
      const Micros need = channel.difs + slots * channel.slot;
      const Micros interrupt = medium.next_start();
      if (interrupt >= t + need) return t + need;
      const Micros elapsed = interrupt - t;
      if (elapsed > channel.difs) slots -= static_cast<int>((elapsed - channel.difs) / channel.slot);
      t = interrupt;
    }
  };

  Micros send_clock = 1'000'000;
  Micros nic_free = 0;
  for (std::size_t t = 0; t < layout.trains.size(); ++t) {
    Train& train = trace.trains[t];
    train.train_id = static_cast<int>(t);
    adapter.begin_train();

    for (std::size_t i = 0; i < layout.trains[t].size(); ++i) {
      const PacketSpec& spec = layout.trains[t][i];
      if (i > 0) send_clock += scenario.sender.gap_min_us + jitter(sender_rng);

      PacketTruth pkt;
      pkt.train_id = static_cast<int>(t);
      pkt.seq = static_cast<int>(i);
      pkt.size_ip = spec.size_ip;
      pkt.rate_mbps = adapter.rate_for_packet();
      pkt.tx_us = tx_latency_us(spec.size_ip, pkt.rate_mbps, channel.l2_overhead);
      const double bits = frame_bits(spec.size_ip, channel.l2_overhead);

      const Micros head_of_line = std::max(send_clock, nic_free);
      pkt.w_us = head_of_line - send_clock;

      Micros ready = head_of_line;
      Micros done = head_of_line;
      int cw = channel.cw_min;
      bool delivered = false;
      for (int attempt = 0; attempt <= channel.retry_limit; ++attempt) {
        const Micros start = contend(ready, cw, pkt);
        const Micros air_end = start + pkt.tx_us;
        done = air_end + channel.sifs + channel.ack;
        medium.defer(done);

        FailureCause cause = FailureCause::None;
        if (hidden.collides(start, air_end))
          cause = FailureCause::Collision;
        else if (errors.frame_fails(start, bits))
          cause = FailureCause::BitError;
        adapter.on_attempt(cause == FailureCause::None);

        if (cause == FailureCause::None) {
          delivered = true;
          break;
        }
        pkt.cause = cause;
        pkt.retries = attempt;
        cw = channel.next_window(cw);
        ready = done;
      }
      nic_free = done;

      ProbeRecord rec;
      rec.train_id = pkt.train_id;
      rec.seq = pkt.seq;
      rec.size_ip = spec.size_ip;
      rec.is_tiny = spec.is_tiny;
      rec.send_ts = send_clock;
      if (delivered) {
        pkt.retries = static_cast<int>(pkt.backoffs.size()) - 1;
        pkt.owd_us = done - send_clock;
        pkt.access_us = pkt.owd_us - pkt.w_us - pkt.tx_us;
        rec.recv_ts = done + truth.clock_offset_us;
      } else {
        pkt.lost = true;
        pkt.retries = channel.retry_limit;
      }
      train.records.push_back(rec);
      truth.packets.push_back(std::move(pkt));
    }
    send_clock += inter_train;
  }
  return out;
}

}  // namespace wlanprobe::sim
