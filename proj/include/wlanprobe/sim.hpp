#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wlanprobe/rate_inference.hpp"
#include "wlanprobe/schedule.hpp"
#include "wlanprobe/trace.hpp"

namespace wlanprobe::sim {

/// 802.11g DCF timing. Durations in microseconds, windows in slots.
struct ChannelModel {
  Micros slot = 9;
  Micros difs = 28;
  Micros sifs = 10;
  Micros ack = 30;
  int cw_min = 15;
  int cw_max = 1023;
  int retry_limit = 7;
  std::vector<double> rate_set = default_rate_set();
  int l2_overhead = kDefaultL2Overhead;

  /// DIFS + SIFS + ACK: the fixed part of every successful exchange.
  Micros constant_latency() const { return difs + sifs + ack; }
  int next_window(int cw) const;
};

enum class AdapterKind { Fixed, Sticky, Sampler };

struct RateAdapterConfig {
  AdapterKind kind = AdapterKind::Sticky;
  /// Fixed: the rate. Sampler: the base rate at every train start.
  double rate = 54.0;
  /// Sticky: candidate rates, one drawn per train.
  std::vector<double> sticky_rates = {6, 9, 18, 24};
  /// Sampler: per-packet probability of using a sample rate instead of the base.
  double p_probe = 0.1;
  /// Sampler: sample rates; empty means the next faster rate.
  std::vector<double> probe_rates;
  /// Sampler: consecutive failed attempts that drop the base one rate.
  int failures_to_drop = 3;

  static RateAdapterConfig fixed(double rate);
  static RateAdapterConfig sticky(std::vector<double> rates);
  static RateAdapterConfig sampler(double base, double p_probe, std::vector<double> probe_rates = {});
};

/// Two-state bit-error channel with exponential state sojourns.
struct GilbertElliott {
  double ber_good = 1e-6;
  double ber_bad = 1e-4;
  double mean_good_us = 20000.0;
  double mean_bad_us = 20000.0;
};

/// Carrier-sensed station with always-backlogged frames.
struct Contender {
  double utilization = 0.5;
  int frame_bytes = 1500;
  double rate_mbps = 24.0;
};

/// Station the probe sender cannot carrier-sense. Frames start as a Poisson
/// process; a frame overlapping a probe attempt corrupts both, after which
/// the hidden station stays silent for an exponential backoff.
struct HiddenNode {
  double frames_per_s = 150.0;
  int frame_bytes = 1500;
  double rate_mbps = 11.0;
  double backoff_mean_us = 1000.0;
};

/// User-level spacing between consecutive sends of a train.
struct SenderModel {
  Micros gap_min_us = 15;
  Micros gap_jitter_us = 10;
};

enum class ScenarioKind { Normal, LowSNR, Congestion, SHT };
enum class Intensity { Mild, Severe };

const char* to_string(ScenarioKind k);
const char* to_string(Intensity i);
std::optional<ScenarioKind> scenario_from_string(const std::string& s);
std::optional<Intensity> intensity_from_string(const std::string& s);

struct Scenario {
  ScenarioKind kind = ScenarioKind::Normal;
  Intensity intensity = Intensity::Mild;
  RateAdapterConfig adapter;
  double ber = 0.0;  // used when `fading` is absent
  std::optional<GilbertElliott> fading;
  std::optional<Contender> contender;
  std::optional<HiddenNode> hidden;
  SenderModel sender;
  std::uint64_t rng_seed = 1;
};

/// Documented presets for each pathology. Throws nothing.
Scenario scenario_preset(ScenarioKind kind, Intensity intensity, std::uint64_t seed = 1);

/// Throws Error(InvalidScenario) when a parameter is out of range.
void validate_scenario(const Scenario& scenario, const ChannelModel& channel);

enum class FailureCause { None, BitError, Collision };
const char* to_string(FailureCause c);

struct BackoffDraw {
  int window = 0;
  int slots = 0;
};

struct PacketTruth {
  int train_id = 0;
  int seq = 0;
  int size_ip = 0;
  double rate_mbps = 0.0;  // first transmission
  int retries = 0;
  bool lost = false;
  Micros owd_us = 0;     // true one-way delay (no clock offset)
  Micros w_us = 0;       // sender queue wait
  Micros tx_us = 0;      // first transmission latency
  Micros access_us = 0;  // c + beta
  FailureCause cause = FailureCause::None;
  std::vector<BackoffDraw> backoffs;
};

struct GroundTruth {
  ScenarioKind kind = ScenarioKind::Normal;
  Intensity intensity = Intensity::Mild;
  std::uint64_t seed = 0;
  Micros clock_offset_us = 0;  // receiver clock minus sender clock
  std::vector<PacketTruth> packets;  // schedule order
};

struct SimulationResult {
  Trace trace;
  GroundTruth truth;
};

SimulationResult simulate(const ProbeSchedule& schedule, const Scenario& scenario,
                          const ChannelModel& channel = {});

// GroundTruth persistence: header {version, scenario, intensity, seed,
// clock_offset_us}, then {train, seq, rate_mbps, retries, access_us, cause,
// lost, owd_us, w_us, tx_us} per packet.
void save_truth(const GroundTruth& truth, std::ostream& out);
void save_truth(const GroundTruth& truth, const std::filesystem::path& path);
/// Reads only the header's scenario label, if any.
std::optional<std::string> load_truth_label(const std::filesystem::path& path);

}  // namespace wlanprobe::sim
