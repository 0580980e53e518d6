#include "wlanprobe/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "wlanprobe/error.hpp"
#include "wlanprobe/trace.hpp"

namespace wlanprobe {

ProbeSchedule ProbeSchedule::hidden_terminal_profile() {
  ProbeSchedule s;
  // Largest UDP payload that fits a 1500-byte MTU without fragmentation.
  s.size_set = {1472};
  return s;
}

ProbeSchedule ProbeSchedule::for_profile(ProbeProfile profile) {
  return profile == ProbeProfile::HiddenTerminal ? hidden_terminal_profile() : ProbeSchedule{};
}

std::size_t ScheduleLayout::packet_count() const {
  std::size_t n = 0;
  for (const auto& t : trains) n += t.size();
  return n;
}

int tiny_per_train(const ProbeSchedule& schedule) {
  const auto k = static_cast<int>(std::lround(schedule.tiny_fraction * schedule.packets_per_train));
  return std::clamp(k, 1, schedule.packets_per_train);
}

ScheduleLayout build_schedule(const ProbeSchedule& schedule) {
  if (!(schedule.tiny_fraction > 0.0 && schedule.tiny_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "tiny_fraction must lie in (0,1)");
  if (schedule.size_set.empty()) throw Error(ErrorCode::InvalidConfig, "size_set is empty");
  if (schedule.packets_per_train < 2)
    throw Error(ErrorCode::InvalidConfig, "packets_per_train must be >= 2");
  if (schedule.n_trains < 0) throw Error(ErrorCode::InvalidConfig, "n_trains must be >= 0");
  for (int s : schedule.size_set) {
    if (s <= kTinyPayloadBytes || s > 65507)
      throw Error(ErrorCode::InvalidConfig, "payload size " + std::to_string(s) + " out of range");
  }

  std::mt19937_64 rng(schedule.rng_seed);
  std::uniform_int_distribution<std::size_t> pick_size(0, schedule.size_set.size() - 1);
  const int n_tiny = tiny_per_train(schedule);

  ScheduleLayout layout;
  layout.trains.reserve(static_cast<std::size_t>(schedule.n_trains));
  std::vector<int> positions(static_cast<std::size_t>(schedule.packets_per_train));
  for (int t = 0; t < schedule.n_trains; ++t) {
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);
    std::vector<bool> tiny(positions.size(), false);
    for (int k = 0; k < n_tiny; ++k) tiny[static_cast<std::size_t>(positions[k])] = true;

    std::vector<PacketSpec> train;
    train.reserve(positions.size());
    for (bool is_tiny : tiny) {
      const int payload = is_tiny ? kTinyPayloadBytes : schedule.size_set[pick_size(rng)];
      train.push_back({payload + kUdpIpHeaderBytes, is_tiny});
    }
    layout.trains.push_back(std::move(train));
  }
  return layout;
}

}  // namespace wlanprobe
