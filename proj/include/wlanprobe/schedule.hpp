#pragma once

#include <cstdint>
#include <vector>

namespace wlanprobe {

enum class ProbeProfile { Standard, HiddenTerminal };

/// Probing schedule descriptor. Sizes are UDP payload bytes.
struct ProbeSchedule {
  int n_trains = 100;
  int packets_per_train = 50;
  double tiny_fraction = 0.10;
  std::vector<int> size_set = {208, 408, 608, 808, 1008, 1208, 1408};
  double inter_train_gap_s = 1.0;
  std::uint64_t rng_seed = 1;

  /// Single large non-fragmenting payload for the SNR/hidden-terminal stage.
  static ProbeSchedule hidden_terminal_profile();
  static ProbeSchedule for_profile(ProbeProfile profile);
};

struct PacketSpec {
  int size_ip = 0;
  bool is_tiny = false;
};

struct ScheduleLayout {
  std::vector<std::vector<PacketSpec>> trains;

  std::size_t packet_count() const;
};

/// Number of tiny-probes placed in every train.
int tiny_per_train(const ProbeSchedule& schedule);

/// Deterministic in rng_seed. Throws Error(InvalidConfig).
ScheduleLayout build_schedule(const ProbeSchedule& schedule);

}  // namespace wlanprobe
