#include <doctest.h>

#include <map>

#include "wlanprobe/error.hpp"
#include "wlanprobe/schedule.hpp"
#include "wlanprobe/trace.hpp"

using namespace wlanprobe;

namespace {

std::vector<std::pair<int, bool>> flatten(const ScheduleLayout& l) {
  std::vector<std::pair<int, bool>> out;
  for (const auto& t : l.trains)
    for (const auto& p : t) out.emplace_back(p.size_ip, p.is_tiny);
  return out;
}

}  // namespace

TEST_CASE("build_schedule is deterministic in the seed") {
  ProbeSchedule s;
  s.rng_seed = 7;
  CHECK(flatten(build_schedule(s)) == flatten(build_schedule(s)));
  ProbeSchedule other = s;
  other.rng_seed = 8;
  CHECK(flatten(build_schedule(s)) != flatten(build_schedule(other)));
}

TEST_CASE("every train has exactly five tiny-probes by default") {
  const auto layout = build_schedule(ProbeSchedule{});
  REQUIRE(layout.trains.size() == 100);
  CHECK(layout.packet_count() == 5000);
  for (const auto& train : layout.trains) {
    REQUIRE(train.size() == 50);
    int tiny = 0;
    for (const auto& p : train) {
      tiny += p.is_tiny;
      CHECK(p.is_tiny == (p.size_ip == kTinySizeIp));
    }
    CHECK(tiny == 5);
  }
}

TEST_CASE("a tiny fraction that rounds to zero still yields one tiny-probe") {
  ProbeSchedule s;
  s.packets_per_train = 4;
  s.tiny_fraction = 0.05;
  CHECK(tiny_per_train(s) == 1);
  for (const auto& train : build_schedule(s).trains) {
    int tiny = 0;
    for (const auto& p : train) tiny += p.is_tiny;
    CHECK(tiny == 1);
  }
}

TEST_CASE("probe sizes are uniform over the size set") {
  const ProbeSchedule s;
  std::map<int, int> hist;
  int total = 0;
  for (const auto& train : build_schedule(s).trains)
    for (const auto& p : train)
      if (!p.is_tiny) {
        ++hist[p.size_ip - kUdpIpHeaderBytes];
        ++total;
      }
  REQUIRE(hist.size() == s.size_set.size());
  const double expected = static_cast<double>(total) / static_cast<double>(s.size_set.size());
  double chi2 = 0.0;
  for (int size : s.size_set) {
    const double n = hist[size];
    CHECK(n > 0.8 * expected);
    CHECK(n < 1.2 * expected);
    chi2 += (n - expected) * (n - expected) / expected;
  }
  // 6 degrees of freedom, 0.1% critical value.
  CHECK(chi2 < 22.46);
}

TEST_CASE("hidden-terminal profile sends one large size") {
  const auto layout = build_schedule(ProbeSchedule::hidden_terminal_profile());
  for (const auto& train : layout.trains)
    for (const auto& p : train)
      if (!p.is_tiny) CHECK(p.size_ip == 1472 + kUdpIpHeaderBytes);
}

TEST_CASE("build_schedule rejects bad configurations") {
  auto code_of = [](ProbeSchedule s) {
    try {
      build_schedule(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  ProbeSchedule s;
  s.tiny_fraction = 0.0;
  CHECK(code_of(s) == ErrorCode::InvalidConfig);
  s.tiny_fraction = 1.0;
  CHECK(code_of(s) == ErrorCode::InvalidConfig);
  s = ProbeSchedule{};
  s.size_set.clear();
  CHECK(code_of(s) == ErrorCode::InvalidConfig);
  s = ProbeSchedule{};
  s.packets_per_train = 1;
  CHECK(code_of(s) == ErrorCode::InvalidConfig);
}
