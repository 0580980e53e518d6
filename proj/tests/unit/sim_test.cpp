#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wlanprobe/error.hpp"
#include "wlanprobe/sim.hpp"
#include "wlanprobe/stats.hpp"
#include "wlanprobe/trace_io.hpp"

using namespace wlanprobe;
using namespace wlanprobe::sim;

namespace {

SimulationResult run(ScenarioKind kind, Intensity intensity, std::uint64_t seed) {
  return simulate(ProbeSchedule{}, scenario_preset(kind, intensity, seed));
}

double mean_retries(const GroundTruth& truth, int size_ip) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : truth.packets)
    if (p.size_ip == size_ip) {
      sum += p.retries;
      ++n;
    }
  return sum / n;
}

bool corrupted(const PacketTruth& p) { return p.lost || p.retries > 0; }

}  // namespace

TEST_CASE("clean fixed-rate channel: no retries, access delay is DIFS + backoff + SIFS + ACK") {
  auto sc = scenario_preset(ScenarioKind::Normal, Intensity::Mild, 1);
  sc.adapter = RateAdapterConfig::fixed(54.0);
  sc.ber = 0.0;
  const ChannelModel ch;
  const auto sim = simulate(ProbeSchedule{}, sc, ch);
  for (const auto& p : sim.truth.packets) {
    CHECK(p.retries == 0);
    CHECK_FALSE(p.lost);
    CHECK(p.rate_mbps == 54.0);
    CHECK(p.access_us >= ch.constant_latency());
    CHECK(p.access_us <= ch.constant_latency() + ch.cw_min * ch.slot);
    CHECK(p.access_us == ch.constant_latency() + p.backoffs.front().slots * ch.slot);
  }
}

TEST_CASE("simulate is deterministic in the seed") {
  const auto a = run(ScenarioKind::Congestion, Intensity::Severe, 9);
  const auto b = run(ScenarioKind::Congestion, Intensity::Severe, 9);
  const auto c = run(ScenarioKind::Congestion, Intensity::Severe, 10);
  CHECK(a.trace == b.trace);
  std::ostringstream ta, tb;
  save_truth(a.truth, ta);
  save_truth(b.truth, tb);
  CHECK(ta.str() == tb.str());
  CHECK_FALSE(a.trace == c.trace);
}

TEST_CASE("retry limit and losses") {
  const ChannelModel ch;
  for (auto kind : {ScenarioKind::LowSNR, ScenarioKind::SHT, ScenarioKind::Congestion}) {
    const auto sim = run(kind, Intensity::Severe, 2);
    for (const auto& p : sim.truth.packets) {
      CHECK(p.retries <= ch.retry_limit);
      CHECK(p.backoffs.size() == static_cast<std::size_t>(p.retries) + 1);
      if (p.lost) CHECK(p.retries == ch.retry_limit);
      int cw = ch.cw_min;
      for (const auto& b : p.backoffs) {
        CHECK(b.window == cw);
        CHECK(b.slots >= 0);
        CHECK(b.slots <= b.window);
        cw = ch.next_window(cw);
      }
    }
  }
  CHECK(ch.next_window(15) == 31);
  CHECK(ch.next_window(511) == 1023);
  CHECK(ch.next_window(1023) == 1023);
}

TEST_CASE("first backoff draws are uniform over the initial window") {
  const ChannelModel ch;
  std::vector<double> hist(static_cast<std::size_t>(ch.cw_min) + 1, 0.0);
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 2; ++seed)
    for (const auto& p : run(ScenarioKind::Congestion, Intensity::Mild, seed).truth.packets) {
      hist[static_cast<std::size_t>(p.backoffs.front().slots)] += 1.0;
      total += 1.0;
    }
  const double expected = total / static_cast<double>(hist.size());
  double chi2 = 0.0;
  for (double n : hist) chi2 += (n - expected) * (n - expected) / expected;
  // 15 degrees of freedom, 0.1% critical value.
  CHECK(chi2 < 37.70);
}

TEST_CASE("low SNR: large frames retry more than small ones") {
  const auto sim = run(ScenarioKind::LowSNR, Intensity::Severe, 3);
  CHECK(mean_retries(sim.truth, 1436) > mean_retries(sim.truth, 236));
  CHECK(sim.trace.loss_count() > 0);
}

TEST_CASE("congestion: retries do not depend on size") {
  const auto sim = run(ScenarioKind::Congestion, Intensity::Severe, 4);
  std::vector<double> size, retries;
  for (const auto& p : sim.truth.packets) {
    size.push_back(p.size_ip);
    retries.push_back(p.retries);
  }
  const double ms = stats::mean(size), mr = stats::mean(retries);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < size.size(); ++i) {
    sxy += (size[i] - ms) * (retries[i] - mr);
    sxx += (size[i] - ms) * (size[i] - ms);
    syy += (retries[i] - mr) * (retries[i] - mr);
  }
  const double corr = syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  CHECK(std::abs(corr) < 0.1);
}

TEST_CASE("hidden terminals: corruption is not strongly clustered") {
  const auto sim = run(ScenarioKind::SHT, Intensity::Severe, 5);
  const std::size_t ppt = static_cast<std::size_t>(sim.trace.schedule.packets_per_train);
  std::size_t all = 0, hit = 0, after = 0, hit_after = 0;
  for (std::size_t k = 0; k < sim.truth.packets.size(); ++k) {
    const auto& p = sim.truth.packets[k];
    ++all;
    hit += corrupted(p);
    if (corrupted(p) && (k + 1) % ppt != 0) {
      ++after;
      hit_after += corrupted(sim.truth.packets[k + 1]);
    }
  }
  REQUIRE(after > 0);
  const double ratio = (static_cast<double>(hit_after) / after) / (static_cast<double>(hit) / all);
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 3.0);
  std::size_t collisions = 0;
  for (const auto& p : sim.truth.packets) collisions += p.cause == FailureCause::Collision;
  CHECK(collisions > 0);
}

TEST_CASE("scenario validation") {
  auto code_of = [](const Scenario& s) {
    try {
      simulate(ProbeSchedule{}, s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  Scenario s = scenario_preset(ScenarioKind::Normal, Intensity::Mild);
  s.ber = 1.5;
  CHECK(code_of(s) == ErrorCode::InvalidScenario);
  s = scenario_preset(ScenarioKind::Normal, Intensity::Mild);
  s.adapter = RateAdapterConfig::fixed(13.0);
  CHECK(code_of(s) == ErrorCode::InvalidScenario);
  s = scenario_preset(ScenarioKind::Normal, Intensity::Mild);
  s.adapter = RateAdapterConfig::sampler(54.0, 1.5);
  CHECK(code_of(s) == ErrorCode::InvalidScenario);

  CHECK(scenario_from_string("low-snr") == ScenarioKind::LowSNR);
  CHECK_FALSE(scenario_from_string("rain"));
  CHECK(intensity_from_string("mild") == Intensity::Mild);
}

TEST_CASE("truth persistence carries the scenario label") {
  const auto sim = run(ScenarioKind::SHT, Intensity::Mild, 1);
  const auto path = std::filesystem::temp_directory_path() / "wlanprobe_truth_test.jsonl";
  save_truth(sim.truth, path);
  CHECK(load_truth_label(path) == std::string("sht/mild"));
  std::filesystem::remove(path);
}
