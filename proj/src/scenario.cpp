#include <fstream>

#include <json.hpp>

#include "wlanprobe/error.hpp"
#include "wlanprobe/sim.hpp"

namespace wlanprobe::sim {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Normal: return "normal";
    case ScenarioKind::LowSNR: return "low-snr";
    case ScenarioKind::Congestion: return "congestion";
    case ScenarioKind::SHT: return "sht";
  }
  return "?";
}

const char* to_string(Intensity i) { return i == Intensity::Mild ? "mild" : "severe"; }

std::optional<ScenarioKind> scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::Normal, ScenarioKind::LowSNR, ScenarioKind::Congestion, ScenarioKind::SHT}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<Intensity> intensity_from_string(const std::string& s) {
  if (s == "mild") return Intensity::Mild;
  if (s == "severe") return Intensity::Severe;
  return std::nullopt;
}

Scenario scenario_preset(ScenarioKind kind, Intensity intensity, std::uint64_t seed) {
  const bool severe = intensity == Intensity::Severe;
  Scenario s;
  s.kind = kind;
  s.intensity = intensity;
  s.rng_seed = seed;

  // 11/12 and 36/48/54 Mbps are too close for the per-train mode to separate
  // under backoff noise, so sticky presets draw from well-spaced rates.
  const std::vector<double> spaced = {6, 9, 18, 24};
  switch (kind) {
    case ScenarioKind::Normal:
      s.adapter = RateAdapterConfig::sticky(spaced);
      s.ber = 1e-6;
      break;
    case ScenarioKind::LowSNR: {
      s.adapter = RateAdapterConfig::sampler(36.0, 0.05);
      GilbertElliott ge;
      ge.ber_good = 1e-6;
      ge.ber_bad = severe ? 5e-4 : 1e-4;
      ge.mean_good_us = 20000.0;
      ge.mean_bad_us = 20000.0;
      s.fading = ge;
      break;
    }
    case ScenarioKind::Congestion: {
      s.adapter = RateAdapterConfig::sticky(spaced);
      Contender c;
      c.utilization = severe ? 0.8 : 0.5;
      s.contender = c;
      break;
    }
    case ScenarioKind::SHT: {
      s.adapter = RateAdapterConfig::sticky(spaced);
      HiddenNode h;
      h.frames_per_s = severe ? 250.0 : 150.0;
      s.hidden = h;
      break;
    }
  }
  return s;
}

void save_truth(const GroundTruth& truth, std::ostream& out) {
  nlohmann::ordered_json header;
  header["version"] = 1;
  header["scenario"] = to_string(truth.kind);
  header["intensity"] = to_string(truth.intensity);
  header["seed"] = truth.seed;
  header["clock_offset_us"] = truth.clock_offset_us;
  out << header.dump() << '\n';
  for (const auto& p : truth.packets) {
    nlohmann::ordered_json j;
    j["train"] = p.train_id;
    j["seq"] = p.seq;
    j["rate_mbps"] = p.rate_mbps;
    j["retries"] = p.retries;
    if (p.lost)
      j["access_us"] = nullptr;
    else
      j["access_us"] = p.access_us;
    j["cause"] = to_string(p.cause);
    j["lost"] = p.lost;
    if (p.lost)
      j["owd_us"] = nullptr;
    else
      j["owd_us"] = p.owd_us;
    j["w_us"] = p.w_us;
    j["tx_us"] = p.tx_us;
    out << j.dump() << '\n';
  }
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save_truth(truth, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::optional<std::string> load_truth_label(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "file not found: " + path.string());
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("scenario")) return std::nullopt;
    std::string label = j.at("scenario").get<std::string>();
    if (j.contains("intensity")) label += "/" + j.at("intensity").get<std::string>();
    return label;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedTrace, "truth header in " + path.string() + " is not valid JSON");
  }
}

}  // namespace wlanprobe::sim
