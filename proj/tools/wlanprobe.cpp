// wlanprobe: probe a WLAN path, simulate one, and diagnose the trace.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wlanprobe/diagnose.hpp"
#include "wlanprobe/error.hpp"
#include "wlanprobe/report.hpp"
#include "wlanprobe/sim.hpp"
#include "wlanprobe/trace_io.hpp"
#include "wlanprobe/wire.hpp"

namespace {

using namespace wlanprobe;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::uint64_t seed = 1;
  bool verbose = false;
};

struct ScheduleFlags {
  int trains = 100;
  int train_len = 50;
  std::string profile = "standard";
  double gap_s = 1.0;

  ProbeProfile probe_profile() const {
    return profile == "ht" ? ProbeProfile::HiddenTerminal : ProbeProfile::Standard;
  }

  ProbeSchedule schedule(std::uint64_t seed) const {
    ProbeSchedule s = ProbeSchedule::for_profile(probe_profile());
    s.n_trains = trains;
    s.packets_per_train = train_len;
    s.inter_train_gap_s = gap_s;
    s.rng_seed = seed;
    return s;
  }
};

void add_schedule_flags(CLI::App* cmd, ScheduleFlags& f, bool with_gap) {
  cmd->add_option("--trains", f.trains, "Number of probing trains")->check(CLI::Range(1, 100000))->capture_default_str();
  cmd->add_option("--train-len", f.train_len, "Packets per train")->check(CLI::Range(2, 10000))->capture_default_str();
  cmd->add_option("--profile", f.profile, "Probe sizes: standard (7 sizes) or ht (1472-byte probes)")
      ->check(CLI::IsMember({"standard", "ht"}))
      ->capture_default_str();
  if (with_gap)
    cmd->add_option("--gap-s", f.gap_s, "Idle time between trains, seconds")
        ->check(CLI::Range(0.0, 60.0))
        ->capture_default_str();
}

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

// "fixed:54", "sticky:6,9,18,24", "sampler:36,0.05"
sim::RateAdapterConfig parse_adapter(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> values;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        values.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--adapter", "'" + item + "' is not a number");
      }
    }
  }
  if (kind == "fixed" && values.size() == 1) return sim::RateAdapterConfig::fixed(values[0]);
  if (kind == "sticky" && !values.empty()) return sim::RateAdapterConfig::sticky(values);
  if (kind == "sampler" && values.size() == 2) return sim::RateAdapterConfig::sampler(values[0], values[1]);
  throw CLI::ValidationError("--adapter", "expected fixed:R, sticky:R1,R2,... or sampler:BASE,P_PROBE");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

template <typename Fn>
void write_stream(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  fn(out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string format_number(std::optional<double> v, const char* fmt) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

int run_send(const Globals& g, const ScheduleFlags& f, const std::string& dest) {
  const Endpoint ep = Endpoint::parse(dest.empty() ? "127.0.0.1:" + std::to_string(kDefaultProbePort) : dest);
  const ProbeSchedule schedule = f.schedule(g.seed);
  log(g, "sending " + std::to_string(schedule.n_trains) + " trains of " + std::to_string(schedule.packets_per_train) +
             " to " + ep.to_string());
  const SendLog sent = run_sender(schedule, ep);
  std::cout << "sent " << sent.entries.size() << " probes to " << ep.to_string() << '\n';
  return 0;
}

int run_recv(const Globals& g, const ScheduleFlags& f, const std::string& listen, const std::string& out,
             double timeout_s) {
  const Endpoint ep = Endpoint::parse(listen);
  const ProbeSchedule schedule = f.schedule(g.seed);
  log(g, "listening on " + ep.to_string());
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  const ReceiverRun run = run_receiver(ep, schedule, timeout);
  save_trace(run.trace, out);
  std::cout << "received " << run.trace.record_count() - run.trace.loss_count() << " of " << run.trace.record_count()
            << " probes (" << run.trace.loss_count() << " lost)" << (run.timed_out ? ", stopped on idle timeout" : "")
            << "; trace written to " << out << '\n';
  return 0;
}

int run_simulate(const Globals& g, const ScheduleFlags& f, const std::string& scenario_name,
                 const std::string& intensity_name, const std::string& adapter, const std::string& out,
                 const std::string& truth_path) {
  const auto kind = sim::scenario_from_string(scenario_name);
  const auto intensity = sim::intensity_from_string(intensity_name);
  sim::Scenario scenario = sim::scenario_preset(*kind, *intensity, g.seed);
  if (!adapter.empty()) scenario.adapter = parse_adapter(adapter);
  const auto result = sim::simulate(f.schedule(g.seed), scenario);
  save_trace(result.trace, out);
  if (!truth_path.empty()) sim::save_truth(result.truth, truth_path);
  std::cout << "simulated " << scenario_name << '/' << intensity_name << ": " << result.trace.record_count()
            << " probes, " << result.trace.loss_count() << " lost; trace written to " << out << '\n';
  return 0;
}

struct DiagnoseFlags {
  std::string in;
  std::string out;
  double alpha = 0.01;
  double ratio_threshold = 4.0;
  std::string profile = "standard";
  std::string rates_report;
  std::string delays_report;
  std::string truth;
};

int run_diagnose(const Globals& g, const DiagnoseFlags& f) {
  const Trace trace = load_trace(std::filesystem::path(f.in));
  const auto issues = validate_trace(trace, trace.schedule.packets_per_train);
  for (const auto& issue : issues.issues) log(g, "trace: " + issue.message);

  DiagnoseConfig config;
  config.alpha = f.alpha;
  config.ratio_threshold = f.ratio_threshold;
  config.profile = f.profile == "ht" ? ProbeProfile::HiddenTerminal : ProbeProfile::Standard;
  const DiagnosisRun run = diagnose_detailed(trace, config);
  const Diagnosis& dx = run.diagnosis;

  std::optional<std::string> label;
  if (!f.truth.empty()) label = sim::load_truth_label(f.truth);
  if (!f.out.empty()) write_file(f.out, diagnosis_to_json(dx, label) + "\n");
  if (!f.rates_report.empty()) write_stream(f.rates_report, [&](std::ostream& o) { write_rates_report(run.rates, o); });
  if (!f.delays_report.empty())
    write_stream(f.delays_report, [&](std::ostream& o) { write_delays_report(run.delays, o); });

  std::cout << "verdict: " << to_string(dx.verdict);
  if (dx.trend) std::cout << "  kendall p=" << format_number(dx.trend->p_value, "%.4g");
  if (dx.ratio) std::cout << "  ratio=" << format_number(dx.ratio->ratio, "%.3g");
  std::cout << "  trains " << dx.trains_used << '/' << dx.trains_total;
  if (!dx.reason.empty()) std::cout << "  (" << dx.reason << ')';
  std::cout << '\n';
  return 0;
}

int run_report(const std::vector<std::string>& files, bool markdown) {
  std::vector<ReportEntry> entries;
  for (const auto& path : files) {
    try {
      entries.push_back(parse_report(read_file(path)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedReport) throw;
      std::cerr << "warning: skipping " << path << ": " << e.what() << '\n';
    }
  }
  std::cout << render_matrix(build_matrix(entries), markdown);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WLAN pathology diagnosis from user-level probing"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed for schedules and simulation")->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Progress details on standard error");

  ScheduleFlags send_flags, recv_flags, sim_flags;

  auto* probe = app.add_subcommand("probe", "Send or receive probing trains over UDP");
  probe->require_subcommand(1);
  auto* send = probe->add_subcommand("send", "Emit the probing schedule towards a receiver");
  std::string dest;
  send->add_option("--dest", dest, "Receiver address host:port")->default_str("127.0.0.1:9802");
  add_schedule_flags(send, send_flags, true);

  auto* recv = probe->add_subcommand("recv", "Collect probes and write the trace");
  std::string listen = ":" + std::to_string(kDefaultProbePort);
  std::string recv_out;
  double timeout_s = 30.0;
  recv->add_option("--listen", listen, "Local address [host]:port")->capture_default_str();
  recv->add_option("--out", recv_out, "Trace file (JSON Lines)")->required();
  recv->add_option("--timeout-s", timeout_s, "Stop after this long without a datagram")
      ->check(CLI::Range(0.1, 3600.0))
      ->capture_default_str();
  add_schedule_flags(recv, recv_flags, false);

  auto* simulate = app.add_subcommand("simulate", "Run the 802.11 DCF simulator on a scenario preset");
  std::string scenario, intensity = "severe", adapter, sim_out, truth_out;
  simulate->add_option("--scenario", scenario, "Pathology preset")
      ->required()
      ->check(CLI::IsMember({"normal", "low-snr", "congestion", "sht"}));
  simulate->add_option("--intensity", intensity, "Preset intensity")
      ->check(CLI::IsMember({"mild", "severe"}))
      ->capture_default_str();
  simulate->add_option("--adapter", adapter, "Override rate adaptation: fixed:R | sticky:R1,R2,... | sampler:BASE,P");
  simulate->add_option("--out", sim_out, "Trace file (JSON Lines)")->required();
  simulate->add_option("--truth", truth_out, "Ground-truth file (JSON Lines)");
  add_schedule_flags(simulate, sim_flags, true);

  auto* diagnose_cmd = app.add_subcommand("diagnose", "Diagnose a trace: congestion, low SNR or hidden terminals");
  DiagnoseFlags df;
  diagnose_cmd->add_option("--in", df.in, "Trace file (JSON Lines)")->required();
  diagnose_cmd->add_option("--out", df.out, "Report file (JSON)");
  diagnose_cmd->add_option("--alpha", df.alpha, "Kendall test significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  diagnose_cmd->add_option("--ratio-threshold", df.ratio_threshold, "p_c/p_u above this means low SNR")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  diagnose_cmd->add_option("--profile", df.profile, "standard runs every stage; ht skips the size-trend stage")
      ->check(CLI::IsMember({"standard", "ht"}))
      ->capture_default_str();
  diagnose_cmd->add_option("--rates-report", df.rates_report, "Per-train rate inference (JSON Lines)");
  diagnose_cmd->add_option("--delays-report", df.delays_report, "Per-packet access delays (JSON Lines)");
  diagnose_cmd->add_option("--truth", df.truth, "Ground-truth file whose scenario labels the report");

  auto* report = app.add_subcommand("report", "Summarize report.json files as a verdict matrix");
  std::vector<std::string> report_files;
  bool markdown = false;
  report->add_option("reports", report_files, "report.json files")->required();
  report->add_flag("--markdown", markdown, "Markdown table instead of plain text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*send) return run_send(g, send_flags, dest);
    if (*recv) return run_recv(g, recv_flags, listen, recv_out, timeout_s);
    if (*simulate) return run_simulate(g, sim_flags, scenario, intensity, adapter, sim_out, truth_out);
    if (*diagnose_cmd) return run_diagnose(g, df);
    if (*report) return run_report(report_files, markdown);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
