#include "wlanprobe/trace_io.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "wlanprobe/error.hpp"

namespace wlanprobe {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::MalformedTrace, "trace line " + std::to_string(line) + ": " + why);
}

template <typename T>
T field(const ordered_json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) malformed(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    malformed(line, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

void save_trace(const Trace& trace, std::ostream& out) {
  ordered_json header;
  header["version"] = kTraceSchemaVersion;
  header["trains"] = trace.schedule.n_trains;
  header["packets_per_train"] = trace.schedule.packets_per_train;
  out << header.dump() << '\n';

  for (const auto& train : trace.trains) {
    for (const auto& r : train.records) {
      ordered_json j;
      j["train"] = r.train_id;
      j["seq"] = r.seq;
      j["size_ip"] = r.size_ip;
      j["tiny"] = r.is_tiny;
      j["send_us"] = r.send_ts;
      if (r.recv_ts)
        j["recv_us"] = *r.recv_ts;
      else
        j["recv_us"] = nullptr;
      out << j.dump() << '\n';
    }
  }
}

Trace load_trace(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  Trace trace;
  bool have_header = false;

  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;

    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) malformed(line_no, "expected a JSON object");

    if (!have_header) {
      const int version = field<int>(j, "version", line_no);
      if (version != kTraceSchemaVersion) {
        throw Error(ErrorCode::SchemaVersionMismatch,
                    "trace schema version " + std::to_string(version) + ", expected " +
                        std::to_string(kTraceSchemaVersion));
      }
      trace.schedule.n_trains = field<int>(j, "trains", line_no);
      trace.schedule.packets_per_train = field<int>(j, "packets_per_train", line_no);
      if (trace.schedule.n_trains < 0 || trace.schedule.packets_per_train < 0)
        malformed(line_no, "negative header counts");
      trace.trains.resize(static_cast<std::size_t>(trace.schedule.n_trains));
      for (int t = 0; t < trace.schedule.n_trains; ++t) trace.trains[t].train_id = t;
      have_header = true;
      continue;
    }

    ProbeRecord r;
    r.train_id = field<int>(j, "train", line_no);
    r.seq = field<int>(j, "seq", line_no);
    r.size_ip = field<int>(j, "size_ip", line_no);
    r.is_tiny = field<bool>(j, "tiny", line_no);
    r.send_ts = field<Micros>(j, "send_us", line_no);
    auto recv = j.find("recv_us");
    if (recv == j.end()) malformed(line_no, "missing field 'recv_us'");
    if (!recv->is_null()) {
      if (!recv->is_number_integer()) malformed(line_no, "field 'recv_us' has the wrong type");
      r.recv_ts = recv->get<Micros>();
    }
    if (r.train_id < 0 || r.train_id >= trace.schedule.n_trains)
      malformed(line_no, "train " + std::to_string(r.train_id) + " outside header range");
    trace.trains[static_cast<std::size_t>(r.train_id)].records.push_back(r);
  }
  if (!have_header) malformed(line_no + 1, "missing header line");
  return trace;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save_trace(trace, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "file not found: " + path.string());
  return load_trace(in);
}

}  // namespace wlanprobe
