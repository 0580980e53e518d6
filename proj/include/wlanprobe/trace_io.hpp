#pragma once

#include <filesystem>
#include <iosfwd>

#include "wlanprobe/trace.hpp"

namespace wlanprobe {

inline constexpr int kTraceSchemaVersion = 1;

// JSON Lines: one header line {version, trains, packets_per_train}, then one
// line per record {train, seq, size_ip, tiny, send_us, recv_us|null}.
void save_trace(const Trace& trace, std::ostream& out);
Trace load_trace(std::istream& in);

void save_trace(const Trace& trace, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path);

}  // namespace wlanprobe
