#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace actgraph {

// UTC instant with millisecond resolution. Audit logs carry whole seconds,
// the simulator emits sub-second bursts.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Parses ISO-8601 date-times: "2023-05-01T12:00:00Z", optional fractional
// seconds (truncated to ms), "Z" or "+hh:mm"/"-hh:mm" offsets. A missing zone
// designator is read as UTC. Returns nullopt on anything else.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" only when the milliseconds are non-zero.
std::string format_iso8601(Timestamp ts);

// Half-open [from, to).
struct TimeWindow {
  Timestamp from;
  Timestamp to;

  bool contains(Timestamp ts) const { return from <= ts && ts < to; }
  bool valid() const { return from <= to; }
  std::chrono::milliseconds length() const { return to - from; }

  static TimeWindow everything();
};

}  // namespace actgraph
