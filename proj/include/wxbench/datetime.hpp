#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace wxbench {

// Timestamps are seconds since the civil epoch 1970-01-01T00:00:00 with no
// timezone handling: whatever local time the CSV carries is taken at face
// value. Hour resolution is all the pipeline needs, but parsing keeps
// minutes/seconds so that ordering is exact.
using Timestamp = std::int64_t;

constexpr std::int64_t kSecondsPerHour = 3600;

// Accepts "YYYY-MM-DD HH:MM[:SS]" and "YYYY-MM-DDTHH:MM[:SS]"; a bare
// "YYYY-MM-DD" is taken as midnight. Returns nullopt on malformed input.
std::optional<Timestamp> parse_datetime(const std::string& text);

// ISO-8601 "YYYY-MM-DDTHH:MM:SS"
std::string format_datetime(Timestamp t);

}  // namespace wxbench
