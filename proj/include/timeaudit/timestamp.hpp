// Copyright 2026 The timeaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace timeaudit {

/// Resolution of an integer timestamp as delivered by an export.
enum class TimeUnit { seconds, milliseconds, microseconds };

/// A commit instant in whole seconds since the Unix epoch (UTC).
///
/// The recorded zone offset is informational only: `epoch_seconds` is the
/// comparison key everywhere, and ordering operators ignore the offset.
struct Timestamp {
  std::int64_t epoch_seconds = 0;
  std::int32_t tz_offset_minutes = 0;

  friend constexpr bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.epoch_seconds == b.epoch_seconds;
  }
  friend constexpr auto operator<=>(const Timestamp& a, const Timestamp& b) {
    return a.epoch_seconds <=> b.epoch_seconds;
  }
};

inline constexpr std::int32_t kMaxTzOffsetMinutes = 18 * 60;

constexpr bool valid_tz_offset(std::int64_t minutes) {
  return minutes >= -kMaxTzOffsetMinutes && minutes <= kMaxTzOffsetMinutes;
}

/// Seconds per unit step (1, 10^3, 10^6).
std::int64_t unit_factor(TimeUnit unit);

/// Floor-divides `raw` by the unit factor; negative values round toward
/// negative infinity so pre-epoch instants keep their calendar second.
Timestamp normalize_timestamp(std::int64_t raw, TimeUnit unit,
                              std::int32_t tz_offset_minutes = 0);

/// "YYYY-MM-DD HH:MM:SS UTC", proleptic Gregorian, any sign of epoch.
std::string format_utc(Timestamp ts);

/// "YYYY-MM-DDTHH:MM:SSZ"; used in machine-readable output.
std::string format_iso8601(Timestamp ts);

/// Accepts the output of format_utc / format_iso8601 plus the common
/// ISO-8601 variants: a bare date, fractional seconds (dropped), and a
/// trailing "Z", "UTC" or numeric offset ("+02:00", "-0530").
/// The offset is applied to epoch_seconds and kept in tz_offset_minutes.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::optional<TimeUnit> parse_time_unit(std::string_view text);
std::string_view to_string(TimeUnit unit);

/// Git's "+HHMM" zone notation, as printed by `%cz`.
std::optional<std::int32_t> parse_git_tz(std::string_view text);

}  // namespace timeaudit
