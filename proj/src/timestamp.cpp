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

#include "timeaudit/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace timeaudit {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Civil {
  int year;
  unsigned month;
  unsigned day;
  int hour;
  int minute;
  int second;
};

Civil to_civil(std::int64_t epoch) {
  using namespace std::chrono;
  const std::int64_t days_since = floor_div(epoch, kSecondsPerDay);
  const std::int64_t rem = epoch - days_since * kSecondsPerDay;
  const year_month_day ymd{sys_days{days{days_since}}};
  return Civil{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
               static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
               static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60)};
}

// Minimal cursor over the text being parsed.
class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  void advance(std::size_t n = 1) { pos_ += n; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void skip_spaces() {
    while (!done() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  std::string_view rest() const { return s_.substr(pos_); }

  // Reads exactly `width` digits.
  std::optional<int> digits(std::size_t width) {
    if (pos_ + width > s_.size()) return std::nullopt;
    int value = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + width, value);
    if (ec != std::errc{} || p != s_.data() + pos_ + width) return std::nullopt;
    pos_ += width;
    return value;
  }

  // Reads a signed year of at least four digits.
  std::optional<int> year() {
    std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    std::size_t digits_start = pos_;
    while (!done() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ - digits_start < 4) return std::nullopt;
    int value = 0;
    const char* first = s_.data() + start + (s_[start] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(first, s_.data() + pos_, value);
    if (ec != std::errc{} || p != s_.data() + pos_) return std::nullopt;
    return value;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::int64_t unit_factor(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return 1;
    case TimeUnit::milliseconds: return 1000;
    case TimeUnit::microseconds: return 1000000;
  }
  return 1;
}

Timestamp normalize_timestamp(std::int64_t raw, TimeUnit unit, std::int32_t tz_offset_minutes) {
  return Timestamp{floor_div(raw, unit_factor(unit)), tz_offset_minutes};
}

std::string format_utc(Timestamp ts) {
  const Civil c = to_civil(ts.epoch_seconds);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d UTC", c.year, c.month, c.day,
                c.hour, c.minute, c.second);
  return buf;
}

std::string format_iso8601(Timestamp ts) {
  const Civil c = to_civil(ts.epoch_seconds);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", c.year, c.month, c.day,
                c.hour, c.minute, c.second);
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  Scanner in(text);
  in.skip_spaces();
  auto y = in.year();
  if (!y || !in.eat('-')) return std::nullopt;
  auto mo = in.digits(2);
  if (!mo || !in.eat('-')) return std::nullopt;
  auto d = in.digits(2);
  if (!d) return std::nullopt;

  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  int hh = 0, mm = 0, ss = 0;
  const bool space_then_digit = in.peek() == ' ' && in.peek(1) >= '0' && in.peek(1) <= '9';
  if (in.eat('T') || in.eat('t') || (space_then_digit && in.eat(' '))) {
    auto h = in.digits(2);
    if (!h || !in.eat(':')) return std::nullopt;
    auto m = in.digits(2);
    if (!m) return std::nullopt;
    hh = *h;
    mm = *m;
    if (in.eat(':')) {
      auto s = in.digits(2);
      if (!s) return std::nullopt;
      ss = *s;
      if (in.eat('.') || in.eat(',')) {
        while (in.peek() >= '0' && in.peek() <= '9') in.advance();
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }

  in.skip_spaces();
  std::int32_t offset = 0;
  if (in.eat('Z') || in.eat('z')) {
  } else if (in.rest().substr(0, 3) == "UTC" || in.rest().substr(0, 3) == "GMT") {
    in.advance(3);
  } else if (in.peek() == '+' || in.peek() == '-') {
    const int sign = in.peek() == '-' ? -1 : 1;
    in.advance();
    auto oh = in.digits(2);
    if (!oh) return std::nullopt;
    in.eat(':');
    auto om = in.digits(2);
    if (!om) return std::nullopt;
    offset = sign * (*oh * 60 + *om);
    if (!valid_tz_offset(offset)) return std::nullopt;
  }
  in.skip_spaces();
  if (!in.done()) return std::nullopt;

  const std::int64_t days_since = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t local = days_since * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
  return Timestamp{local - static_cast<std::int64_t>(offset) * 60, offset};
}

std::optional<TimeUnit> parse_time_unit(std::string_view text) {
  if (text == "s") return TimeUnit::seconds;
  if (text == "ms") return TimeUnit::milliseconds;
  if (text == "us") return TimeUnit::microseconds;
  return std::nullopt;
}

std::string_view to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return "s";
    case TimeUnit::milliseconds: return "ms";
    case TimeUnit::microseconds: return "us";
  }
  return "s";
}

std::optional<std::int32_t> parse_git_tz(std::string_view text) {
  if (text.size() != 5 || (text[0] != '+' && text[0] != '-')) return std::nullopt;
  int hh = 0, mm = 0;
  if (std::from_chars(text.data() + 1, text.data() + 3, hh).ptr != text.data() + 3) return std::nullopt;
  if (std::from_chars(text.data() + 3, text.data() + 5, mm).ptr != text.data() + 5) return std::nullopt;
  const std::int32_t minutes = (text[0] == '-' ? -1 : 1) * (hh * 60 + mm);
  if (!valid_tz_offset(minutes)) return std::nullopt;
  return minutes;
}

}  // namespace timeaudit
