#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace siamaug {

namespace detail {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

inline bool read_digits(std::string_view s, std::size_t& i, int count, int& out) {
  int v = 0;
  for (int k = 0; k < count; ++k) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
    ++i;
  }
  out = v;
  return true;
}

}  // namespace detail

// Parses "YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH[:MM]|-HH[:MM]]" to UTC epoch
// milliseconds. A bare date is accepted as midnight UTC. Returns nullopt on
// malformed input.
inline std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
  // trim surrounding whitespace
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;

  std::size_t i = 0;
  int year = 0, month = 0, day = 0;
  if (!detail::read_digits(s, i, 4, year)) return std::nullopt;
  if (i >= s.size() || s[i] != '-') return std::nullopt;
  ++i;
  if (!detail::read_digits(s, i, 2, month)) return std::nullopt;
  if (i >= s.size() || s[i] != '-') return std::nullopt;
  ++i;
  if (!detail::read_digits(s, i, 2, day)) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;

  int hour = 0, minute = 0, second = 0, millis = 0;
  std::int64_t offset_min = 0;
  if (i < s.size()) {
    if (s[i] != 'T' && s[i] != ' ') return std::nullopt;
    ++i;
    if (!detail::read_digits(s, i, 2, hour)) return std::nullopt;
    if (i >= s.size() || s[i] != ':') return std::nullopt;
    ++i;
    if (!detail::read_digits(s, i, 2, minute)) return std::nullopt;
    if (i >= s.size() || s[i] != ':') return std::nullopt;
    ++i;
    if (!detail::read_digits(s, i, 2, second)) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

    if (i < s.size() && s[i] == '.') {
      ++i;
      int scale = 100;
      bool any = false;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        if (scale > 0) millis += (s[i] - '0') * scale;
        scale /= 10;
        any = true;
        ++i;
      }
      if (!any) return std::nullopt;
    }
    if (i < s.size()) {
      const char c = s[i];
      if (c == 'Z') {
        ++i;
      } else if (c == '+' || c == '-') {
        ++i;
        int oh = 0, om = 0;
        if (!detail::read_digits(s, i, 2, oh)) return std::nullopt;
        if (i < s.size() && s[i] == ':') ++i;
        if (i < s.size()) {
          if (!detail::read_digits(s, i, 2, om)) return std::nullopt;
        }
        offset_min = oh * 60 + om;
        if (c == '-') offset_min = -offset_min;
      }
    }
    if (i != s.size()) return std::nullopt;
  }

  const std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(month),
                                                    static_cast<unsigned>(day));
  std::int64_t ms = days * 86400000LL + hour * 3600000LL + minute * 60000LL +
                    second * 1000LL + millis;
  ms -= offset_min * 60000LL;
  return ms;
}

// UTC epoch milliseconds to "YYYY-MM-DDTHH:MM:SS.mmmZ".
inline std::string format_iso8601_ms(std::int64_t ms) {
  std::int64_t days = ms / 86400000LL;
  std::int64_t rem = ms % 86400000LL;
  if (rem < 0) {
    rem += 86400000LL;
    days -= 1;
  }
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  const int hour = static_cast<int>(rem / 3600000LL);
  const int minute = static_cast<int>((rem / 60000LL) % 60);
  const int second = static_cast<int>((rem / 1000LL) % 60);
  const int milli = static_cast<int>(rem % 1000LL);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<long long>(y), m, d, hour, minute, second, milli);
  return std::string(buf);
}

}  // namespace siamaug
