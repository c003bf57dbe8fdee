#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace bibcurate {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
using Clock = std::function<Timestamp()>;

inline Timestamp system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline std::tm to_utc_tm(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  return tm;
}

/// 2021-02-01T00:00:00Z
inline std::string format_utc(Timestamp t) {
  std::tm tm = to_utc_tm(t);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::optional<Timestamp> parse_utc(std::string_view s) {
  int y, mo, d, h, mi, sec;
  char z = 0;
  std::string tmp(s);
  if (std::sscanf(tmp.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &z) != 7 || z != 'Z')
    return std::nullopt;
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  return static_cast<Timestamp>(timegm(&tm));
}

/// YYYY-MM of a timestamp, in UTC.
inline std::string month_stamp(Timestamp t) { return format_utc(t).substr(0, 7); }

inline bool is_month_stamp(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u})
    if (s[i] < '0' || s[i] > '9') return false;
  int m = (s[5] - '0') * 10 + (s[6] - '0');
  return m >= 1 && m <= 12;
}

}  // namespace bibcurate
