#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace txtopo {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Date = std::chrono::sys_days;

inline constexpr std::chrono::milliseconds kWeek = std::chrono::days{7};

/// Parses an RFC 3339 instant such as `2020-01-06T00:00:00Z` or
/// `2020-01-06T09:30:00.250+09:00`. Throws ParseError.
Timestamp parse_rfc3339(std::string_view text);

/// UTC rendering with a `Z` suffix; milliseconds are printed only when non-zero.
std::string format_rfc3339(Timestamp ts);

/// `YYYY-MM-DD`. Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Monday 00:00 UTC at or before `ts`.
Timestamp monday_on_or_before(Timestamp ts);

}  // namespace txtopo
