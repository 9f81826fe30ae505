#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace saz {

using UtcTime = std::chrono::sys_seconds;
using Clock = std::function<UtcTime()>;

UtcTime system_now();
inline Clock system_clock() { return &system_now; }

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_rfc3339(UtcTime t);
/// Accepts exactly the form produced by format_rfc3339.
std::optional<UtcTime> parse_rfc3339(std::string_view text);

/// 0 = Monday ... 6 = Sunday.
int utc_weekday(UtcTime t);
int utc_minute_of_day(UtcTime t);

UtcTime make_utc(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                 int second = 0);

}  // namespace saz
