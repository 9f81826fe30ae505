#include "saz/time.hpp"

#include <cctype>
#include <cstdio>

namespace saz {

using namespace std::chrono;

UtcTime system_now() { return floor<seconds>(system_clock::now()); }

std::string format_rfc3339(UtcTime t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                long(hms.minutes().count()), long(hms.seconds().count()));
  return buf;
}

std::optional<UtcTime> parse_rfc3339(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20) return std::nullopt;
  static constexpr std::string_view shape = "dddd-dd-ddTdd:dd:ddZ";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 'd') {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    } else if (text[i] != shape[i]) {
      return std::nullopt;
    }
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (text[i] - '0');
    return v;
  };
  year_month_day ymd{year{num(0, 4)}, month{unsigned(num(5, 2))}, day{unsigned(num(8, 2))}};
  int h = num(11, 2), m = num(14, 2), s = num(17, 2);
  if (!ymd.ok() || h > 23 || m > 59 || s > 59) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{m} + seconds{s};
}

int utc_weekday(UtcTime t) {
  return static_cast<int>(weekday{floor<days>(t)}.iso_encoding()) - 1;
}

int utc_minute_of_day(UtcTime t) {
  return static_cast<int>(duration_cast<minutes>(t - floor<days>(t)).count());
}

UtcTime make_utc(int y, unsigned mo, unsigned d, int h, int mi, int s) {
  return sys_days{year{y} / month{mo} / day{d}} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace saz
