#include "hedge/types.hpp"

#include <charconv>
#include <cstdio>

namespace hedge {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = first + len;
  for (const char* p = first; p != last; ++p) {
    if (*p < '0' || *p > '9') return false;
  }
  return std::from_chars(first, last, out).ec == std::errc{};
}

std::optional<Date> ymd(int y, int m, int d) {
  const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                         std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return Date{date};
}

}  // namespace

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::load: return "load";
    case DataType::pv: return "pv";
    case DataType::ev: return "ev";
  }
  return "?";
}

std::string_view to_string(DayType type) {
  return type == DayType::weekday ? "weekday" : "weekend";
}

DataType parse_data_type(std::string_view text) {
  if (text == "load") return DataType::load;
  if (text == "pv") return DataType::pv;
  if (text == "ev") return DataType::ev;
  throw InvalidArgument("data_type", "unknown data type '" + std::string(text) + "'");
}

DayType parse_day_type(std::string_view text) {
  if (text == "weekday") return DayType::weekday;
  if (text == "weekend") return DayType::weekend;
  throw InvalidArgument("day_type", "unknown day type '" + std::string(text) + "'");
}

DayType day_type_of(Date date) {
  const std::chrono::weekday wd{date};
  return (wd == std::chrono::Saturday || wd == std::chrono::Sunday) ? DayType::weekend : DayType::weekday;
}

unsigned month_of(Date date) {
  return static_cast<unsigned>(std::chrono::year_month_day{date}.month());
}

int steps_per_day(int resolution_minutes) {
  if (resolution_minutes <= 0 || 1440 % resolution_minutes != 0) {
    throw InvalidArgument("resolution_minutes", "must be a positive divisor of 1440, got " +
                                                    std::to_string(resolution_minutes));
  }
  return 1440 / resolution_minutes;
}

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d)) return std::nullopt;
  return ymd(y, m, d);
}

std::optional<Instant> parse_instant(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  const auto date = parse_date(text.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  if (!date || !read_int(text, 11, 2, hh) || !read_int(text, 14, 2, mm) || !read_int(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return Instant{*date} + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_instant(Instant t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(Date{day}) + buf;
}

}  // namespace hedge
