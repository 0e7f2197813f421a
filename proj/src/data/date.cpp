#include "fingat/data/date.hpp"

#include <chrono>
#include <cstdio>

#include "fingat/errors.hpp"

namespace fingat::data {

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw DomainError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
                                   std::to_string(day));
  return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse(std::string_view text) {
  auto digits = [&](std::size_t from, std::size_t len) {
    int v = 0;
    for (std::size_t i = from; i < from + len; ++i) {
      const char c = text[i];
      if (c < '0' || c > '9') throw DomainError("malformed date '" + std::string(text) + "'");
      v = v * 10 + (c - '0');
    }
    return v;
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DomainError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  return from_ymd(digits(0, 4), static_cast<unsigned>(digits(5, 2)), static_cast<unsigned>(digits(8, 2)));
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days_}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

int Date::weekday() const {
  // 1970-01-01 was a Thursday.
  return ((days_ % 7) + 7 + 3) % 7;
}

Date Date::next_business_day() const {
  Date d(days_ + 1);
  while (d.weekday() >= 5) d = Date(d.days_ + 1);
  return d;
}

}  // namespace fingat::data
