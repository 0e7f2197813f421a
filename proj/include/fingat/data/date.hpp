#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace fingat::data {

// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(int days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  // Strict YYYY-MM-DD; throws DomainError otherwise.
  static Date parse(std::string_view text);

  int days() const { return days_; }
  std::string iso() const;
  // 0 = Monday ... 6 = Sunday
  int weekday() const;
  Date next_business_day() const;

  auto operator<=>(const Date&) const = default;

 private:
  int days_ = 0;
};

}  // namespace fingat::data
