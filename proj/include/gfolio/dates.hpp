#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace gfolio {

// Calendar date, compared lexicographically. Parsing enforces YYYY-MM-DD and
// a real calendar day (leap years included).
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  static Date parse(std::string_view text);
  std::string str() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

bool is_valid_date(int year, int month, int day);

}  // namespace gfolio
