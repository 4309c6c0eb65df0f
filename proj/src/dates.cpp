#include "gfolio/dates.hpp"

#include <array>
#include <cctype>
#include <cstdio>

#include "gfolio/errors.hpp"

namespace gfolio {

namespace {

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

}  // namespace

bool is_valid_date(int year, int month, int day) {
  static constexpr std::array<int, 12> days_in_month = {31, 28, 31, 30, 31, 30,
                                                        31, 31, 30, 31, 30, 31};
  if (year < 1 || month < 1 || month > 12 || day < 1) return false;
  int dim = days_in_month[static_cast<size_t>(month - 1)];
  if (month == 2 && is_leap(year)) dim = 29;
  return day <= dim;
}

Date Date::parse(std::string_view text) {
  auto fail = [&]() -> Date {
    throw data_error("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return fail();
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return fail();
  }
  Date d;
  d.year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
  d.month = (text[5] - '0') * 10 + (text[6] - '0');
  d.day = (text[8] - '0') * 10 + (text[9] - '0');
  if (!is_valid_date(d.year, d.month, d.day)) return fail();
  return d;
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

}  // namespace gfolio
