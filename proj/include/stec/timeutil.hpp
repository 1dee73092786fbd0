#pragma once

#include <cstdint>

namespace stec {

inline constexpr double kSecondsPerDay = 86400.0;

// Days from 1970-01-01 to the given civil date (proleptic Gregorian).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

constexpr int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

// Seconds since 2000-01-01T00:00:00.
constexpr double epoch_seconds(int year, int doy, double sod) {
  const std::int64_t days = days_from_civil(year, 1, 1) - days_from_civil(2000, 1, 1) + (doy - 1);
  return static_cast<double>(days) * kSecondsPerDay + sod;
}

struct CalendarEpoch {
  int year;
  int doy;
  double sod;
};

// Advances (year, doy) by whole days, rolling over year boundaries.
constexpr CalendarEpoch add_days(int year, int doy, int days) {
  doy += days;
  while (doy > days_in_year(year)) {
    doy -= days_in_year(year);
    ++year;
  }
  while (doy < 1) {
    --year;
    doy += days_in_year(year);
  }
  return {year, doy, 0.0};
}

}  // namespace stec
