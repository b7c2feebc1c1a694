#pragma once

#include <cstdint>
#include <string>

namespace hicast {

// Calendar date stored as days since 1970-01-01. Daily panels index time as
// plain offsets from a start date, so the arithmetic stays integer-only.
struct Date {
  std::int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
  Date operator+(int n) const { return Date{days + n}; }
  int operator-(Date other) const { return days - other.days; }
};

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

Date date_from_civil(int year, int month, int day);
CivilDate civil_from_date(Date d);

// Parses "YYYY-MM-DD"; throws Error(data) on malformed input.
Date parse_date(const std::string& s);
std::string format_date(Date d);

// 0 = Monday .. 6 = Sunday.
int day_of_week(Date d);
int day_of_month(Date d);
int month_of_year(Date d);
// ISO-8601 week number (1..53).
int week_of_year(Date d);

}  // namespace hicast
