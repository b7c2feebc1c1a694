#include "dates.hpp"

#include <cstdio>

#include "common.hpp"

namespace hicast {

// Days-from-civil / civil-from-days use the standard proleptic Gregorian
// shift-by-era construction; exact for the full int32 range.
Date date_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return Date{static_cast<std::int32_t>(era * 146097 + static_cast<int>(doe) - 719468)};
}

CivilDate civil_from_date(Date date) {
  std::int64_t z = date.days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

Date parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 ||
      m < 1 || m > 12 || d < 1 || d > 31) {
    fail(ErrorCode::data, "malformed date '" + s + "' (expected YYYY-MM-DD)");
  }
  return date_from_civil(y, m, d);
}

std::string format_date(Date d) {
  CivilDate c = civil_from_date(d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

int day_of_week(Date d) {
  // 1970-01-01 was a Thursday.
  std::int32_t v = (d.days + 3) % 7;
  return v < 0 ? v + 7 : v;
}

int day_of_month(Date d) { return civil_from_date(d).day; }

int month_of_year(Date d) { return civil_from_date(d).month; }

int week_of_year(Date d) {
  // ISO week: week 1 contains the first Thursday of the year.
  Date thursday = d + (3 - day_of_week(d));
  int year = civil_from_date(thursday).year;
  Date jan1 = date_from_civil(year, 1, 1);
  return (thursday - jan1) / 7 + 1;
}

}  // namespace hicast
