#include "macs/dates.hpp"

#include <cstdio>

#include "macs/error.hpp"

namespace macs {

std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}

Date make_date(int y, unsigned m, unsigned d) {
  return Date{days_from_civil(y, m, d)};
}

Date parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw DataError("malformed ISO date: \"" + s + "\"");
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9')
      throw DataError("malformed ISO date: \"" + s + "\"");
  int y = std::stoi(s.substr(0, 4));
  unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw DataError("out-of-range ISO date: \"" + s + "\"");
  Date dt = make_date(y, m, d);
  int y2;
  unsigned m2, d2;
  civil_from_days(dt.days, y2, m2, d2);
  if (y2 != y || m2 != m || d2 != d)
    throw DataError("invalid calendar date: \"" + s + "\"");
  return dt;
}

std::string format_iso_date(Date dt) {
  int y;
  unsigned m, d;
  civil_from_days(dt.days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

int year_of(Date dt) {
  int y;
  unsigned m, d;
  civil_from_days(dt.days, y, m, d);
  return y;
}

int age_in_years(Date birth, Date at) {
  int by, ay;
  unsigned bm, bd, am, ad;
  civil_from_days(birth.days, by, bm, bd);
  civil_from_days(at.days, ay, am, ad);
  int age = ay - by;
  if (am < bm || (am == bm && ad < bd)) --age;
  return age;
}

}  // namespace macs
