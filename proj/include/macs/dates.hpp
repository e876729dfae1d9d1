#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace macs {

// Calendar date stored as days since 1970-01-01, proleptic Gregorian.
struct Date {
  std::int32_t days = 0;
  auto operator<=>(const Date&) const = default;
};

// days_from_civil / civil_from_days follow Howard Hinnant's algorithms.
std::int32_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int32_t z, int& y, unsigned& m, unsigned& d);

Date make_date(int y, unsigned m, unsigned d);

// Parses strict "YYYY-MM-DD"; throws DataError on malformed input.
Date parse_iso_date(const std::string& s);
std::string format_iso_date(Date d);

int year_of(Date d);

// Completed years between birth and at (birthday counted on the day itself).
int age_in_years(Date birth, Date at);

inline Date add_days(Date d, std::int32_t n) { return Date{d.days + n}; }

// b - a in days.
inline std::int32_t days_between(Date a, Date b) { return b.days - a.days; }

}  // namespace macs
