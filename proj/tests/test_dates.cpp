#include <doctest.h>

#include "macs/dates.hpp"
#include "macs/error.hpp"

using namespace macs;

TEST_CASE("iso round trip") {
  for (const char* s : {"2011-01-01", "2018-02-01", "2000-02-29", "1999-12-31"}) {
    CHECK(format_iso_date(parse_iso_date(s)) == s);
  }
}

TEST_CASE("civil conversion matches known day counts") {
  CHECK(make_date(1970, 1, 1).days == 0);
  CHECK(make_date(1970, 1, 2).days == 1);
  CHECK(make_date(1969, 12, 31).days == -1);
  CHECK(make_date(2000, 3, 1).days - make_date(2000, 2, 28).days == 2);
  CHECK(make_date(2001, 3, 1).days - make_date(2001, 2, 28).days == 1);
}

TEST_CASE("days_between is oriented") {
  Date a = make_date(2011, 1, 1);
  Date b = make_date(2011, 1, 31);
  CHECK(days_between(a, b) == 30);
  CHECK(days_between(b, a) == -30);
  CHECK(days_between(a, a) == 0);
}

TEST_CASE("ordering") {
  CHECK(make_date(2011, 1, 1) < make_date(2011, 1, 2));
  CHECK(make_date(2010, 12, 31) < make_date(2011, 1, 1));
  CHECK(make_date(2011, 1, 1) == make_date(2011, 1, 1));
}

TEST_CASE("age in whole years") {
  Date birth = make_date(1960, 6, 15);
  CHECK(age_in_years(birth, make_date(2010, 6, 14)) == 49);
  CHECK(age_in_years(birth, make_date(2010, 6, 15)) == 50);
  CHECK(age_in_years(birth, make_date(2010, 6, 16)) == 50);
}

TEST_CASE("add_days") {
  CHECK(add_days(make_date(2010, 12, 31), 1) == make_date(2011, 1, 1));
  CHECK(add_days(make_date(2012, 2, 28), 1) == make_date(2012, 2, 29));
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_iso_date("2011/01/01"), DataError);
  CHECK_THROWS_AS(parse_iso_date("2011-13-01"), DataError);
  CHECK_THROWS_AS(parse_iso_date("2011-02-30"), DataError);
  CHECK_THROWS_AS(parse_iso_date("not a date"), DataError);
}

TEST_CASE("year_of") {
  CHECK(year_of(make_date(2014, 7, 9)) == 2014);
  CHECK(year_of(make_date(2011, 1, 1)) == 2011);
}
