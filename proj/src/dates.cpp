#include "alise/dates.hpp"

#include <cstdio>

#include "alise/check.hpp"

namespace alise {

const Date kReferenceDate = {2014, 3, 3};

namespace {
bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int lens[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lens[m - 1];
}
}  // namespace

bool is_valid_date(const Date& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

// Howard Hinnant's civil-days algorithm.
int64_t days_from_civil(const Date& d) {
  ALISE_CHECK(is_valid_date(d), "invalid date " << format_iso_date(d));
  int y = d.year;
  const int m = d.month, dd = d.day;
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(dd) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

Date civil_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date parse_iso_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  ALISE_CHECK(std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) == 3, "bad ISO date '" << s << "'");
  Date date{y, m, d};
  ALISE_CHECK(is_valid_date(date), "bad ISO date '" << s << "'");
  return date;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

int day_of_year(const Date& d) {
  return static_cast<int>(days_from_civil(d) - days_from_civil({d.year, 1, 1})) + 1;
}

std::vector<int64_t> delta_t(const std::vector<Date>& dates) {
  const int64_t ref = days_from_civil(kReferenceDate);
  std::vector<int64_t> out;
  out.reserve(dates.size());
  for (const Date& d : dates) {
    const int64_t off = days_from_civil(d) - ref;
    ALISE_CHECK(off >= 0, "date " << format_iso_date(d) << " precedes the reference date "
                                  << format_iso_date(kReferenceDate));
    ALISE_CHECK(out.empty() || off > out.back(), "dates must be strictly increasing");
    out.push_back(off);
  }
  return out;
}

}  // namespace alise
