#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alise {

/// Proleptic Gregorian calendar date.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;
};

/// Days since 1970-01-01 (can be negative). Exact and leap-year aware.
int64_t days_from_civil(const Date& d);
Date civil_from_days(int64_t days);

Date parse_iso_date(const std::string& s);   // "YYYY-MM-DD"
std::string format_iso_date(const Date& d);

bool is_valid_date(const Date& d);
int day_of_year(const Date& d);  // 1..366

/// Reference date for temporal encodings: 2014-03-03.
extern const Date kReferenceDate;

/// Day offsets of each acquisition from the reference date. Rejects dates
/// before the reference and non-increasing sequences.
std::vector<int64_t> delta_t(const std::vector<Date>& dates);

}  // namespace alise
