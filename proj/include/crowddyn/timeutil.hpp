#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace crowddyn {

// Calendar date as days since 1970-01-01 (can be negative). Cheap value
// type; all arithmetic is plain integer math.
struct Date {
    std::int32_t days = 0;

    auto operator<=>(const Date&) const = default;

    Date operator+(int n) const { return Date{days + n}; }
    Date operator-(int n) const { return Date{days - n}; }
    int operator-(const Date& o) const { return days - o.days; }
};

struct Ymd {
    int year = 1970;
    unsigned month = 1; // 1-12
    unsigned day = 1;   // 1-31
};

Date date_from_ymd(int year, unsigned month, unsigned day);
Ymd ymd_from_date(Date d);

// Monday = 0 ... Sunday = 6.
int weekday_monday0(Date d);
const char* weekday_name(int weekday);

// Accepts YYYY-MM-DD and YYYY/MM/DD.
std::optional<Date> parse_date(const std::string& s);
std::string format_date(Date d); // YYYY-MM-DD

// Unix timestamp, seconds. Accepts epoch seconds ("1441629300") or ISO-8601
// ("2015-09-07T14:35:00", space separator also fine, optional trailing Z,
// fractional seconds truncated). Returns nullopt on anything else.
std::optional<std::int64_t> parse_timestamp(const std::string& s);
std::string format_timestamp(std::int64_t ts); // ISO-8601 UTC with Z

// Splits a UTC timestamp into (local date, minute of local day) under a
// fixed UTC offset in minutes.
struct LocalStamp {
    Date date;
    int minute_of_day = 0; // [0, 1440)
};
LocalStamp to_local(std::int64_t ts_utc, int tz_offset_minutes);

} // namespace crowddyn
