#include "crowddyn/timeutil.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace crowddyn {

namespace {

// floor division for timestamps that may predate the epoch
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

// Civil-date conversions via the standard days-from-civil algorithm
// (era/day-of-era form), exact over the full int range we care about.
Date date_from_ymd(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);             // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;   // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;            // [0, 146096]
    return Date{static_cast<std::int32_t>(era * 146097 + static_cast<int>(doe) - 719468)};
}

Ymd ymd_from_date(Date date) {
    std::int64_t z = date.days;
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);          // [0, 146096]
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);          // [0, 365]
    const unsigned mp = (5 * doy + 2) / 153;                               // [0, 11]
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;                       // [1, 31]
    const unsigned m = mp + (mp < 10 ? 3 : -9);                            // [1, 12]
    return Ymd{static_cast<int>(y + (m <= 2)), m, d};
}

int weekday_monday0(Date d) {
    // 1970-01-01 was a Thursday (Monday0 index 3).
    std::int32_t w = (d.days + 3) % 7;
    if (w < 0) w += 7;
    return w;
}

const char* weekday_name(int weekday) {
    static const char* names[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    if (weekday < 0 || weekday > 6) return "???";
    return names[weekday];
}

std::optional<Date> parse_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    char sep1 = 0, sep2 = 0, tail = 0;
    if (std::sscanf(s.c_str(), "%d%c%d%c%d%c", &y, &sep1, &m, &sep2, &d, &tail) != 5)
        return std::nullopt;
    if (!((sep1 == '-' && sep2 == '-') || (sep1 == '/' && sep2 == '/')))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31)
        return std::nullopt;
    return date_from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string format_date(Date d) {
    const Ymd ymd = ymd_from_date(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", ymd.year, ymd.month, ymd.day);
    return buf;
}

std::optional<std::int64_t> parse_timestamp(const std::string& s) {
    if (s.empty()) return std::nullopt;

    // Pure integer -> epoch seconds.
    bool numeric = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 0 && (s[i] == '-' || s[i] == '+')) continue;
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            numeric = false;
            break;
        }
    }
    if (numeric) {
        errno = 0;
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (errno != 0 || end == s.c_str() || *end != '\0') return std::nullopt;
        return static_cast<std::int64_t>(v);
    }

    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    char sep = 0;
    const int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n < 7 || (sep != 'T' && sep != ' ' && sep != 't'))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 ||
        mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0)
        return std::nullopt;

    const Date date = date_from_ymd(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return static_cast<std::int64_t>(date.days) * 86400 + h * 3600 + mi * 60 +
           static_cast<std::int64_t>(sec);
}

std::string format_timestamp(std::int64_t ts) {
    const std::int64_t day = floor_div(ts, 86400);
    const std::int64_t sod = ts - day * 86400;
    const Ymd ymd = ymd_from_date(Date{static_cast<std::int32_t>(day)});
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", ymd.year, ymd.month,
                  ymd.day, static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

LocalStamp to_local(std::int64_t ts_utc, int tz_offset_minutes) {
    const std::int64_t local = ts_utc + static_cast<std::int64_t>(tz_offset_minutes) * 60;
    const std::int64_t day = floor_div(local, 86400);
    LocalStamp out;
    out.date = Date{static_cast<std::int32_t>(day)};
    out.minute_of_day = static_cast<int>((local - day * 86400) / 60);
    return out;
}

} // namespace crowddyn
