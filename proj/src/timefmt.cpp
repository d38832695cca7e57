#include "prct/timefmt.hpp"

#include <cmath>
#include <cstdio>

namespace prct {

namespace {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = int(doy - (153 * mp + 2) / 5 + 1);
    m = int(mp + (mp < 10 ? 3 : -9));
    y = int(yy + (m <= 2));
}

} // namespace

std::int64_t epoch_from_civil(int year, int month, int day, int hour, int minute, int second) {
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string iso8601_utc(double epoch_seconds) {
    double whole = std::floor(epoch_seconds);
    int millis = int(std::lround((epoch_seconds - whole) * 1000.0));
    auto secs = std::int64_t(whole);
    if (millis == 1000) {
        millis = 0;
        ++secs;
    }
    std::int64_t days = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
    int tod = int(secs - days * 86400);
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, m, d,
                  tod / 3600, (tod / 60) % 60, tod % 60, millis);
    return buf;
}

std::int64_t utc_hour_bucket(double epoch_seconds) {
    return std::int64_t(std::floor(epoch_seconds / 3600.0));
}

} // namespace prct
