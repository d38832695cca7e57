#pragma once

#include <cstdint>
#include <string>

namespace prct {

// ISO-8601 UTC with millisecond precision, e.g. 2026-01-15T00:00:01.250Z.
// `epoch_seconds` is seconds since the Unix epoch.
std::string iso8601_utc(double epoch_seconds);

// Unix epoch seconds for a UTC civil date/time (proleptic Gregorian).
std::int64_t epoch_from_civil(int year, int month, int day,
                              int hour = 0, int minute = 0, int second = 0);

// Hour bucket (floor of epoch_seconds / 3600); used for hourly trajectories.
std::int64_t utc_hour_bucket(double epoch_seconds);

} // namespace prct
