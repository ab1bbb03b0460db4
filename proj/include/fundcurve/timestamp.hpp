#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace fundcurve {

/// A market-time instant: UTC instant plus the local offset it was published
/// with. Ordering follows the local wall clock first, so that a clock-change
/// adjusted series (one imputed spring hour, one collapsed autumn hour) stays
/// strictly increasing; the UTC instant breaks ties.
class Timestamp {
public:
    Timestamp() = default;
    Timestamp(std::chrono::sys_seconds utc, int offset_minutes) : utc_(utc), offset_minutes_(offset_minutes) {}

    /// Builds a timestamp from local wall-clock fields.
    static Timestamp from_local(int year, unsigned month, unsigned day, int hour, int minute, int offset_minutes);

    /// ISO-8601 with explicit offset, e.g. "2017-03-26T03:00:00+02:00" or a trailing "Z".
    static Timestamp parse(std::string_view text);

    std::chrono::sys_seconds utc() const { return utc_; }
    int offset_minutes() const { return offset_minutes_; }
    std::chrono::local_seconds local() const;

    int hour_of_day() const;
    unsigned month() const;
    /// ISO weekday, Monday = 1 ... Sunday = 7.
    unsigned iso_weekday() const;
    std::chrono::year_month_day local_date() const;

    Timestamp plus(std::chrono::seconds d) const { return Timestamp(utc_ + d, offset_minutes_); }

    std::string to_string() const;

    std::strong_ordering operator<=>(const Timestamp& o) const;
    bool operator==(const Timestamp& o) const = default;

private:
    std::chrono::sys_seconds utc_{};
    int offset_minutes_ = 0;
};

/// Offset of the Central European time zone (CET/CEST, EU clock-change rules)
/// at a UTC instant, in minutes.
int central_european_offset(std::chrono::sys_seconds utc);

/// Clock-change adjusted market hours in Central European time: 24 wall-clock
/// hours per day from local midnight of the given date. The spring hour that
/// does not exist carries the winter offset, the repeated autumn hour appears
/// once with the summer offset (the conventions dst_adjust produces).
std::vector<Timestamp> market_hours(int year, unsigned month, unsigned day, int days);

}  // namespace fundcurve
