#include "fundcurve/timestamp.hpp"

#include "fundcurve/errors.hpp"

#include <charconv>
#include <fmt/format.h>

namespace fundcurve {

using namespace std::chrono;

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    int v = 0;
    if (pos + len > text.size()) {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", whole));
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", whole));
    }
    return v;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", whole));
    }
}

}  // namespace

Timestamp Timestamp::from_local(int year, unsigned month, unsigned day, int hour, int minute, int offset_minutes) {
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok() || hour < 0 || hour > 23 || minute < 0 || minute > 59) {
        throw DataIntegrityError(fmt::format("invalid local time {}-{}-{} {}:{}", year, month, day, hour, minute));
    }
    const auto local_point = sys_days{ymd} + hours{hour} + minutes{minute};
    return Timestamp(time_point_cast<seconds>(local_point - minutes{offset_minutes}), offset_minutes);
}

Timestamp Timestamp::parse(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS(+HH:MM|-HH:MM|Z)
    const std::string_view s = text;
    const int y = parse_int(s, 0, 4, text);
    expect(s, 4, '-', text);
    const int mo = parse_int(s, 5, 2, text);
    expect(s, 7, '-', text);
    const int d = parse_int(s, 8, 2, text);
    if (s.size() < 11 || (s[10] != 'T' && s[10] != ' ')) {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", text));
    }
    const int h = parse_int(s, 11, 2, text);
    expect(s, 13, ':', text);
    const int mi = parse_int(s, 14, 2, text);
    std::size_t pos = 16;
    int sec = 0;
    if (pos < s.size() && s[pos] == ':') {
        sec = parse_int(s, pos + 1, 2, text);
        pos += 3;
    }
    if (pos >= s.size()) {
        throw DataIntegrityError(fmt::format("timestamp '{}' has no UTC offset", text));
    }
    int offset = 0;
    if (s[pos] == 'Z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = parse_int(s, pos + 1, 2, text);
        expect(s, pos + 3, ':', text);
        const int om = parse_int(s, pos + 4, 2, text);
        offset = sign * (oh * 60 + om);
        pos += 6;
    } else {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", text));
    }
    if (pos != s.size() || sec < 0 || sec > 59) {
        throw DataIntegrityError(fmt::format("malformed timestamp '{}'", text));
    }
    return from_local(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, offset).plus(seconds{sec});
}

local_seconds Timestamp::local() const {
    return local_seconds{(utc_ + minutes{offset_minutes_}).time_since_epoch()};
}

year_month_day Timestamp::local_date() const {
    return year_month_day{floor<days>(local())};
}

int Timestamp::hour_of_day() const {
    const auto l = local();
    return static_cast<int>(duration_cast<hours>(l - floor<days>(l)).count());
}

unsigned Timestamp::month() const {
    return static_cast<unsigned>(local_date().month());
}

unsigned Timestamp::iso_weekday() const {
    return weekday{floor<days>(local())}.iso_encoding();
}

std::string Timestamp::to_string() const {
    const auto l = local();
    const auto day_start = floor<days>(l);
    const year_month_day ymd{day_start};
    const hh_mm_ss tod{l - day_start};
    const int a = offset_minutes_ < 0 ? -offset_minutes_ : offset_minutes_;
    if (offset_minutes_ == 0) {
        return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                           static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), tod.hours().count(),
                           tod.minutes().count(), tod.seconds().count());
    }
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}{}{:02}:{:02}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), tod.hours().count(),
                       tod.minutes().count(), tod.seconds().count(), offset_minutes_ < 0 ? '-' : '+', a / 60, a % 60);
}

std::strong_ordering Timestamp::operator<=>(const Timestamp& o) const {
    if (auto c = local() <=> o.local(); c != 0) {
        return c;
    }
    return utc_ <=> o.utc_;
}

int central_european_offset(sys_seconds utc) {
    const year y = year_month_day{floor<days>(utc)}.year();
    const auto last_sunday = [&](std::chrono::month m) {
        return sys_days{year_month_weekday_last{y, m, weekday_last{Sunday}}} + hours{1};
    };
    return (utc >= last_sunday(March) && utc < last_sunday(October)) ? 120 : 60;
}

std::vector<Timestamp> market_hours(int y, unsigned m, unsigned d, int n_days) {
    std::vector<Timestamp> out;
    const year_month_day start{year{y} / month{m} / day{d}};
    if (!start.ok() || n_days < 0) {
        throw DataIntegrityError(fmt::format("bad market-hour range {}-{}-{} + {} days", y, m, d, n_days));
    }
    const sys_days first{start};
    out.reserve(static_cast<std::size_t>(n_days) * 24);
    for (int k = 0; k < n_days; ++k) {
        const year_month_day ymd{first + days{k}};
        for (int h = 0; h < 24; ++h) {
            const auto at = [&](int offset) {
                return Timestamp::from_local(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                                             static_cast<unsigned>(ymd.day()), h, 0, offset);
            };
            const Timestamp summer = at(120);
            out.push_back(central_european_offset(summer.utc()) == 120 ? summer : at(60));
        }
    }
    return out;
}

}  // namespace fundcurve
