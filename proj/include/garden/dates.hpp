#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "garden/error.hpp"

namespace garden::dates {

// Civil calendar <-> epoch-day conversions (proleptic Gregorian), after
// Howard Hinnant's public-domain algorithms.

inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    int year;
    int month; // 1..12
    int day;   // 1..31
};

inline Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Civil{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) {
        return 29;
    }
    return lengths[m - 1];
}

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
    if (pos + count > s.size()) {
        return false;
    }
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') {
            return false;
        }
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

} // namespace detail

/// Parses an ISO-8601 date or date-time into UTC epoch seconds. Accepted
/// forms: YYYY-MM-DD, YYYY-MM-DD[T ]HH:MM:SS with an optional fractional
/// second (ignored) and an optional zone: 'Z', +HH:MM, -HH:MM, +HHMM.
/// Timestamps without a zone are taken as UTC.
inline std::int64_t parse_timestamp(std::string_view s) {
    int y = 0, mo = 0, d = 0;
    const auto bad = [&](const char* why) -> std::int64_t {
        fail("invalid timestamp \"", std::string(s), "\": ", why);
    };
    if (!detail::parse_digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' ||
        !detail::parse_digits(s, 5, 2, mo) || s[7] != '-' || !detail::parse_digits(s, 8, 2, d)) {
        return bad("expected YYYY-MM-DD");
    }
    if (mo < 1 || mo > 12) {
        return bad("month out of range");
    }
    if (d < 1 || d > days_in_month(y, mo)) {
        return bad("day out of range");
    }
    int hh = 0, mi = 0, ss = 0;
    std::size_t pos = 10;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') {
            return bad("expected 'T' separator");
        }
        ++pos;
        if (!detail::parse_digits(s, pos, 2, hh) || pos + 5 > s.size() || s[pos + 2] != ':' ||
            !detail::parse_digits(s, pos + 3, 2, mi)) {
            return bad("expected HH:MM");
        }
        pos += 5;
        if (pos < s.size() && s[pos] == ':') {
            if (!detail::parse_digits(s, pos + 1, 2, ss)) {
                return bad("expected seconds");
            }
            pos += 3;
        }
        if (hh > 23 || mi > 59 || ss > 60) {
            return bad("time of day out of range");
        }
        if (ss == 60) {
            ss = 59; // clamp leap seconds
        }
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t digits = 0;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                ++pos;
                ++digits;
            }
            if (digits == 0) {
                return bad("empty fractional second");
            }
        }
    }
    std::int64_t offset = 0;
    if (pos < s.size()) {
        const char z = s[pos];
        if (z == 'Z') {
            ++pos;
        } else if (z == '+' || z == '-') {
            int oh = 0, om = 0;
            if (!detail::parse_digits(s, pos + 1, 2, oh)) {
                return bad("bad zone offset");
            }
            std::size_t opos = pos + 3;
            if (opos < s.size() && s[opos] == ':') {
                ++opos;
            }
            if (opos < s.size()) {
                if (!detail::parse_digits(s, opos, 2, om)) {
                    return bad("bad zone offset");
                }
                opos += 2;
            }
            if (oh > 14 || om > 59) {
                return bad("zone offset out of range");
            }
            offset = (z == '+' ? 1 : -1) * (oh * 3600 + om * 60);
            pos = opos;
        } else {
            return bad("unexpected trailing characters");
        }
    }
    if (pos != s.size()) {
        return bad("unexpected trailing characters");
    }
    const std::int64_t days = days_from_civil(y, mo, d);
    return days * 86400 + hh * 3600 + mi * 60 + ss - offset;
}

inline std::string format_date(std::int64_t epoch_days) {
    const Civil c = civil_from_days(epoch_days);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

inline std::string format_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const Civil c = civil_from_days(days);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", c.year, c.month,
                  c.day, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

/// Epoch day of the first of the month containing the given instant.
inline std::int64_t month_start(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) {
        --days;
    }
    const Civil c = civil_from_days(days);
    return days_from_civil(c.year, c.month, 1);
}

inline std::int64_t next_month(std::int64_t month_start_days) {
    const Civil c = civil_from_days(month_start_days);
    if (c.month == 12) {
        return days_from_civil(c.year + 1, 1, 1);
    }
    return days_from_civil(c.year, c.month + 1, 1);
}

/// Epoch day of the Monday starting the ISO week that contains the instant.
inline std::int64_t week_start(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) {
        --days;
    }
    // 1970-01-01 was a Thursday; shift so Monday = 0.
    std::int64_t dow = (days + 3) % 7;
    if (dow < 0) {
        dow += 7;
    }
    return days - dow;
}

} // namespace garden::dates
