#pragma once

// Calendar dates in ISO-8601 (YYYY-MM-DD). Plain value type, total order.

#include <compare>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace tieout {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m == 2 && leap(y)) return 29;
        return d[m - 1];
    }

    bool valid() const {
        return year >= 1 && month >= 1 && month <= 12 && day >= 1 &&
               day <= days_in_month(year, month);
    }

    Date plus_days(int n) const {
        Date d = *this;
        while (n > 0) {
            int rem = days_in_month(d.year, d.month) - d.day;
            if (n <= rem) { d.day += n; return d; }
            n -= rem + 1;
            d.day = 1;
            if (++d.month > 12) { d.month = 1; ++d.year; }
        }
        return d;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    static Date parse(const std::string& s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-')
            throw std::invalid_argument("malformed date: " + s);
        for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("malformed date: " + s);
        Date d{std::stoi(s.substr(0, 4)), std::stoi(s.substr(5, 2)), std::stoi(s.substr(8, 2))};
        if (!d.valid()) throw std::invalid_argument("invalid date: " + s);
        return d;
    }
};

} // namespace tieout
