#pragma once

// Exact rational arithmetic for share quantities, prices, and split ratios.
// All reconciliation math goes through this type; floating point is never
// used for values that end up in a report.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tieout {

class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integral() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    // Integral value; throws if the rational has a fractional part.
    std::int64_t to_int() const {
        if (den_ != 1) throw std::domain_error("rational is not integral: " + to_string());
        return num_;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make_checked(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
    Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
    Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    // "N" when integral, "N:M" otherwise.
    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + ":" + std::to_string(den_);
    }

    // Accepts "N" and "N:M" (also "N/M" for ratio fields in ledgers).
    static Rational parse(const std::string& s) {
        auto sep = s.find(':');
        if (sep == std::string::npos) sep = s.find('/');
        if (sep == std::string::npos) return Rational(parse_int(s));
        return Rational(parse_int(s.substr(0, sep)), parse_int(s.substr(sep + 1)));
    }

    // Exact decimal string ("3162500", "0.00001", "-2.5"). Commas and a
    // leading currency sign are tolerated; everything else is rejected.
    static Rational parse_decimal(const std::string& raw) {
        std::string s;
        s.reserve(raw.size());
        for (char c : raw) {
            if (c == ',' || c == '$' || c == ' ') continue;
            s.push_back(c);
        }
        if (s.empty()) throw std::invalid_argument("empty decimal");
        std::size_t i = 0;
        bool neg = false;
        if (s[i] == '+' || s[i] == '-') { neg = s[i] == '-'; ++i; }
        std::int64_t num = 0, den = 1;
        bool seen_digit = false, seen_dot = false;
        for (; i < s.size(); ++i) {
            if (s[i] == '.') {
                if (seen_dot) throw std::invalid_argument("malformed decimal: " + raw);
                seen_dot = true;
                continue;
            }
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("malformed decimal: " + raw);
            seen_digit = true;
            num = checked_i64(i128(num) * 10 + (s[i] - '0'));
            if (seen_dot) den = checked_i64(i128(den) * 10);
        }
        if (!seen_digit) throw std::invalid_argument("malformed decimal: " + raw);
        return Rational(neg ? -num : num, den);
    }

    // Exact decimal rendering when the denominator is 2^a * 5^b, otherwise
    // falls back to the "N:M" form. Trailing zeros are never emitted.
    std::string to_decimal_string() const {
        if (den_ == 1) return std::to_string(num_);
        std::int64_t d = den_;
        int twos = 0, fives = 0;
        while (d % 2 == 0) { d /= 2; ++twos; }
        while (d % 5 == 0) { d /= 5; ++fives; }
        if (d != 1) return to_string();
        int scale = twos > fives ? twos : fives;
        i128 scaled = i128(num_ < 0 ? -num_ : num_);
        for (int k = 0; k < scale - twos; ++k) scaled *= 2;
        for (int k = 0; k < scale - fives; ++k) scaled *= 5;
        std::string digits = u128_to_string(scaled);
        while (static_cast<int>(digits.size()) <= scale) digits.insert(digits.begin(), '0');
        digits.insert(digits.size() - scale, 1, '.');
        while (digits.back() == '0') digits.pop_back();
        if (digits.back() == '.') digits.pop_back();
        return (num_ < 0 ? "-" : "") + digits;
    }

private:
    using i128 = __int128;

    static std::int64_t checked_i64(i128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
        return static_cast<std::int64_t>(v);
    }

    static Rational make_checked(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        Rational r;
        r.num_ = checked_i64(n);
        r.den_ = checked_i64(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    static std::string u128_to_string(i128 v) {
        if (v == 0) return "0";
        std::string out;
        while (v > 0) { out.insert(out.begin(), char('0' + int(v % 10))); v /= 10; }
        return out;
    }

    static std::int64_t parse_int(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty integer");
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("malformed integer: " + s);
        return v;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace tieout
