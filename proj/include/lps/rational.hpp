#pragma once

#include <concepts>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lps {

/// Exact rational on 64-bit limbs. Arithmetic that would overflow throws
/// std::overflow_error instead of wrapping.
class Rational {
public:
    constexpr Rational() = default;
    template <std::integral T>
    constexpr Rational(T n) : num_(static_cast<std::int64_t>(n)), den_(1) {}  // NOLINT
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    bool is_negative() const { return num_ < 0; }
    int sign() const { return (num_ > 0) - (num_ < 0); }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Largest integer not above the value.
    std::int64_t floor() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }

    Rational operator-() const { return make(-static_cast<__int128>(num_), den_); }
    Rational abs() const { return num_ < 0 ? -*this : *this; }
    Rational inverse() const {
        if (num_ == 0) throw std::domain_error("division by zero rational");
        return make(den_, num_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) { return a * b.inverse(); }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend auto operator<=>(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
    }

    /// Integer power; negative exponents invert.
    Rational pow(std::int64_t e) const {
        if (e < 0) return inverse().pow(-e);
        Rational r(1), b = *this;
        while (e > 0) {
            if (e & 1) r *= b;
            e >>= 1;
            if (e > 0) b *= b;
        }
        return r;
    }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("division by zero rational");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        constexpr __int128 lim = INT64_MAX;
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }
    void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace lps
