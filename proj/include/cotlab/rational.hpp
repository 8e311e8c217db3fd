#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cotlab {

// Exact rational on checked 64-bit integers. The interpreter's attention
// argmax is discontinuous, so floats are off the table; construction values
// are small integers, so int64 with overflow checks beats bignums on the
// hot paths. Overflow throws instead of wrapping.
class Rat {
public:
    Rat() = default;
    Rat(long long n) : num_(guard(n)) {} // NOLINT: implicit on purpose
    Rat(long long n, long long d) : num_(n), den_(d) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_integer() const { return den_ == 1; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        if (a.den_ == 1 && b.den_ == 1) {
            long long r;
            if (__builtin_add_overflow(a.num_, b.num_, &r)) throw overflow();
            Rat out;
            out.num_ = guard(r);
            return out;
        }
        __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
        __int128 d = i128(a.den_) * b.den_;
        return make(n, d);
    }

    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }

    Rat operator-() const {
        Rat out;
        out.num_ = -num_; // int64 min never appears: normalize rejects it
        out.den_ = den_;
        return out;
    }

    friend Rat operator*(const Rat& a, const Rat& b) {
        if (a.den_ == 1 && b.den_ == 1) {
            long long r;
            if (__builtin_mul_overflow(a.num_, b.num_, &r)) throw overflow();
            Rat out;
            out.num_ = guard(r);
            return out;
        }
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }

    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }

    Rat& operator+=(const Rat& b) { return *this = *this + b; }
    Rat& operator-=(const Rat& b) { return *this = *this - b; }
    Rat& operator*=(const Rat& b) { return *this = *this * b; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    double to_double() const { return double(num_) / double(den_); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    static Rat parse(const std::string& s) {
        size_t slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rat(std::stoll(s));
            return Rat(std::stoll(s.substr(0, slash)),
                       std::stoll(s.substr(slash + 1)));
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad rational literal: " + s);
        }
    }

private:
    static __int128 i128(long long v) { return static_cast<__int128>(v); }

    // INT64_MIN is banned so unary minus can never overflow
    static long long guard(long long v) {
        if (v == INT64_MIN) throw overflow();
        return v;
    }

    static std::overflow_error overflow() {
        return std::overflow_error("rational overflow");
    }

    static Rat make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 an = n < 0 ? -n : n;
        // gcd on __int128 by hand; std::gcd wants plain integer types
        __int128 x = an, y = d;
        while (y) { __int128 t = x % y; x = y; y = t; }
        if (x > 1) { n /= x; d /= x; }
        const __int128 lo = INT64_MIN + 1, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi) throw overflow();
        Rat out;
        out.num_ = static_cast<long long>(n);
        out.den_ = static_cast<long long>(d);
        return out;
    }

    void normalize() {
        Rat r = make(num_, den_);
        num_ = r.num_;
        den_ = r.den_;
    }

    long long num_ = 0;
    long long den_ = 1;
};

} // namespace cotlab
