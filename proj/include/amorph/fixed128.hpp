#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amorph {

// A point on the circle R/Z stored as a 128-bit binary fraction.
// Addition wraps mod 2^128, so rotation orbits are exact mod 1 over any
// horizon; doubling is a single shift.
class Fixed128 {
public:
    constexpr Fixed128() : v_(0) {}
    constexpr explicit Fixed128(unsigned __int128 raw) : v_(raw) {}

    static constexpr Fixed128 from_words(std::uint64_t hi, std::uint64_t lo) {
        return Fixed128(((unsigned __int128)hi << 64) | lo);
    }

    // (sqrt(5)-1)/2, the "golden" keyword.
    static constexpr Fixed128 golden() {
        return from_words(0x9e3779b97f4a7c15ULL, 0xf39cc0605cedc834ULL);
    }
    // sqrt(2)/2, used as a generic irrational offset.
    static constexpr Fixed128 sqrt2_half() {
        return from_words(0xb504f333f9de6484ULL, 0x597d89b3754abe9fULL);
    }

    static Fixed128 from_double(double x) {
        x -= std::floor(x);
        double scaled = x * 0x1p64;
        double hi = std::floor(scaled);
        double lo = std::floor((scaled - hi) * 0x1p64);
        if (hi >= 0x1p64) return Fixed128(0);
        return from_words((std::uint64_t)hi, (std::uint64_t)lo);
    }

    // p/q reduced into [0,1); q > 0.
    static Fixed128 from_fraction(std::uint64_t p, std::uint64_t q) {
        if (q == 0) throw std::invalid_argument("fraction with zero denominator");
        p %= q;
        unsigned __int128 num = (unsigned __int128)p << 64;
        unsigned __int128 hi = num / q;
        unsigned __int128 rem = num % q;
        unsigned __int128 lo = (rem << 64) / q;
        return Fixed128((hi << 64) + lo);
    }

    double to_double() const {
        return (double)(std::uint64_t)(v_ >> 64) * 0x1p-64 +
               (double)(std::uint64_t)v_ * 0x1p-128;
    }

    friend Fixed128 operator+(Fixed128 a, Fixed128 b) { return Fixed128(a.v_ + b.v_); }
    friend Fixed128 operator-(Fixed128 a, Fixed128 b) { return Fixed128(a.v_ - b.v_); }
    Fixed128& operator+=(Fixed128 o) { v_ += o.v_; return *this; }
    Fixed128& operator-=(Fixed128 o) { v_ -= o.v_; return *this; }

    Fixed128 doubled() const { return Fixed128(v_ << 1); }
    Fixed128 times(std::uint64_t k) const { return Fixed128(v_ * k); }

    friend bool operator==(Fixed128 a, Fixed128 b) { return a.v_ == b.v_; }
    friend bool operator<(Fixed128 a, Fixed128 b) { return a.v_ < b.v_; }
    friend bool operator>=(Fixed128 a, Fixed128 b) { return a.v_ >= b.v_; }

    unsigned __int128 raw() const { return v_; }

    // arc distance d(x,y) = min(|x-y|, 1-|x-y|) as a double
    static double arc_distance(Fixed128 a, Fixed128 b) {
        unsigned __int128 diff = a.v_ - b.v_;
        unsigned __int128 other = -diff;
        unsigned __int128 m = diff < other ? diff : other;
        return Fixed128(m).to_double();
    }

private:
    unsigned __int128 v_;
};

}  // namespace amorph
