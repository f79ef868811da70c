#pragma once

#include <cstdint>
#include <bit>
#include <memory>
#include <vector>

#include "amorph/fixed128.hpp"

namespace amorph {

// One-sided sequence over a byte alphabet, defined by a pure index
// function.  Windows up to 1e7 are consumed by the scaling sweeps, so
// symbols are generated, not materialized.
class Sequence {
public:
    virtual ~Sequence() = default;
    virtual std::uint8_t at(std::uint64_t k) const = 0;
    virtual unsigned alphabet_size() const { return 2; }

    // bulk fill, overridable when a running-state evaluation is cheaper
    virtual void fill(std::uint64_t start, std::size_t n, std::uint8_t* out) const {
        for (std::size_t i = 0; i < n; ++i) out[i] = at(start + i);
    }
};

using SequencePtr = std::shared_ptr<const Sequence>;

// Sturmian coding of the rotation by alpha: symbol 1 on [1-alpha, 1).
// Interval membership is an exact fixed-point comparison.
class SturmianSequence final : public Sequence {
public:
    SturmianSequence(Fixed128 alpha, Fixed128 x0 = Fixed128())
        : alpha_(alpha), x0_(x0), one_minus_alpha_(Fixed128() - alpha) {}

    std::uint8_t at(std::uint64_t k) const override {
        Fixed128 x = x0_ + alpha_.times(k);
        return x >= one_minus_alpha_ ? 1 : 0;
    }

    void fill(std::uint64_t start, std::size_t n, std::uint8_t* out) const override {
        Fixed128 x = x0_ + alpha_.times(start);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = x >= one_minus_alpha_ ? 1 : 0;
            x += alpha_;
        }
    }

    Fixed128 alpha() const { return alpha_; }

private:
    Fixed128 alpha_, x0_, one_minus_alpha_;
};

inline std::uint8_t sturmian_bit(Fixed128 alpha, Fixed128 x0, std::uint64_t k) {
    return SturmianSequence(alpha, x0).at(k);
}

// Prouhet-Thue-Morse: parity of popcount.
class ThueMorseSequence final : public Sequence {
public:
    std::uint8_t at(std::uint64_t k) const override {
        return std::popcount(k) & 1u;
    }
};

inline std::uint8_t thue_morse(std::uint64_t k) { return std::popcount(k) & 1u; }

class PeriodicSequence final : public Sequence {
public:
    explicit PeriodicSequence(std::vector<std::uint8_t> block)
        : block_(std::move(block)) {}
    std::uint8_t at(std::uint64_t k) const override {
        return block_[k % block_.size()];
    }
private:
    std::vector<std::uint8_t> block_;
};

// Cantor metric rho(x,y) = 2^-j, j the first index of disagreement.
// Returns 0 when the sequences agree on [0, max_window) (documented
// truncation of the infimum).
inline double cantor_distance(const Sequence& x, const Sequence& y,
                              std::uint64_t max_window) {
    for (std::uint64_t k = 0; k < max_window; ++k)
        if (x.at(k) != y.at(k)) return std::ldexp(1.0, -(int)std::min<std::uint64_t>(k, 1074));
    return 0.0;
}

}  // namespace amorph
