#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amorph/sequences.hpp"

namespace amorph {

inline constexpr char kHole = '*';
inline constexpr std::uint8_t kHoleSymbol = 0xff;

// The all-holes sequence T_0 = *^infinity.
class HoleSequence final : public Sequence {
public:
    std::uint8_t at(std::uint64_t) const override { return kHoleSymbol; }
};

// A finite word over {0,1,*} repeated periodically, holes preserved.
class WordSequence final : public Sequence {
public:
    explicit WordSequence(std::string word) : word_(std::move(word)) {
        if (word_.empty()) throw std::invalid_argument("empty word");
    }
    std::uint8_t at(std::uint64_t k) const override {
        char c = word_[k % word_.size()];
        return c == kHole ? kHoleSymbol : (std::uint8_t)(c - '0');
    }
private:
    std::string word_;
};

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d) {
        if (d == 0) throw std::invalid_argument("rational with zero denominator");
        std::int64_t g = std::gcd(n, d);
        if (g == 0) g = 1;
        return Rational{n / g, d / g};
    }
    double value() const { return (double)num / (double)den; }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
};

struct PeriodicStructure {
    std::vector<std::int64_t> periods;   // p_l, each dividing the next
    std::vector<Rational> densities;     // D(p_l), exact
};

// Substitution operator F_v: copy the periodic word v-bar and replace the
// subsequence of holes by x.  Output restricted to [0, length).
inline std::vector<char> toeplitz_fill(const std::string& v, const Sequence& x,
                                       std::size_t length) {
    if (v.empty()) throw std::invalid_argument("empty template");
    std::size_t stars = std::count(v.begin(), v.end(), kHole);
    if (stars == 0 || stars == v.size())
        throw std::invalid_argument("template needs a hole and a letter");
    std::vector<char> out(length);
    std::uint64_t next_star = 0;
    for (std::size_t k = 0; k < length; ++k) {
        char c = v[k % v.size()];
        if (c == kHole) {
            std::uint8_t s = x.at(next_star++);
            out[k] = s == kHoleSymbol ? kHole : (char)('0' + s);
        } else {
            out[k] = c;
        }
    }
    return out;
}

// (p,q)-Toeplitz word T(v); p = |v|, q = |v|_*, d = gcd(p,q).  The
// two-argument form enforces the 0^m 1 v shape with
// 1 <= |v|_* <= |v| <= m; the one-argument form accepts any template
// with at least one letter and one hole.
class ToeplitzWord final : public Sequence {
public:
    explicit ToeplitzWord(std::string tpl) : tpl_(std::move(tpl)) { init(); }

    // tpl is the full template 0^m 1 v over {0,1,*}
    ToeplitzWord(std::string tpl, unsigned m) : tpl_(std::move(tpl)), m_(m) {
        if (tpl_.size() < m_ + 2) throw std::invalid_argument("template shorter than 0^m 1");
        for (unsigned i = 0; i < m_; ++i)
            if (tpl_[i] != '0') throw std::invalid_argument("template must start with 0^m");
        if (tpl_[m_] != '1') throw std::invalid_argument("template must start with 0^m 1");
        init();
        std::size_t vlen = tpl_.size() - m_ - 1;
        if (q_ < 1 || (std::size_t)q_ > vlen || vlen > m_)
            throw std::invalid_argument("need 1 <= |v|_* <= |v| <= m");
    }

    std::int64_t p() const { return p_; }
    std::int64_t q() const { return q_; }
    std::int64_t d() const { return d_; }
    const std::string& tpl() const { return tpl_; }

    // Position k of T(v): descend through the hole chain until a letter.
    // q < p makes the chain strictly decreasing once k is large; for small
    // k it can cycle (the limit never fills such a hole), which the guard
    // reports.
    std::uint8_t at(std::uint64_t k) const override {
        for (int guard = 0; guard < 256; ++guard) {
            std::size_t r = (std::size_t)(k % (std::uint64_t)p_);
            if (tpl_[r] != kHole) return (std::uint8_t)(tpl_[r] - '0');
            std::uint64_t next =
                (k / (std::uint64_t)p_) * (std::uint64_t)q_ + (std::uint64_t)star_rank_[r];
            if (next == k) throw std::runtime_error("hole never fills in T(v)");
            k = next;
        }
        throw std::runtime_error("hole chain does not terminate");
    }

    // Level-l approximant T_l(v) over {0,1,*}: positions whose hole chain
    // survives l levels are still holes.
    char approximant_at(std::uint64_t k, unsigned level) const {
        for (unsigned step = 0; step < level; ++step) {
            std::size_t r = (std::size_t)(k % (std::uint64_t)p_);
            if (tpl_[r] != kHole) return tpl_[r];
            k = (k / (std::uint64_t)p_) * (std::uint64_t)q_ + (std::uint64_t)star_rank_[r];
        }
        return kHole;
    }

private:
    void init() {
        if (tpl_.empty()) throw std::invalid_argument("empty template");
        p_ = (std::int64_t)tpl_.size();
        star_rank_.assign(tpl_.size(), -1);
        for (std::size_t i = 0; i < tpl_.size(); ++i) {
            char c = tpl_[i];
            if (c == kHole) {
                star_rank_[i] = (int)q_;
                ++q_;
            } else if (c != '0' && c != '1') {
                throw std::invalid_argument("template letters must be 0, 1 or *");
            }
        }
        if (q_ < 1 || q_ == p_)
            throw std::invalid_argument("template needs a hole and a letter");
        d_ = std::gcd(p_, q_);
    }

    std::string tpl_;
    unsigned m_ = 0;
    std::int64_t p_ = 0, q_ = 0, d_ = 1;
    std::vector<int> star_rank_;
};

inline std::string toeplitz_expand(const ToeplitzWord& w, std::size_t length) {
    std::string out(length, '?');
    for (std::size_t k = 0; k < length; ++k) out[k] = (char)('0' + w.at(k));
    return out;
}

// Per(p, x) certified on [0, window): residues k mod p with x_{k+pl}
// constant for every sampled l.  The defining quantifier is over all l;
// a finite window yields a certificate up to that window only.
inline std::vector<std::int64_t> per_set(const Sequence& x, std::int64_t p,
                                         std::uint64_t window) {
    if (p <= 0) throw std::invalid_argument("period must be positive");
    std::vector<std::uint8_t> buf(window);
    x.fill(0, window, buf.data());
    std::vector<std::int64_t> out;
    for (std::int64_t r = 0; r < p; ++r) {
        if ((std::uint64_t)r >= window) break;
        std::uint8_t first = buf[r];
        bool periodic = true;
        for (std::uint64_t k = r + p; k < window; k += p) {
            if (buf[k] != first) { periodic = false; break; }
        }
        if (periodic) out.push_back(r);
    }
    return out;
}

// Exact Per residues for a (p,q)-Toeplitz word at its natural periods
// p^l / d^(l-1): the non-hole positions of T_l.
inline std::vector<std::int64_t> per_set_exact(const ToeplitzWord& w, unsigned level) {
    std::int64_t period = w.p();
    for (unsigned l = 1; l < level; ++l) period = period / w.d() * w.p();
    std::vector<std::int64_t> out;
    for (std::int64_t k = 0; k < period; ++k)
        if (w.approximant_at((std::uint64_t)k, level) != kHole) out.push_back(k);
    return out;
}

// Periods p^l/d^(l-1) with densities D = 1 - q^l/p^l, exact.
inline PeriodicStructure density_table(const ToeplitzWord& w, unsigned depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    PeriodicStructure ps;
    std::int64_t period = w.p();
    std::int64_t pn = w.p(), qn = w.q();
    for (unsigned l = 1; l <= depth; ++l) {
        ps.periods.push_back(period);
        ps.densities.push_back(Rational::make(pn - qn, pn));
        if (l == depth) break;
        if (period > std::numeric_limits<std::int64_t>::max() / w.p() ||
            pn > std::numeric_limits<std::int64_t>::max() / w.p())
            throw std::overflow_error("density table depth overflows 64-bit periods");
        period = period / w.d() * w.p();
        pn *= w.p();
        qn *= w.q();
    }
    return ps;
}

// Cassaigne-Karhumaki: T(v) is periodic iff its length-p prefix is
// d-periodic.
inline bool is_periodic(const ToeplitzWord& w) {
    std::int64_t p = w.p(), d = w.d();
    for (std::int64_t k = 0; k + d < p; ++k)
        if (w.at((std::uint64_t)k) != w.at((std::uint64_t)(k + d))) return false;
    return true;
}

// Per(p,x) subseteq Per(q,x) certified on a window implies
// Per(gcd(p,q),x) = Per(p,x); returns the reduced period.
inline std::int64_t gcd_reduce(std::int64_t p, std::int64_t q, const Sequence& x,
                               std::uint64_t window) {
    auto pp = per_set(x, p, window);
    auto pq = per_set(x, q, window);
    std::vector<char> inq((std::size_t)q, 0);
    for (auto r : pq) inq[(std::size_t)r] = 1;
    for (auto r : pp) {
        // membership of the residue class r (mod p) inside Per(q,.) means
        // every k = r + p*l in the window has residue k mod q certified
        for (std::uint64_t k = (std::uint64_t)r; k < window; k += (std::uint64_t)p) {
            if (!inq[(std::size_t)(k % (std::uint64_t)q)])
                throw std::runtime_error("Per(p) subseteq Per(q) violated on window");
        }
    }
    return std::gcd(p, q);
}

// log(p/d) / log(p/q); rejects periodic words.
inline double predicted_ac(const ToeplitzWord& w) {
    if (is_periodic(w)) throw std::invalid_argument("word is periodic");
    return std::log((double)w.p() / (double)w.d()) /
           std::log((double)w.p() / (double)w.q());
}

}  // namespace amorph
