#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <thread>
#include <vector>

#include "amorph/denjoy.hpp"
#include "amorph/rng.hpp"
#include "amorph/sequences.hpp"
#include "amorph/systems.hpp"

namespace amorph {

enum class EstimatorMode { suffix_max, terminal };

// finite-horizon surrogate for the limsup of S_n/n: checkpoints on a
// 16-point geometric grid in [T/4, T]
inline std::vector<std::uint64_t> frequency_checkpoints(std::uint64_t T) {
    std::vector<std::uint64_t> cps;
    for (int i = 0; i <= 15; ++i) {
        double n = (double)T / 4.0 * std::pow(4.0, (double)i / 15.0);
        std::uint64_t v = (std::uint64_t)std::llround(n);
        if (v < 1) v = 1;
        if (v > T) v = T;
        if (cps.empty() || cps.back() != v) cps.push_back(v);
    }
    return cps;
}

inline std::size_t words_for_bits(std::uint64_t bits) {
    return (std::size_t)((bits + 63) / 64);
}

// frequency from a packed indicator stream
inline double frequency_from_indicator(const std::uint64_t* words, std::uint64_t T,
                                       EstimatorMode mode,
                                       const std::vector<std::uint64_t>& cps) {
    if (mode == EstimatorMode::terminal) {
        std::uint64_t s = 0;
        std::size_t full = (std::size_t)(T / 64);
        for (std::size_t w = 0; w < full; ++w) s += std::popcount(words[w]);
        std::uint64_t rem = T % 64;
        if (rem) s += std::popcount(words[full] & ((~0ULL) >> (64 - rem)));
        return (double)s / (double)T;
    }
    double best = 0.0;
    std::uint64_t s = 0;
    std::uint64_t bit = 0;
    for (std::uint64_t cp : cps) {
        while (bit + 64 <= cp) {
            s += std::popcount(words[bit / 64]);
            bit += 64;
        }
        std::uint64_t count = s;
        if (bit < cp) {
            std::uint64_t rem = cp - bit;  // in [1, 63]
            count += std::popcount(words[bit / 64] & ((~0ULL) >> (64 - rem)));
        }
        double f = (double)count / (double)cp;
        if (f > best) best = f;
    }
    return best;
}

// A finite family of orbits with a pairwise separation oracle.
class Ensemble {
public:
    virtual ~Ensemble() = default;
    virtual std::size_t size() const = 0;
    virtual std::uint64_t horizon() const = 0;

    // distance lower bound valid at every time step (isometric components)
    virtual double pair_floor(std::size_t, std::size_t) const { return 0.0; }

    // fill the T-bit indicator of d(f^k x_i, f^k x_j) >= delta
    virtual void pair_indicator(std::size_t i, std::size_t j, double delta,
                                std::uint64_t* words) const = 0;

    virtual double pair_frequency(std::size_t i, std::size_t j, double delta,
                                  EstimatorMode mode) const {
        if (i == j) return 0.0;
        if (pair_floor(i, j) >= delta) return 1.0;
        thread_local std::vector<std::uint64_t> scratch;
        std::uint64_t T = horizon();
        scratch.assign(words_for_bits(T), 0);
        pair_indicator(i, j, delta, scratch.data());
        return frequency_from_indicator(scratch.data(), T, mode,
                                        frequency_checkpoints(T));
    }
};

// ---------------------------------------------------------------------------
// Continuous systems: trajectories stored per dynamic coordinate; rigidly
// rotating coordinates keep a constant pairwise distance and are stored
// once as a static column.

class ContinuousEnsemble final : public Ensemble {
public:
    ContinuousEnsemble(const SystemSpec& spec, std::vector<Point> initial,
                       std::uint64_t T, std::size_t workers = 1,
                       std::shared_ptr<const DenjoyModel> denjoy = nullptr)
        : spec_(spec), initial_(std::move(initial)), T_(T), denjoy_(std::move(denjoy)) {
        plan_columns(spec_, 0);
        M_ = initial_.size();
        for (std::size_t ci = 0; ci < columns_.size(); ++ci) {
            if (columns_[ci].dynamic) {
                columns_[ci].data.resize(M_ * (std::size_t)T_);
                dyn_cols_.push_back(ci);
            } else {
                columns_[ci].statics.resize(M_);
            }
        }
        run_all(workers);
    }

    std::size_t size() const override { return M_; }
    std::uint64_t horizon() const override { return T_; }

    double pair_floor(std::size_t i, std::size_t j) const override {
        if (i == j) return 0.0;
        double m = 0.0;
        for (const auto& c : columns_)
            if (!c.dynamic) m = std::max(m, circle_arc(c.statics[i], c.statics[j]));
        return m;
    }

    void pair_indicator(std::size_t i, std::size_t j, double delta,
                        std::uint64_t* words) const override {
        std::size_t nw = words_for_bits(T_);
        double base = pair_floor(i, j);
        if (base >= delta) {
            std::memset(words, 0xff, nw * 8);
            std::uint64_t rem = T_ % 64;
            if (rem) words[nw - 1] = (~0ULL) >> (64 - rem);
            return;
        }
        std::memset(words, 0, nw * 8);
        if (dyn_cols_.empty()) return;
        if (dyn_cols_.size() == 1 && base == 0.0) {
            // hot path: one dynamic coordinate
            const Column& c = columns_[dyn_cols_[0]];
            const double* ra = c.data.data() + i * (std::size_t)T_;
            const double* rb = c.data.data() + j * (std::size_t)T_;
            if (c.kind == CoordKind::circle) {
                for (std::uint64_t k = 0; k < T_; ++k) {
                    double d = std::fabs(ra[k] - rb[k]);
                    d = std::min(d, 1.0 - d);
                    if (d >= delta) words[k / 64] |= 1ULL << (k % 64);
                }
            } else {
                for (std::uint64_t k = 0; k < T_; ++k)
                    if (std::fabs(ra[k] - rb[k]) >= delta) words[k / 64] |= 1ULL << (k % 64);
            }
            return;
        }
        for (std::uint64_t k = 0; k < T_; ++k) {
            double d = base;
            for (std::size_t ci : dyn_cols_) {
                const Column& c = columns_[ci];
                double a = c.data[i * T_ + k];
                double b = c.data[j * T_ + k];
                double dd = c.kind == CoordKind::circle ? circle_arc(a, b) : std::fabs(a - b);
                if (dd > d) d = dd;
            }
            if (d >= delta) words[k / 64] |= 1ULL << (k % 64);
        }
    }

    // value of dynamic coordinate `col` of point i at time k (testing aid)
    double dyn_value(std::size_t col, std::size_t i, std::uint64_t k) const {
        std::size_t c = 0;
        for (const auto& column : columns_) {
            if (!column.dynamic) continue;
            if (c == col) return column.data[i * T_ + k];
            ++c;
        }
        throw std::out_of_range("no such dynamic column");
    }

private:
    struct Column {
        CoordKind kind = CoordKind::circle;
        bool dynamic = true;
        SystemKind owner = SystemKind::rotation;
        std::size_t coord = 0;   // index into Point::coords
        std::size_t peer = 0;    // for coupled coordinates (y of shear/annulus)
        double p0 = 0.0, p1 = 0.0;  // owner parameters
        Fixed128 fx0;
        std::vector<double> data;
        std::vector<double> statics;
        std::shared_ptr<const DenjoyModel> denjoy;
    };

    void plan_columns(const SystemSpec& s, std::size_t base) {
        switch (s.kind) {
            case SystemKind::rotation: {
                Column c;
                c.kind = CoordKind::circle;
                c.dynamic = false;
                c.owner = s.kind;
                c.coord = base;
                columns_.push_back(std::move(c));
                break;
            }
            case SystemKind::doubling: {
                Column c;
                c.kind = CoordKind::circle;
                c.owner = s.kind;
                c.coord = base;
                columns_.push_back(std::move(c));
                break;
            }
            case SystemKind::torus_shear: {
                Column cx;  // x is rigid
                cx.kind = CoordKind::circle;
                cx.dynamic = false;
                cx.owner = s.kind;
                cx.coord = base;
                columns_.push_back(std::move(cx));
                Column cy;  // y_k = y + k x
                cy.kind = CoordKind::circle;
                cy.owner = s.kind;
                cy.coord = base + 1;
                cy.peer = base;
                columns_.push_back(std::move(cy));
                break;
            }
            case SystemKind::morse_smale: {
                Column c;
                c.kind = CoordKind::interval;
                c.owner = s.kind;
                c.coord = base;
                columns_.push_back(std::move(c));
                break;
            }
            case SystemKind::denjoy: {
                Column c;
                c.kind = CoordKind::circle;
                c.owner = s.kind;
                c.coord = base;
                if (!denjoy_)
                    denjoy_ = std::make_shared<DenjoyModel>(
                        s.circle_or("alpha", Fixed128::golden()));
                c.denjoy = denjoy_;
                columns_.push_back(std::move(c));
                break;
            }
            case SystemKind::annulus_transient: {
                Column cx;
                cx.kind = CoordKind::interval;
                cx.owner = s.kind;
                cx.coord = base;
                cx.p0 = s.value_or("x0", 0.5);
                columns_.push_back(std::move(cx));
                Column cy;
                cy.kind = CoordKind::circle;
                cy.owner = s.kind;
                cy.coord = base + 1;
                cy.peer = base;
                cy.p0 = s.value_or("x0", 0.5);
                columns_.push_back(std::move(cy));
                break;
            }
            case SystemKind::pinched: {
                Column ct;  // theta is rigid
                ct.kind = CoordKind::circle;
                ct.dynamic = false;
                ct.owner = s.kind;
                ct.coord = base;
                columns_.push_back(std::move(ct));
                Column cx;
                cx.kind = CoordKind::interval;
                cx.owner = s.kind;
                cx.coord = base + 1;
                cx.peer = base;
                cx.p0 = s.value("alpha");
                cx.p1 = s.value_or("eps", 0.0);
                cx.fx0 = s.circle_or("omega", Fixed128::golden());
                columns_.push_back(std::move(cx));
                break;
            }
            case SystemKind::product: {
                std::size_t d0 = phase_dim(s.children[0]);
                plan_columns(s.children[0], base);
                plan_columns(s.children[1], base + d0);
                break;
            }
        }
    }

    void run_point(std::size_t i) {
        const Point& pt = initial_[i];
        for (auto& c : columns_) {
            if (!c.dynamic) {
                c.statics[i] = frac_part(pt.coords[c.coord]);
                continue;
            }
            double* row = c.data.data() + i * (std::size_t)T_;
            switch (c.owner) {
                case SystemKind::doubling: {
                    // doubling is the binary shift; iterating in finite
                    // precision would shift the point to exactly 0 within
                    // ~53 steps.  Work on the expansion instead: dyadic
                    // points keep their zero tail, generic points get a
                    // fixed pseudorandom tail consistent with their 53
                    // leading bits.
                    double x0 = frac_part(pt.coords[c.coord]);
                    Fixed128 fx = Fixed128::from_double(x0);
                    std::size_t nwords = (std::size_t)(T_ / 64) + 3;
                    std::vector<std::uint64_t> bits(nwords);
                    bits[0] = (std::uint64_t)(fx.raw() >> 64);
                    bits[1] = (std::uint64_t)fx.raw();
                    bool dyadic = x0 * 1048576.0 == std::floor(x0 * 1048576.0);
                    if (!dyadic) {
                        std::uint64_t seed;
                        std::memcpy(&seed, &x0, sizeof seed);
                        for (std::size_t w = 1; w < nwords; ++w)
                            bits[w] = task_rand(seed, 0x0db1, w);
                    }
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        std::uint64_t q = k / 64, r = k % 64;
                        std::uint64_t window =
                            r == 0 ? bits[q] : (bits[q] << r) | (bits[q + 1] >> (64 - r));
                        row[k] = (double)window * 0x1p-64;
                    }
                    break;
                }
                case SystemKind::torus_shear: {
                    Fixed128 x = Fixed128::from_double(pt.coords[c.peer]);
                    Fixed128 y = Fixed128::from_double(pt.coords[c.coord]);
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        row[k] = y.to_double();
                        y += x;
                    }
                    break;
                }
                case SystemKind::morse_smale: {
                    double x = pt.coords[c.coord];
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        row[k] = x;
                        x = x * x;
                    }
                    break;
                }
                case SystemKind::denjoy: {
                    DenjoyModel::State st = c.denjoy->classify(pt.coords[c.coord]);
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        row[k] = c.denjoy->ambient(st);
                        c.denjoy->step(st);
                    }
                    break;
                }
                case SystemKind::annulus_transient: {
                    AnnulusAnchors an(c.p0);
                    double x = pt.coords[c.peer];
                    double y = frac_part(pt.coords[c.coord]);
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        row[k] = y;
                        y = frac_part(y + annulus_alpha(x, an));
                        x = x * x;
                    }
                    break;
                }
                case SystemKind::pinched: {
                    Fixed128 theta = Fixed128::from_double(pt.coords[c.peer]);
                    double x = pt.coords[c.coord];
                    for (std::uint64_t k = 0; k < T_; ++k) {
                        row[k] = x;
                        x = pinched_fibre(c.p0, c.p1, theta.to_double(), x);
                        theta += c.fx0;
                    }
                    break;
                }
                default:
                    throw std::logic_error("unexpected dynamic column owner");
            }
        }
    }

    void run_all(std::size_t workers) {
        if (workers <= 1) {
            for (std::size_t i = 0; i < M_; ++i) run_point(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= M_) return;
                run_point(i);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SystemSpec spec_;
    std::vector<Point> initial_;
    std::uint64_t T_;
    std::size_t M_ = 0;
    std::vector<Column> columns_;
    std::vector<std::size_t> dyn_cols_;
    std::shared_ptr<const DenjoyModel> denjoy_;
};

// ---------------------------------------------------------------------------
// Symbolic systems: points are the first M shifts of a generating
// sequence under sigma^stride; separation at delta = 2^-w means a symbol
// mismatch within the window [k, k+w].

class SymbolicEnsemble final : public Ensemble {
public:
    SymbolicEnsemble(const Sequence& gen, std::size_t M, std::uint64_t T,
                     unsigned stride = 1)
        : M_(M), T_(T), stride_(stride) {
        if (stride_ < 1) throw std::invalid_argument("stride must be >= 1");
        len_ = (std::uint64_t)stride_ * T_ + M_ + 64;
        std::vector<std::uint8_t> buf((std::size_t)len_);
        gen.fill(0, (std::size_t)len_, buf.data());
        bits_.assign(words_for_bits(len_) + 2, 0);
        for (std::uint64_t k = 0; k < len_; ++k)
            if (buf[(std::size_t)k]) bits_[k / 64] |= 1ULL << (k % 64);
    }

    std::size_t size() const override { return M_; }
    std::uint64_t horizon() const override { return T_; }

    static int window_for_delta(double delta) {
        if (delta > 1.0) return -1;           // nothing is ever separated
        if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
        return (int)std::floor(-std::log2(delta) + 1e-12);
    }

    void pair_indicator(std::size_t i, std::size_t j, double delta,
                        std::uint64_t* words) const override {
        std::size_t nw = words_for_bits(T_);
        std::memset(words, 0, nw * 8);
        int w = window_for_delta(delta);
        if (w < 0 || i == j) return;
        if (stride_ == 1) {
            // xor stream then OR-smear over the window
            for (std::size_t t = 0; t < nw; ++t) {
                std::uint64_t acc = 0;
                for (int u = 0; u <= w; ++u)
                    acc |= get64(i + u + 64 * t) ^ get64(j + u + 64 * t);
                words[t] = acc;
            }
        } else {
            if (w != 0)
                throw std::invalid_argument("windowed metric unsupported for powers");
            for (std::uint64_t k = 0; k < T_; ++k) {
                std::uint64_t a = (bits_[(i + stride_ * k) / 64] >> ((i + stride_ * k) % 64)) & 1ULL;
                std::uint64_t b = (bits_[(j + stride_ * k) / 64] >> ((j + stride_ * k) % 64)) & 1ULL;
                if (a != b) words[k / 64] |= 1ULL << (k % 64);
            }
        }
        std::uint64_t rem = T_ % 64;
        if (rem) words[nw - 1] &= (~0ULL) >> (64 - rem);
    }

    double pair_frequency(std::size_t i, std::size_t j, double delta,
                          EstimatorMode mode) const override {
        if (i == j) return 0.0;
        int w = window_for_delta(delta);
        if (w < 0) return 0.0;
        if (stride_ == 1 && w == 0) {
            // fused xor + popcount with checkpoint accounting
            auto cps = frequency_checkpoints(T_);
            if (mode == EstimatorMode::terminal) { cps.clear(); cps.push_back(T_); }
            double best = 0.0;
            std::uint64_t s = 0, bit = 0;
            for (std::uint64_t cp : cps) {
                while (bit + 64 <= cp) {
                    s += std::popcount(get64(i + bit) ^ get64(j + bit));
                    bit += 64;
                }
                std::uint64_t count = s;
                if (bit < cp) {
                    std::uint64_t rem = cp - bit;
                    count += std::popcount((get64(i + bit) ^ get64(j + bit)) &
                                           ((~0ULL) >> (64 - rem)));
                }
                double f = (double)count / (double)cp;
                if (f > best) best = f;
            }
            return best;
        }
        return Ensemble::pair_frequency(i, j, delta, mode);
    }

private:
    std::uint64_t get64(std::uint64_t bitpos) const {
        std::uint64_t q = bitpos / 64, r = bitpos % 64;
        if (r == 0) return bits_[q];
        return (bits_[q] >> r) | (bits_[q + 1] << (64 - r));
    }

    std::size_t M_;
    std::uint64_t T_;
    unsigned stride_;
    std::uint64_t len_;
    std::vector<std::uint64_t> bits_;
};

// ---------------------------------------------------------------------------
// Product of two ensembles under the maximum metric: the sample is the
// cross product and the indicator the bitwise OR.

class ProductEnsemble final : public Ensemble {
public:
    ProductEnsemble(std::shared_ptr<Ensemble> a, std::shared_ptr<Ensemble> b)
        : a_(std::move(a)), b_(std::move(b)) {
        if (a_->horizon() != b_->horizon())
            throw std::invalid_argument("product children disagree on horizon");
    }

    std::size_t size() const override { return a_->size() * b_->size(); }
    std::uint64_t horizon() const override { return a_->horizon(); }

    double pair_floor(std::size_t i, std::size_t j) const override {
        auto [a1, b1] = split(i);
        auto [a2, b2] = split(j);
        double f = 0.0;
        if (a1 != a2) f = std::max(f, a_->pair_floor(a1, a2));
        if (b1 != b2) f = std::max(f, b_->pair_floor(b1, b2));
        return f;
    }

    void pair_indicator(std::size_t i, std::size_t j, double delta,
                        std::uint64_t* words) const override {
        auto [a1, b1] = split(i);
        auto [a2, b2] = split(j);
        std::size_t nw = words_for_bits(horizon());
        std::memset(words, 0, nw * 8);
        thread_local std::vector<std::uint64_t> scratch;
        if (a1 != a2) {
            a_->pair_indicator(a1, a2, delta, words);
        }
        if (b1 != b2) {
            scratch.assign(nw, 0);
            b_->pair_indicator(b1, b2, delta, scratch.data());
            for (std::size_t t = 0; t < nw; ++t) words[t] |= scratch[t];
        }
    }

private:
    std::pair<std::size_t, std::size_t> split(std::size_t i) const {
        return {i / b_->size(), i % b_->size()};
    }
    std::shared_ptr<Ensemble> a_, b_;
};

// ---------------------------------------------------------------------------
// f^m viewed through the base ensemble: indicators subsampled at stride m.

class PowerEnsemble final : public Ensemble {
public:
    PowerEnsemble(std::shared_ptr<Ensemble> base, unsigned power)
        : base_(std::move(base)), m_(power) {
        if (m_ < 1) throw std::invalid_argument("power must be >= 1");
        T_ = base_->horizon() / m_;
        if (T_ < 64) throw std::invalid_argument("base horizon too short for power");
    }

    std::size_t size() const override { return base_->size(); }
    std::uint64_t horizon() const override { return T_; }
    double pair_floor(std::size_t i, std::size_t j) const override {
        return base_->pair_floor(i, j);
    }

    void pair_indicator(std::size_t i, std::size_t j, double delta,
                        std::uint64_t* words) const override {
        thread_local std::vector<std::uint64_t> scratch;
        std::size_t base_nw = words_for_bits(base_->horizon());
        scratch.assign(base_nw, 0);
        base_->pair_indicator(i, j, delta, scratch.data());
        std::size_t nw = words_for_bits(T_);
        std::memset(words, 0, nw * 8);
        for (std::uint64_t k = 0; k < T_; ++k) {
            std::uint64_t src = k * m_;
            if ((scratch[src / 64] >> (src % 64)) & 1ULL) words[k / 64] |= 1ULL << (k % 64);
        }
    }

private:
    std::shared_ptr<Ensemble> base_;
    unsigned m_;
    std::uint64_t T_;
};

}  // namespace amorph
