#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "amorph/scaling.hpp"
#include "amorph/sequences.hpp"

namespace amorph {

// Pseudo-metric d~_delta on sequence space: frequency of k such that the
// sequences differ somewhere in the window [k, k+w], delta = 2^-w.
// Suffix-max surrogate of the limsup, horizon-aligned with the
// separation estimators so the Sep = M_nu identity is exact.
inline double besicovitch_distance(const Sequence& x, const Sequence& y, double delta,
                                   std::uint64_t T,
                                   EstimatorMode mode = EstimatorMode::suffix_max) {
    if (T < 64) throw std::invalid_argument("horizon must be >= 64");
    int w = SymbolicEnsemble::window_for_delta(delta);
    if (w < 0) return 0.0;
    std::vector<std::uint8_t> bx((std::size_t)(T + w)), by((std::size_t)(T + w));
    x.fill(0, (std::size_t)(T + w), bx.data());
    y.fill(0, (std::size_t)(T + w), by.data());
    auto cps = frequency_checkpoints(T);
    if (mode == EstimatorMode::terminal) { cps.clear(); cps.push_back(T); }
    // running count of mismatches inside the sliding window
    double best = 0.0;
    std::uint64_t s = 0, k = 0;
    int live = 0;
    for (std::uint64_t t = 0; t < (std::uint64_t)w; ++t)
        if (bx[t] != by[t]) ++live;
    for (std::uint64_t cp : cps) {
        for (; k < cp; ++k) {
            if (bx[k + w] != by[k + w]) ++live;
            if (live > 0) ++s;
            if (bx[k] != by[k]) --live;
        }
        double f = (double)s / (double)cp;
        if (f > best) best = f;
    }
    return best;
}

// Pairwise pseudo-distance matrix for the first M shifts of a generator.
inline std::vector<double> besicovitch_matrix(const Sequence& gen, std::size_t M,
                                              double delta, std::uint64_t T,
                                              EstimatorMode mode = EstimatorMode::suffix_max) {
    SymbolicEnsemble ens(gen, M, T);
    std::vector<double> d(M * M, 0.0);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            double v = ens.pair_frequency(i, j, delta, mode);
            d[i * M + j] = v;
            d[j * M + i] = v;
        }
    return d;
}

using DistFn = std::function<double(std::size_t, std::size_t)>;

// greedy packing: maximal eps-separated subset, first-fit in index order
inline std::size_t packing_count(const DistFn& dist, std::size_t M, double eps) {
    return greedy_max_separated(dist, M, eps).size();
}

// greedy covering: number of eps-balls needed so every point is within
// (strictly below) eps of a representative
inline std::size_t covering_count(const DistFn& dist, std::size_t M, double eps) {
    std::vector<char> covered(M, 0);
    std::size_t n = 0, reps = 0;
    while (n < M) {
        std::size_t best = M, gain_best = 0;
        for (std::size_t y = 0; y < M; ++y) {
            std::size_t gain = 0;
            for (std::size_t x = 0; x < M; ++x)
                if (!covered[x] && (x == y || dist(x, y) < eps)) ++gain;
            if (gain > gain_best) { gain_best = gain; best = y; }
        }
        if (best == M) break;
        ++reps;
        for (std::size_t x = 0; x < M; ++x)
            if (!covered[x] && (x == best || dist(x, best) < eps)) {
                covered[x] = 1;
                ++n;
            }
    }
    return reps;
}

enum class BoxMode { packing, covering };

struct BoxDimension {
    std::vector<double> eps_grid;
    std::vector<std::size_t> counts;
    LeastSquares fit;  // log count vs -log eps
    double lower = 0.0, upper = 0.0;
};

inline BoxDimension box_dimension(const DistFn& dist, std::size_t M,
                                  const std::vector<double>& eps_grid, BoxMode mode) {
    if (eps_grid.size() < 4) throw std::invalid_argument("need >= 4 eps values");
    BoxDimension out;
    std::vector<double> xs, ys;
    for (double eps : eps_grid) {
        std::size_t c = mode == BoxMode::packing ? packing_count(dist, M, eps)
                                                 : covering_count(dist, M, eps);
        out.eps_grid.push_back(eps);
        out.counts.push_back(c);
        if (c > 0) {
            xs.push_back(-std::log(eps));
            ys.push_back(std::log((double)c));
        }
    }
    out.fit = least_squares(xs, ys);
    std::vector<double> locals;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1]) locals.push_back((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
    if (!locals.empty()) {
        out.lower = *std::min_element(locals.begin(), locals.end());
        out.upper = *std::max_element(locals.begin(), locals.end());
    }
    return out;
}

struct BoundednessProbe {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> counts;
    bool not_totally_bounded = false;
};

// Packing growth across orbit sample sizes: unbounded growth of the
// eps-packing count flags a not-totally-bounded Besicovitch projection.
inline BoundednessProbe total_boundedness_probe(const Sequence& gen, double eps,
                                                const std::vector<std::size_t>& m_list,
                                                std::uint64_t T,
                                                EstimatorMode mode = EstimatorMode::suffix_max) {
    if (m_list.size() < 3) throw std::invalid_argument("need at least 3 sample sizes");
    BoundednessProbe probe;
    SymbolicEnsemble ens(gen, m_list.back(), T);
    auto dist = [&](std::size_t i, std::size_t j) {
        return ens.pair_frequency(i, j, 1.0, mode);
    };
    for (std::size_t M : m_list) {
        probe.sizes.push_back(M);
        probe.counts.push_back(greedy_max_separated(dist, ens.size(), eps, nullptr, M).size());
    }
    std::size_t last = probe.counts.back();
    std::size_t prev = probe.counts[probe.counts.size() - 2];
    probe.not_totally_bounded = prev > 0 && (double)last > 1.10 * (double)prev;
    return probe;
}

}  // namespace amorph
