#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amorph/separation.hpp"

namespace amorph {

struct SweepPlan {
    std::vector<double> deltas;      // strictly descending
    std::vector<double> nus;         // strictly descending
    std::vector<std::size_t> m_list; // increasing sample sizes
    std::uint64_t horizon = 1 << 14;
    std::uint64_t seed = 1;
    EstimatorMode mode = EstimatorMode::suffix_max;
    std::size_t workers = 1;

    void validate() const {
        if (deltas.empty() || nus.empty() || m_list.empty())
            throw std::invalid_argument("sweep plan needs deltas, nus and sample sizes");
        for (std::size_t i = 1; i < deltas.size(); ++i)
            if (deltas[i] >= deltas[i - 1])
                throw std::invalid_argument("delta grid must be strictly descending");
        for (std::size_t i = 1; i < nus.size(); ++i)
            if (nus[i] >= nus[i - 1])
                throw std::invalid_argument("nu grid must be strictly descending");
        for (std::size_t i = 1; i < m_list.size(); ++i)
            if (m_list[i] <= m_list[i - 1])
                throw std::invalid_argument("sample sizes must be increasing");
        if (nus.size() < 4)
            throw std::invalid_argument("need at least 4 nu points for regression");
    }
};

struct SweepRow {
    double delta = 0.0;
    double nu = 0.0;
    std::size_t samples = 0;
    std::uint64_t horizon = 0;
    std::size_t sep = 0;
    std::size_t span = 0;
    bool capped = false;     // sep_est reached the sample size: censored in fits
    bool grew = false;       // > 10% growth under the last sample doubling
    bool saturated = false;  // diagnostic column: capped || grew
};

// One pair-frequency record per delta at the largest sample size; rows for
// smaller M come from prefix subsamples of the same record, so the growth
// diagnostics share a single matrix pass.
inline std::vector<SweepRow> sweep(const Ensemble& ens, const SweepPlan& plan) {
    plan.validate();
    std::size_t m_max = plan.m_list.back();
    if (m_max > ens.size())
        throw std::invalid_argument("plan sample size exceeds ensemble size");
    std::vector<SweepRow> rows;
    for (double delta : plan.deltas) {
        SeparationRecord rec = compute_record(ens, delta, plan.mode, plan.workers);
        // sep at every (M, nu)
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> sep_at;
        for (std::size_t mi = 0; mi < plan.m_list.size(); ++mi) {
            std::size_t M = plan.m_list[mi];
            for (std::size_t ni = 0; ni < plan.nus.size(); ++ni) {
                sep_at[{mi, ni}] = max_separated_set(rec, plan.nus[ni], nullptr, M).size();
            }
        }
        std::size_t mi_last = plan.m_list.size() - 1;
        for (std::size_t mi = 0; mi < plan.m_list.size(); ++mi) {
            std::size_t M = plan.m_list[mi];
            for (std::size_t ni = 0; ni < plan.nus.size(); ++ni) {
                SweepRow r;
                r.delta = delta;
                r.nu = plan.nus[ni];
                r.samples = M;
                r.horizon = ens.horizon();
                r.sep = sep_at[{mi, ni}];
                r.span = min_spanning_set(rec, plan.nus[ni], nullptr, M).size();
                if (mi == mi_last && mi > 0) {
                    std::size_t prev = sep_at[{mi - 1, ni}];
                    r.grew = prev > 0 && (double)r.sep > 1.10 * (double)prev;
                }
                r.capped = r.sep >= M;
                r.saturated = r.grew || r.capped;
                rows.push_back(r);
            }
        }
    }
    return rows;
}

struct LeastSquares {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    std::size_t n = 0;
};

inline LeastSquares least_squares(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
    LeastSquares out;
    out.n = xs.size();
    if (xs.size() < 2) return out;
    double n = (double)xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0) return out;
    out.slope = (n * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (out.slope * xs[i] + out.intercept);
        ss_res += r * r;
    }
    out.r2 = ss_tot <= 1e-12 ? 1.0 : 1.0 - ss_res / ss_tot;
    return out;
}

struct DeltaFit {
    double delta = 0.0;
    LeastSquares fit;
    std::vector<double> local_slopes;
    double lower = 0.0;   // min local slope on the stable window
    double upper = 0.0;   // max local slope
    std::size_t usable = 0;
    std::size_t dropped_saturated = 0;
    std::size_t dropped_monotone = 0;
};

struct ScalingEstimate {
    std::vector<DeltaFit> per_delta;
    double slope = 0.0;          // sup over deltas of the per-delta slope
    double lower = 0.0;          // min stable local slope at the arg-sup delta
    double upper = 0.0;
    double r2 = 0.0;             // at the arg-sup delta
    bool bounded = false;        // slope ~ 0 everywhere
    bool saturated_by_sample = false;
    bool infinite_suspected = false;
};

// Least-squares of log sep against -log nu per delta over the largest
// non-saturated nu window; cells with sep == sample size measure the
// sample and are censored, as are cells breaking monotonicity by more
// than one greedy unit.
inline ScalingEstimate fit_exponent(const std::vector<SweepRow>& rows_all) {
    // keep only rows at the largest sample size
    std::size_t m_max = 0;
    for (const auto& r : rows_all) m_max = std::max(m_max, r.samples);
    std::map<double, std::vector<SweepRow>, std::greater<double>> by_delta;
    for (const auto& r : rows_all)
        if (r.samples == m_max) by_delta[r.delta].push_back(r);

    ScalingEstimate est;
    bool any_usable = false;
    for (auto& [delta, rows] : by_delta) {
        std::sort(rows.begin(), rows.end(),
                  [](const SweepRow& a, const SweepRow& b) { return a.nu > b.nu; });
        DeltaFit df;
        df.delta = delta;
        std::vector<double> xs, ys;
        std::size_t best_prev = 0;
        for (const auto& r : rows) {
            if (r.capped) {
                ++df.dropped_saturated;
                continue;
            }
            if (r.sep == 0) continue;
            // monotonicity repair: sep may not drop by more than one
            // greedy-discreteness unit as nu decreases
            if (!xs.empty() && r.sep + 1 < best_prev) {
                ++df.dropped_monotone;
                continue;
            }
            best_prev = std::max(best_prev, r.sep);
            xs.push_back(-std::log((double)r.nu));
            ys.push_back(std::log((double)r.sep));
        }
        df.usable = xs.size();
        if (xs.size() >= 2) {
            df.fit = least_squares(xs, ys);
            for (std::size_t i = 1; i < xs.size(); ++i) {
                double dx = xs[i] - xs[i - 1];
                if (dx > 0) df.local_slopes.push_back((ys[i] - ys[i - 1]) / dx);
            }
            if (!df.local_slopes.empty()) {
                df.lower = *std::min_element(df.local_slopes.begin(), df.local_slopes.end());
                df.upper = *std::max_element(df.local_slopes.begin(), df.local_slopes.end());
            }
            any_usable = true;
        }
        est.per_delta.push_back(df);
    }
    if (!any_usable) {
        est.infinite_suspected = true;
        return est;
    }
    bool first = true;
    for (const auto& df : est.per_delta) {
        if (df.usable < 2) continue;
        if (first || df.fit.slope > est.slope) {
            est.slope = df.fit.slope;
            est.lower = df.lower;
            est.upper = df.upper;
            est.r2 = df.fit.r2;
            first = false;
        }
    }
    est.bounded = est.slope <= 0.05;
    for (const auto& df : est.per_delta)
        if (df.dropped_saturated > 0) est.saturated_by_sample = true;
    for (const auto& r : rows_all)
        if (r.samples == m_max && r.grew) est.saturated_by_sample = true;
    return est;
}

struct SaturationProbe {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> counts;
    bool infinite_suspected = false;
};

// Growth of the separated-set estimate across sample sizes; the flag is
// set when the final doubling still grows the estimate by > 10%.
inline SaturationProbe saturation_probe(const Ensemble& ens, double delta, double nu,
                                        const std::vector<std::size_t>& m_list,
                                        EstimatorMode mode) {
    if (m_list.size() < 3) throw std::invalid_argument("need at least 3 sample sizes");
    SaturationProbe probe;
    auto freq = [&](std::size_t i, std::size_t j) {
        return ens.pair_frequency(i, j, delta, mode);
    };
    for (std::size_t M : m_list) {
        if (M > ens.size()) throw std::invalid_argument("probe size exceeds ensemble");
        probe.sizes.push_back(M);
        probe.counts.push_back(greedy_max_separated(freq, ens.size(), nu, nullptr, M).size());
    }
    std::size_t last = probe.counts.back();
    std::size_t prev = probe.counts[probe.counts.size() - 2];
    probe.infinite_suspected = prev > 0 && (double)last > 1.10 * (double)prev;
    return probe;
}

struct PowerEntropyEstimate {
    std::vector<std::uint64_t> n_grid;
    std::vector<std::size_t> counts;
    LeastSquares fit;  // log count vs log n
};

// Bowen-Dinaburg greedy separated sets: d_n(x,y) >= delta iff the
// separation indicator has a set bit below n, i.e. iff the first
// separation time is < n.
inline PowerEntropyEstimate power_entropy_est(const Ensemble& ens, double delta,
                                              const std::vector<std::uint64_t>& n_grid) {
    if (n_grid.size() < 4) throw std::invalid_argument("need >= 4 n values");
    std::size_t M = ens.size();
    std::uint64_t T = ens.horizon();
    // first separation time per pair (T when never separated)
    std::vector<std::uint64_t> first(M * M, T);
    thread_local std::vector<std::uint64_t> scratch;
    std::size_t nw = words_for_bits(T);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            std::uint64_t f = T;
            if (ens.pair_floor(i, j) >= delta) {
                f = 0;
            } else {
                scratch.assign(nw, 0);
                ens.pair_indicator(i, j, delta, scratch.data());
                for (std::size_t w = 0; w < nw; ++w)
                    if (scratch[w]) {
                        f = 64 * w + (std::uint64_t)std::countr_zero(scratch[w]);
                        break;
                    }
            }
            first[i * M + j] = f;
            first[j * M + i] = f;
        }
    }
    PowerEntropyEstimate out;
    std::vector<double> xs, ys;
    for (std::uint64_t n : n_grid) {
        if (n > T) throw std::invalid_argument("Bowen horizon beyond ensemble horizon");
        auto kept = greedy_max_separated(
            [&](std::size_t i, std::size_t j) {
                return first[i * M + j] < n ? 1.0 : 0.0;
            },
            M, 0.5);
        out.n_grid.push_back(n);
        out.counts.push_back(kept.size());
        if (!kept.empty()) {
            xs.push_back(std::log((double)n));
            ys.push_back(std::log((double)kept.size()));
        }
    }
    out.fit = least_squares(xs, ys);
    return out;
}

}  // namespace amorph
