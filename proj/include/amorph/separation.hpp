#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "amorph/ensemble.hpp"

namespace amorph {

// Pairwise separation-frequency estimates at one delta.  Symmetric,
// zero diagonal, entries in [0,1].  float storage: frequencies are
// multiples of 1/T with T <= 1e7.
class SeparationRecord {
public:
    SeparationRecord() = default;
    SeparationRecord(std::size_t M, double delta, std::uint64_t horizon,
                     EstimatorMode mode)
        : M_(M), delta_(delta), horizon_(horizon), mode_(mode),
          freq_(M * M, 0.0f) {}

    std::size_t size() const { return M_; }
    double delta() const { return delta_; }
    std::uint64_t horizon() const { return horizon_; }
    EstimatorMode mode() const { return mode_; }

    float frequency(std::size_t i, std::size_t j) const { return freq_[i * M_ + j]; }
    void set(std::size_t i, std::size_t j, float v) {
        freq_[i * M_ + j] = v;
        freq_[j * M_ + i] = v;
    }

private:
    std::size_t M_ = 0;
    double delta_ = 0.0;
    std::uint64_t horizon_ = 0;
    EstimatorMode mode_ = EstimatorMode::suffix_max;
    std::vector<float> freq_;
};

// Pair cells are independent tasks; each worker owns whole rows so
// writes never collide and results do not depend on the worker count.
inline SeparationRecord compute_record(const Ensemble& ens, double delta,
                                       EstimatorMode mode, std::size_t workers = 1) {
    std::size_t M = ens.size();
    SeparationRecord rec(M, delta, ens.horizon(), mode);
    auto row = [&](std::size_t i) {
        for (std::size_t j = 0; j < i; ++j)
            rec.set(i, j, (float)ens.pair_frequency(i, j, delta, mode));
    };
    if (workers <= 1 || M < 4) {
        for (std::size_t i = 1; i < M; ++i) row(i);
    } else {
        std::atomic<std::size_t> next{1};
        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= M) return;
                row(i);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rec;
}

using FreqFn = std::function<double(std::size_t, std::size_t)>;

// Greedy maximal packing: scan in ascending index order, keep a point
// iff its frequency to every kept point is >= nu (inclusive).
// Lower-bound witness for Sep on the sample.
inline std::vector<std::size_t> greedy_max_separated(
    const FreqFn& freq, std::size_t M, double nu,
    const std::vector<char>* mask = nullptr, std::size_t prefix = 0) {
    std::size_t limit = prefix == 0 ? M : std::min(prefix, M);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < limit; ++i) {
        if (mask && !(*mask)[i]) continue;
        bool ok = true;
        // most recently kept points reject soonest
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
            if (freq(i, *it) < nu) { ok = false; break; }
        }
        if (ok) kept.push_back(i);
    }
    return kept;
}

inline std::vector<std::size_t> max_separated_set(const SeparationRecord& rec, double nu,
                                                  const std::vector<char>* mask = nullptr,
                                                  std::size_t prefix = 0) {
    return greedy_max_separated(
        [&](std::size_t i, std::size_t j) { return (double)rec.frequency(i, j); },
        rec.size(), nu, mask, prefix);
}

// Greedy set cover: every sample point needs a representative with
// frequency < nu (strict).  Upper-bound witness for Span on the sample.
// Candidate coverage is kept in bitsets so each pick costs O(M^2/64).
inline std::vector<std::size_t> min_spanning_set(const SeparationRecord& rec, double nu,
                                                 const std::vector<char>* mask = nullptr,
                                                 std::size_t prefix = 0) {
    std::size_t M = prefix == 0 ? rec.size() : std::min(prefix, rec.size());
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < M; ++i)
        if (!mask || (*mask)[i]) active.push_back(i);
    std::size_t A = active.size();
    if (A == 0) return {};
    std::size_t nw = (A + 63) / 64;
    std::vector<std::uint64_t> cover(A * nw, 0), uncovered(nw, 0);
    for (std::size_t xi = 0; xi < A; ++xi) uncovered[xi / 64] |= 1ULL << (xi % 64);
    for (std::size_t yi = 0; yi < A; ++yi) {
        std::uint64_t* row = cover.data() + yi * nw;
        for (std::size_t xi = 0; xi < A; ++xi)
            if (xi == yi || rec.frequency(active[xi], active[yi]) < nu)
                row[xi / 64] |= 1ULL << (xi % 64);
    }
    std::vector<std::size_t> reps;
    std::size_t n_left = A;
    while (n_left > 0) {
        std::size_t best = A, best_gain = 0;
        for (std::size_t yi = 0; yi < A; ++yi) {
            const std::uint64_t* row = cover.data() + yi * nw;
            std::size_t gain = 0;
            for (std::size_t w = 0; w < nw; ++w) gain += std::popcount(row[w] & uncovered[w]);
            if (gain > best_gain) { best_gain = gain; best = yi; }
        }
        if (best == A) {
            // nu <= 0 degenerate: nothing covers anything, every point is
            // its own representative
            for (std::size_t xi = 0; xi < A; ++xi)
                if (uncovered[xi / 64] & (1ULL << (xi % 64))) reps.push_back(active[xi]);
            break;
        }
        reps.push_back(active[best]);
        const std::uint64_t* row = cover.data() + best * nw;
        n_left = 0;
        for (std::size_t w = 0; w < nw; ++w) {
            uncovered[w] &= ~row[w];
            n_left += std::popcount(uncovered[w]);
        }
    }
    return reps;
}

// Exhaustive maximum (f,delta,nu)-separated subset, for samples of at
// most 18 points: max clique over the >=nu pair graph.
inline std::size_t exact_max_separated(const SeparationRecord& rec, double nu,
                                       std::size_t prefix = 0) {
    std::size_t M = prefix == 0 ? rec.size() : std::min(prefix, rec.size());
    if (M > 18) throw std::invalid_argument("exact search capped at 18 points");
    std::vector<std::uint32_t> adj(M, 0);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            if (i != j && rec.frequency(i, j) >= nu) adj[i] |= 1u << j;
    std::size_t best = 0;
    std::uint32_t full = M == 32 ? ~0u : ((1u << M) - 1);
    // branch and bound on (clique so far, candidates)
    std::function<void(std::uint32_t, std::uint32_t)> grow = [&](std::uint32_t cur,
                                                                 std::uint32_t cand) {
        std::size_t cur_n = (std::size_t)std::popcount(cur);
        if (cur_n > best) best = cur_n;
        if (cur_n + (std::size_t)std::popcount(cand) <= best) return;
        while (cand) {
            if (cur_n + (std::size_t)std::popcount(cand) <= best) return;
            std::uint32_t v = cand & (~cand + 1);
            cand ^= v;
            int vi = std::countr_zero(v);
            grow(cur | v, cand & adj[(std::size_t)vi]);
        }
    };
    grow(0, full);
    return best;
}

// Exact minimum spanning (covering) cardinality by subset DP, <= 18 points.
inline std::size_t exact_min_span(const SeparationRecord& rec, double nu,
                                  std::size_t prefix = 0) {
    std::size_t M = prefix == 0 ? rec.size() : std::min(prefix, rec.size());
    if (M > 18) throw std::invalid_argument("exact search capped at 18 points");
    if (M == 0) return 0;
    std::vector<std::uint32_t> cover(M, 0);
    for (std::size_t y = 0; y < M; ++y)
        for (std::size_t x = 0; x < M; ++x)
            if (x == y || rec.frequency(x, y) < nu) cover[y] |= 1u << x;
    std::uint32_t full = (M == 32) ? ~0u : ((1u << M) - 1);
    std::vector<std::uint8_t> dp((std::size_t)full + 1, 0xff);
    dp[0] = 0;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        if (dp[mask] == 0xff) continue;
        // cover the lowest uncovered point
        std::uint32_t missing = full & ~mask;
        std::uint32_t lowest = missing & (~missing + 1);
        for (std::size_t y = 0; y < M; ++y) {
            if (!(cover[y] & lowest)) continue;
            std::uint32_t nm = mask | cover[y];
            if (dp[nm] > dp[mask] + 1) dp[nm] = dp[mask] + 1;
        }
    }
    return dp[full] == 0xff ? M : dp[full];
}

// Separation numbers restricted to E: the greedy packing over the
// E-filtered sample only.
inline std::vector<std::size_t> restricted_sep(const SeparationRecord& rec, double nu,
                                               const std::vector<char>& membership) {
    bool any = false;
    for (char c : membership)
        if (c) { any = true; break; }
    if (!any) return {};
    return max_separated_set(rec, nu, &membership);
}

// ---------------------------------------------------------------------------
// Record serialization: columns i, j, delta, frequency (plus a metric
// label for Besicovitch pseudo-metrics), reloadable for re-thresholding
// at many nu without re-simulation.

inline std::string record_to_csv(const SeparationRecord& rec,
                                 const std::string& metric = "") {
    std::string out = metric.empty() ? "i,j,delta,frequency\n"
                                     : "i,j,delta,frequency,metric\n";
    char buf[96];
    for (std::size_t i = 0; i < rec.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.12g,%.12g", i, j, rec.delta(),
                          (double)rec.frequency(i, j));
            out += buf;
            if (!metric.empty()) out += "," + metric;
            out += "\n";
        }
    return out;
}

inline SeparationRecord record_from_csv(const std::string& csv) {
    std::size_t max_index = 0;
    double delta = 0.0;
    struct Cell { std::size_t i, j; float f; };
    std::vector<Cell> cells;
    std::size_t pos = 0;
    bool header_done = false;
    while (pos < csv.size()) {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string::npos) eol = csv.size();
        std::string line = csv.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line[0] == '#') continue;
        if (!header_done) {
            if (line.rfind("i,j,", 0) != 0)
                throw std::invalid_argument("record CSV must start with i,j,...");
            header_done = true;
            continue;
        }
        Cell c;
        char metric[64] = {0};
        double d = 0, f = 0;
        if (std::sscanf(line.c_str(), "%zu,%zu,%lf,%lf,%63s", &c.i, &c.j, &d, &f, metric) < 4)
            throw std::invalid_argument("malformed record row: " + line);
        delta = d;
        c.f = (float)f;
        max_index = std::max({max_index, c.i, c.j});
        cells.push_back(c);
    }
    SeparationRecord rec(max_index + 1, delta, 0, EstimatorMode::suffix_max);
    for (const auto& c : cells) rec.set(c.i, c.j, c.f);
    return rec;
}

// ---------------------------------------------------------------------------
// Direct (non-ensemble) counting for the public contract ops.

// lockstep orbit iteration oracle; steps both points with the runtime map
class LockstepCounter {
public:
    using StepFn = std::function<Point(const Point&)>;
    using MetricFn = std::function<double(const Point&, const Point&)>;

    LockstepCounter(StepFn step, MetricFn metric)
        : step_(std::move(step)), metric_(std::move(metric)) {}

    std::uint64_t sep_count(Point x, Point y, double delta, std::uint64_t n) const {
        std::uint64_t s = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            if (metric_(x, y) >= delta) ++s;
            x = step_(x);
            y = step_(y);
        }
        return s;
    }

    double sep_frequency(Point x, Point y, double delta, std::uint64_t T,
                         EstimatorMode mode) const {
        if (T < 64) throw std::invalid_argument("horizon must be >= 64");
        auto cps = frequency_checkpoints(T);
        if (mode == EstimatorMode::terminal) { cps.clear(); cps.push_back(T); }
        double best = 0.0;
        std::uint64_t s = 0, k = 0;
        for (std::uint64_t cp : cps) {
            for (; k < cp; ++k) {
                if (metric_(x, y) >= delta) ++s;
                x = step_(x);
                y = step_(y);
            }
            double f = (double)s / (double)cp;
            if (f > best) best = f;
        }
        return mode == EstimatorMode::terminal ? (double)s / (double)T : best;
    }

private:
    StepFn step_;
    MetricFn metric_;
};

}  // namespace amorph
