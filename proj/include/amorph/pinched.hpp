#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "amorph/ensemble.hpp"
#include "amorph/scaling.hpp"
#include "amorph/systems.hpp"

namespace amorph {

// Iterated boundary lines phi_n(theta) = f^n_{theta - n omega}(1) of the
// pinched skew product, sampled on a theta grid.  The grid is offset by
// an irrational shift; tau_k = k omega are inserted exactly so the
// pinched zeros are hit bit-exactly.
struct BoundaryLineGrid {
    double alpha = 3.0;
    double eps = 0.0;
    Fixed128 omega;
    std::size_t G = 0;       // uniform grid size
    unsigned depth = 0;      // N
    std::size_t tau_count = 0;

    std::vector<Fixed128> theta_fx;  // uniform grid then tau_1..tau_tau_count
    std::vector<double> theta;
    // values[n-1][i] = phi_n(theta_i); phi_0 == 1 is implicit
    std::vector<std::vector<double>> values;

    const std::vector<double>& line(unsigned n) const { return values.at(n - 1); }
};

inline double boundary_phi_n(double alpha, double eps, Fixed128 omega, Fixed128 theta,
                             unsigned n) {
    Fixed128 angle = theta - omega.times(n);
    double x = 1.0;
    for (unsigned j = 0; j < n; ++j) {
        x = pinched_fibre(alpha, eps, angle.to_double(), x);
        angle += omega;
    }
    return x;
}

inline BoundaryLineGrid boundary_lines(double alpha, double eps, Fixed128 omega,
                                       std::size_t G, unsigned depth,
                                       std::size_t tau_insertions = 30) {
    if (G < 1) throw std::invalid_argument("grid size must be >= 1");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    BoundaryLineGrid grid;
    grid.alpha = alpha;
    grid.eps = eps;
    grid.omega = omega;
    grid.G = G;
    grid.depth = depth;
    grid.tau_count = tau_insertions;
    Fixed128 offset((unsigned __int128)(Fixed128::sqrt2_half().raw() / (G * 4)));
    for (std::size_t i = 0; i < G; ++i)
        grid.theta_fx.push_back(Fixed128::from_fraction(i, G) + offset);
    for (std::size_t k = 1; k <= tau_insertions; ++k)
        grid.theta_fx.push_back(omega.times(k));
    for (auto fx : grid.theta_fx) grid.theta.push_back(fx.to_double());

    grid.values.assign(depth, std::vector<double>(grid.theta_fx.size(), 0.0));
    for (std::size_t i = 0; i < grid.theta_fx.size(); ++i) {
        // shared angle chain: phi_n for all n <= depth at this theta
        // costs one pass per n
        for (unsigned n = 1; n <= depth; ++n)
            grid.values[n - 1][i] = boundary_phi_n(alpha, eps, omega, grid.theta_fx[i], n);
    }
    return grid;
}

// Largest pointwise change between consecutive boundary lines over the
// uniform grid, ignoring the worst `ignore_quantile` fraction (the
// freshly pinched neighbourhoods).
inline double offpeak_change(const BoundaryLineGrid& grid, unsigned n,
                             double ignore_quantile = 0.02) {
    const auto& a = grid.line(n);
    const auto& b = grid.line(n - 1);
    std::vector<double> diff;
    for (std::size_t i = 0; i < grid.G; ++i) diff.push_back(std::fabs(a[i] - b[i]));
    std::sort(diff.begin(), diff.end());
    std::size_t idx = (std::size_t)((double)(diff.size() - 1) * (1.0 - ignore_quantile));
    return diff[idx];
}

enum class AttractorClass { sna, continuous, undecided };

struct SnaVerdict {
    AttractorClass cls = AttractorClass::undecided;
    bool zero_graph = false;   // global attractor is the zero line
    double upper_quantile = 0.0;
    double grid_min = 0.0;
    double convergence = 0.0;  // off-peak change at the last level
};

struct SnaThresholds {
    double positive = 0.05;   // essential height of a nontrivial graph
    double zero = 1e-4;       // a dip below this counts as a pinch
    double convergence = 5e-3;
};

// SNA iff the graph is essentially positive yet dips to zero; continuous
// iff it stays away from zero (or collapsed entirely to the zero line).
inline SnaVerdict sna_detect(const BoundaryLineGrid& grid,
                             SnaThresholds thr = SnaThresholds{}) {
    SnaVerdict v;
    unsigned N = grid.depth;
    const auto& top = grid.line(N);
    std::vector<double> uniform(top.begin(), top.begin() + (std::ptrdiff_t)grid.G);
    std::vector<double> sorted = uniform;
    std::sort(sorted.begin(), sorted.end());
    v.upper_quantile = sorted[(std::size_t)((double)(sorted.size() - 1) * 0.9)];
    v.grid_min = *std::min_element(top.begin(), top.end());
    if (N >= 6) {
        double worst = 0.0;
        for (unsigned n = N - 4; n <= N; ++n)
            worst = std::max(worst, offpeak_change(grid, n));
        v.convergence = worst;
        if (worst >= thr.convergence) {
            v.cls = AttractorClass::undecided;
            return v;
        }
    }
    if (v.upper_quantile < thr.positive) {
        v.cls = AttractorClass::continuous;
        v.zero_graph = true;
    } else if (v.grid_min < thr.zero) {
        v.cls = AttractorClass::sna;
    } else {
        v.cls = AttractorClass::continuous;
    }
    return v;
}

// Birkhoff average of log |d_x f_theta(0)| = log(alpha (sin(pi theta)+eps))
// along the rotation orbit; log singularities are clipped at the floor.
inline double lyapunov_zero_line(double alpha, double eps, Fixed128 omega,
                                 std::uint64_t T, double floor_value = 1e-300) {
    if (T < 10000) throw std::invalid_argument("horizon must be >= 1e4");
    Fixed128 theta((unsigned __int128)(Fixed128::sqrt2_half().raw() / 7));
    double sum = 0.0, comp = 0.0;  // Kahan
    for (std::uint64_t k = 0; k < T; ++k) {
        double s = std::sin(M_PI * theta.to_double()) + eps;
        if (s < floor_value) s = floor_value;
        double term = std::log(alpha * s) - comp;
        double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
        theta += omega;
    }
    return sum / (double)T;
}

// ---------------------------------------------------------------------------
// Peak census

struct PeakConstants {
    double a = 32.0;
    double b = 0.02;
    unsigned m = 31;
    double gamma = 2.5;
    double L0 = 0.9;
    double dioph_c = 0.38;  // d(n omega, 0) >= c n^-d
    double dioph_d = 1.0;
};

struct PeakCensus {
    PeakConstants consts;
    std::vector<std::uint64_t> fresh;        // indices n_1 < n_2 < ...
    std::vector<double> density;             // j / n_j
    std::vector<std::string> soft_violations;  // sampled or arithmetic checks
};

inline double peak_radius(const PeakConstants& c, std::uint64_t n) {
    return c.b / 2.0 * std::pow(c.a, -((double)n - 1.0) / (double)c.m);
}

// Checks of the imported constants; the two b-inequalities are hard
// preconditions, the rest are reported.
inline std::vector<std::string> validate_peak_constants(const PeakConstants& c,
                                                        Fixed128 omega, double alpha,
                                                        double eps) {
    std::vector<std::string> soft;
    if (c.b > c.dioph_c)
        throw std::invalid_argument("peak constants: b <= c violated");
    Fixed128 t;
    for (std::uint64_t n = 1; n < c.m; ++n) {
        t += omega;
        double d = Fixed128::arc_distance(t, Fixed128());
        if (c.b >= d)
            throw std::invalid_argument(
                "peak constants: b < d(n omega, 0) violated at n=" + std::to_string(n));
    }
    if ((double)c.m < 22.0 * (1.0 + 1.0 / c.gamma))
        soft.push_back("m >= 22(1+1/gamma)");
    if (c.a < std::pow((double)c.m + 1.0, c.dioph_d))
        soft.push_back("a >= (m+1)^d");
    // Diophantine constant, sampled
    t = Fixed128();
    for (std::uint64_t n = 1; n <= 100000; ++n) {
        t += omega;
        double d = Fixed128::arc_distance(t, Fixed128());
        if (d < c.dioph_c * std::pow((double)n, -c.dioph_d)) {
            soft.push_back("d(n omega,0) >= c n^-d (sampled)");
            break;
        }
    }
    if (alpha > 0.0) {
        // contraction on [L0, 1], sampled over theta and x
        double target = std::pow(alpha, -c.gamma);
        double worst = 0.0;
        for (int ti = 0; ti <= 64; ++ti) {
            double theta = (double)ti / 64.0;
            double mult = std::fabs(std::sin(M_PI * theta)) + eps;
            for (int xi = 0; xi <= 64; ++xi) {
                double x = c.L0 + (1.0 - c.L0) * (double)xi / 64.0;
                double deriv = alpha / std::pow(std::cosh(alpha * x), 2.0) * mult;
                worst = std::max(worst, deriv);
            }
        }
        if (worst > target) soft.push_back("|f_theta(x)-f_theta(y)| <= alpha^-gamma |x-y| on [L0,1] (sampled)");
        // reference system bound, sampled
        bool ref_ok = true;
        for (int ti = 1; ti < 128 && ref_ok; ++ti) {
            double theta = (double)ti / 128.0;
            double dtheta = std::min(theta, 1.0 - theta);
            for (int xi = 1; xi <= 128; ++xi) {
                double x = (double)xi / 128.0;
                double lhs = std::tanh(alpha * x) * (std::sin(M_PI * theta) + eps);
                double rhs = std::min(c.L0, c.a * x) * std::min(1.0, 2.0 * dtheta / c.b);
                if (lhs < rhs) { ref_ok = false; break; }
            }
        }
        if (!ref_ok)
            soft.push_back("f_theta(x) >= min{L0,ax} min{1,2d(theta,0)/b} (sampled)");
    }
    return soft;
}

// Fresh peaks: B_{2 r_j}(tau_j) disjoint from every earlier B_{r_l}(tau_l).
inline PeakCensus peak_census(Fixed128 omega, const PeakConstants& consts,
                              std::uint64_t N, double alpha = 0.0, double eps = 0.0) {
    PeakCensus census;
    census.consts = consts;
    census.soft_violations = validate_peak_constants(consts, omega, alpha, eps);
    std::vector<double> tau;   // tau_n as doubles, n = 1..N
    std::vector<double> rad;
    tau.reserve(N);
    Fixed128 t;
    for (std::uint64_t n = 1; n <= N; ++n) {
        t += omega;
        tau.push_back(t.to_double());
        rad.push_back(peak_radius(consts, n));
    }
    std::vector<std::uint64_t> fresh_idx;
    for (std::uint64_t j = 1; j <= N; ++j) {
        double rj = rad[j - 1];
        bool fresh = true;
        for (std::uint64_t l = 1; l < j; ++l) {
            double d = std::fabs(tau[j - 1] - tau[l - 1]);
            d = std::min(d, 1.0 - d);
            if (d < 2.0 * rj + rad[l - 1]) { fresh = false; break; }
        }
        if (fresh) {
            fresh_idx.push_back(j);
            census.density.push_back((double)fresh_idx.size() / (double)j);
        }
    }
    census.fresh = std::move(fresh_idx);
    return census;
}

// ---------------------------------------------------------------------------
// Restricted separation over the invariant-graph sample

struct GraphExponentResult {
    ScalingEstimate estimate;
    std::vector<SweepRow> rows;
    SnaVerdict verdict;
    unsigned depth_used = 0;
    std::size_t sample_size = 0;
    // liminf surrogate at the small-nu end: minimal local slope over the
    // last four usable cells of the best delta.  An attractor with dips at
    // every scale keeps this positive; a continuous curve plateaus to ~0.
    double tail_lower = 0.0;
};

// Sample (theta_i, phi_N(theta_i)) on a theta grid avoiding the largest
// peak neighbourhoods, then sweep and fit the restricted separation
// exponent.
inline GraphExponentResult graph_separation_exponent(
    double alpha, double eps, Fixed128 omega, std::size_t grid_size, std::uint64_t T,
    const std::vector<double>& deltas, const std::vector<double>& nus,
    std::size_t peak_avoid = 16, const PeakConstants& consts = PeakConstants{},
    std::size_t workers = 1) {
    GraphExponentResult out;
    std::size_t G = std::max<std::size_t>(256, grid_size);
    // depth by the off-peak Cauchy criterion
    unsigned depth = 25;
    BoundaryLineGrid grid = boundary_lines(alpha, eps, omega, G, depth);
    while (depth < 60 && offpeak_change(grid, depth) > 1e-9) {
        depth += 10;
        grid = boundary_lines(alpha, eps, omega, G, depth);
    }
    out.depth_used = depth;
    out.verdict = sna_detect(grid);

    // theta sample avoiding the q largest peak balls
    std::vector<double> tau;
    std::vector<double> rad;
    Fixed128 t;
    for (std::size_t j = 1; j <= peak_avoid; ++j) {
        t += omega;
        tau.push_back(t.to_double());
        rad.push_back(peak_radius(consts, j));
    }
    SystemSpec spec;
    spec.kind = SystemKind::pinched;
    Param pa; pa.value = alpha; pa.text = "";
    spec.params["alpha"] = pa;
    Param pe; pe.value = eps;
    spec.params["eps"] = pe;
    Param po; po.circle = omega; po.value = omega.to_double();
    spec.params["omega"] = po;

    std::vector<Point> pts;
    for (std::size_t i = 0; i < grid.G; ++i) {
        double theta = grid.theta[i];
        bool avoid = false;
        for (std::size_t j = 0; j < tau.size(); ++j) {
            double d = std::fabs(theta - tau[j]);
            d = std::min(d, 1.0 - d);
            if (d < rad[j]) { avoid = true; break; }
        }
        if (avoid) continue;
        pts.push_back(Point{{theta, grid.line(depth)[i]}});
    }
    out.sample_size = pts.size();
    ContinuousEnsemble ens(spec, std::move(pts), T, workers);
    SweepPlan plan;
    plan.deltas = deltas;
    plan.nus = nus;
    plan.m_list = {ens.size() / 4, ens.size() / 2, ens.size()};
    plan.workers = workers;
    out.rows = sweep(ens, plan);
    out.estimate = fit_exponent(out.rows);
    // tail liminf: best (largest) value over deltas of the min local slope
    // among the last four usable cells
    bool first = true;
    for (double delta : deltas) {
        std::vector<std::pair<double, std::size_t>> cells;  // (nu, sep), nu descending
        for (const auto& r : out.rows)
            if (r.samples == out.sample_size && r.delta == delta && !r.capped && r.sep > 0)
                cells.emplace_back(r.nu, r.sep);
        if (cells.size() < 4) continue;
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = cells.size() - 3; i < cells.size(); ++i) {
            double run = std::log(cells[i - 1].first / cells[i].first);
            if (run <= 0) continue;
            double s = std::log((double)cells[i].second / (double)cells[i - 1].second) / run;
            mn = std::min(mn, s);
        }
        if (first || mn > out.tail_lower) {
            out.tail_lower = mn;
            first = false;
        }
    }
    return out;
}

}  // namespace amorph
