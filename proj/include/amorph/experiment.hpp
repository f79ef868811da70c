#pragma once

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amorph/besicovitch.hpp"
#include "amorph/ensemble.hpp"
#include "amorph/io.hpp"
#include "amorph/rng.hpp"
#include "amorph/runtime.hpp"
#include "amorph/scaling.hpp"
#include "amorph/toeplitz.hpp"

namespace amorph {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t budget_cells() {
    if (const char* env = std::getenv("AMORPH_BUDGET_CELLS")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0) return (std::uint64_t)v;
    }
    return (std::uint64_t)4e13;
}

inline void check_budget(std::size_t M, std::uint64_t T, bool allow_large = false) {
    if (M > 4096 && !allow_large)
        throw BudgetError("sample size above the 4096 default cap (pass --force-samples)");
    double cells = (double)M * (double)M * (double)T;
    if (cells > (double)budget_cells())
        throw BudgetError("M^2 T = " + format_g12(cells) + " exceeds AMORPH_BUDGET_CELLS");
}

// ---------------------------------------------------------------------------
// Systems as named on the command line: the continuous catalog plus the
// symbolic families (Sturmian coding, Toeplitz words, Thue-Morse,
// periodic blocks) and products mixing the two worlds.

enum class ExpType { continuous, sturmian, toeplitz, thue_morse, periodic, product };

struct ExperimentSystem {
    ExpType type = ExpType::continuous;
    std::string text;

    SystemSpec spec;  // continuous
    Fixed128 alpha, x0;              // sturmian
    std::string word;                // toeplitz template 0^m 1 v
    unsigned m = 0;
    std::string block;               // periodic
    std::vector<ExperimentSystem> children;

    bool symbolic() const {
        return type == ExpType::sturmian || type == ExpType::toeplitz ||
               type == ExpType::thue_morse || type == ExpType::periodic;
    }
};

inline Param parse_param_value(const std::string& tok) {
    detail::SpecParser p(tok);
    Param v = p.value();
    if (p.pos != tok.size()) throw ParseError("malformed value '" + tok + "'", p.pos);
    return v;
}

inline ExperimentSystem parse_experiment(const std::string& text);

namespace detail {

inline std::vector<std::string> split_top_level(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    for (const auto& part : split_top_level(s)) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value in '" + part + "'", 0);
        kv[part.substr(0, eq)] = part.substr(eq + 1);
    }
    return kv;
}

}  // namespace detail

inline ExperimentSystem parse_experiment(const std::string& text) {
    ExperimentSystem sys;
    sys.text = text;
    auto colon = text.find(':');
    std::string head = text.substr(0, colon == std::string::npos ? text.size() : colon);
    auto paren = head.find('(');
    if (paren != std::string::npos) head = head.substr(0, paren);

    if (head == "product") {
        auto open = text.find('(');
        auto close = text.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw ParseError("malformed product", 0);
        auto parts = detail::split_top_level(text.substr(open + 1, close - open - 1));
        if (parts.size() != 2) throw ParseError("product requires two children", open);
        ExperimentSystem a = parse_experiment(parts[0]);
        ExperimentSystem b = parse_experiment(parts[1]);
        if (a.type == ExpType::continuous && b.type == ExpType::continuous) {
            sys.type = ExpType::continuous;
            sys.spec = parse_spec(text);
            return sys;
        }
        sys.type = ExpType::product;
        sys.children = {std::move(a), std::move(b)};
        return sys;
    }
    if (head == "sturmian") {
        sys.type = ExpType::sturmian;
        sys.alpha = Fixed128::golden();
        if (colon != std::string::npos) {
            for (auto& [k, v] : detail::parse_kv(text.substr(colon + 1))) {
                if (k == "alpha") sys.alpha = parse_param_value(v).circle;
                else if (k == "x0") sys.x0 = parse_param_value(v).circle;
                else throw ParseError("unknown sturmian parameter '" + k + "'", 0);
            }
        }
        double a = sys.alpha.to_double();
        if (a <= 0.0 || a >= 1.0)
            throw std::invalid_argument("sturmian alpha must lie in (0,1)");
        return sys;
    }
    if (head == "toeplitz") {
        sys.type = ExpType::toeplitz;
        if (colon == std::string::npos)
            throw std::invalid_argument("toeplitz requires word=<template>,m=<int>");
        std::optional<std::string> word;
        std::optional<unsigned> m;
        for (auto& [k, v] : detail::parse_kv(text.substr(colon + 1))) {
            if (k == "word") word = v;
            else if (k == "m") m = (unsigned)std::stoul(v);
            else throw ParseError("unknown toeplitz parameter '" + k + "'", 0);
        }
        if (!word || !m) throw std::invalid_argument("toeplitz requires word= and m=");
        sys.word = *word;
        sys.m = *m;
        ToeplitzWord check(sys.word, sys.m);  // validates the shape
        return sys;
    }
    if (head == "thue_morse") {
        sys.type = ExpType::thue_morse;
        return sys;
    }
    if (head == "periodic") {
        sys.type = ExpType::periodic;
        if (colon == std::string::npos)
            throw std::invalid_argument("periodic requires block=<digits>");
        for (auto& [k, v] : detail::parse_kv(text.substr(colon + 1))) {
            if (k == "block") sys.block = v;
            else throw ParseError("unknown periodic parameter '" + k + "'", 0);
        }
        if (sys.block.empty()) throw std::invalid_argument("periodic block is empty");
        return sys;
    }
    sys.type = ExpType::continuous;
    sys.spec = parse_spec(text);
    return sys;
}

inline SequencePtr make_sequence(const ExperimentSystem& sys) {
    switch (sys.type) {
        case ExpType::sturmian:
            return std::make_shared<SturmianSequence>(sys.alpha, sys.x0);
        case ExpType::toeplitz:
            return std::make_shared<ToeplitzWord>(sys.word, sys.m);
        case ExpType::thue_morse:
            return std::make_shared<ThueMorseSequence>();
        case ExpType::periodic: {
            std::vector<std::uint8_t> block;
            for (char c : sys.block) block.push_back((std::uint8_t)(c - '0'));
            return std::make_shared<PeriodicSequence>(std::move(block));
        }
        default:
            throw std::invalid_argument("not a symbolic system");
    }
}

// ---------------------------------------------------------------------------
// Sampling plans.  1-D continuous systems take a uniform grid plus the
// same number of pseudorandom points; lattices expose the packing
// structure of rigid rotations, random points guard against grid
// artifacts.  The Denjoy sample is uniform in the factor coordinate, the
// invariant measure, so its image under the Cantor function is an
// equidistributed lattice.

inline std::vector<Point> continuous_sample(const SystemSpec& spec, std::size_t M,
                                            std::uint64_t seed,
                                            const DenjoyModel* denjoy = nullptr) {
    std::vector<Point> pts;
    std::size_t dims = phase_dim(spec);
    if (spec.kind == SystemKind::denjoy) {
        std::size_t half = M / 2;
        for (std::size_t i = 0; i < half; ++i)
            pts.push_back(Point{{denjoy->position_of_factor(
                Fixed128::from_fraction(i, half))}});
        for (std::size_t i = half; i < M; ++i)
            pts.push_back(Point{{denjoy->position_of_factor(
                Fixed128::from_double(task_uniform(seed, 17, i)))}});
        return pts;
    }
    if (dims == 1) {
        std::size_t half = M / 2;
        for (std::size_t i = 0; i < half; ++i)
            pts.push_back(Point{{(double)i / (double)half}});
        for (std::size_t i = half; i < M; ++i)
            pts.push_back(Point{{task_uniform(seed, 17, i)}});
        return pts;
    }
    // lattice + random fill for multi-dimensional phase spaces
    std::size_t g = (std::size_t)std::floor(std::pow((double)M / 2.0, 1.0 / (double)dims));
    if (g < 2) g = 2;
    std::vector<std::size_t> idx(dims, 0);
    for (;;) {
        Point p;
        for (std::size_t d = 0; d < dims; ++d)
            p.coords.push_back((double)idx[d] / (double)g);
        pts.push_back(std::move(p));
        std::size_t d = 0;
        while (d < dims && ++idx[d] == g) idx[d++] = 0;
        if (d == dims) break;
    }
    std::size_t r = 0;
    while (pts.size() < M) {
        Point p;
        for (std::size_t d = 0; d < dims; ++d)
            p.coords.push_back(task_uniform(seed, 23 + d, r));
        pts.push_back(std::move(p));
        ++r;
    }
    return pts;
}

struct BuiltEnsemble {
    std::shared_ptr<Ensemble> ensemble;
    std::shared_ptr<const DenjoyModel> denjoy;
    std::size_t sample_size = 0;
};

inline BuiltEnsemble build_ensemble(const ExperimentSystem& sys, std::size_t M,
                                    std::uint64_t T, std::uint64_t seed,
                                    std::size_t workers, unsigned stride = 1) {
    BuiltEnsemble out;
    if (sys.symbolic()) {
        auto gen = make_sequence(sys);
        out.ensemble = std::make_shared<SymbolicEnsemble>(*gen, M, T / stride, stride);
    } else if (sys.type == ExpType::product) {
        std::size_t child_m = (std::size_t)std::floor(std::sqrt((double)M));
        std::size_t ma = child_m, mb = child_m;
        // a rotation factor is an isometry: its packing saturates at a
        // handful of points, so give the budget to the other factor
        auto is_rotation = [](const ExperimentSystem& s) {
            return s.type == ExpType::continuous && s.spec.kind == SystemKind::rotation;
        };
        if (is_rotation(sys.children[0]) && !is_rotation(sys.children[1]) && M >= 64) {
            ma = 16;
            mb = M / ma;
        } else if (is_rotation(sys.children[1]) && !is_rotation(sys.children[0]) && M >= 64) {
            mb = 16;
            ma = M / mb;
        }
        auto a = build_ensemble(sys.children[0], ma, T, mix64(seed), workers, stride);
        auto b = build_ensemble(sys.children[1], mb, T, mix64(seed + 1), workers, stride);
        out.denjoy = a.denjoy ? a.denjoy : b.denjoy;
        out.ensemble = std::make_shared<ProductEnsemble>(a.ensemble, b.ensemble);
    } else {
        std::shared_ptr<const DenjoyModel> model;
        if (sys.spec.kind == SystemKind::denjoy)
            model = std::make_shared<DenjoyModel>(
                sys.spec.circle_or("alpha", Fixed128::golden()));
        auto pts = continuous_sample(sys.spec, M, seed, model.get());
        auto base = std::make_shared<ContinuousEnsemble>(sys.spec, std::move(pts),
                                                         T, workers, model);
        out.denjoy = model;
        if (stride > 1)
            out.ensemble = std::make_shared<PowerEnsemble>(base, stride);
        else
            out.ensemble = base;
    }
    out.sample_size = out.ensemble->size();
    return out;
}

inline std::vector<double> default_deltas(const ExperimentSystem& sys) {
    if (sys.symbolic()) return {1.0};
    if (sys.type == ExpType::product &&
        (sys.children[0].symbolic() || sys.children[1].symbolic()))
        return {0.25, 0.125};
    return {0.5, 0.25, 0.125, 0.0625, 0.03125};
}

// ---------------------------------------------------------------------------
// Cross-validation properties: power invariance and the product formula.

struct PropertyReport {
    double slope_base = 0.0;
    double slope_power = 0.0;
    double slope_product_rotation = 0.0;
    ScalingEstimate est_base, est_power, est_product;
};

inline ScalingEstimate fit_for(const Ensemble& ens, const std::vector<double>& deltas,
                               const std::vector<double>& nus, std::size_t workers) {
    SweepPlan plan;
    plan.deltas = deltas;
    plan.nus = nus;
    std::size_t M = ens.size();
    plan.m_list = {M / 4, M / 2, M};
    plan.workers = workers;
    return fit_exponent(sweep(ens, plan));
}

inline PropertyReport property_checks(const ExperimentSystem& sys, std::size_t M,
                                      std::uint64_t T, std::uint64_t seed,
                                      std::size_t workers,
                                      const std::vector<double>& nus) {
    PropertyReport rep;
    auto deltas = default_deltas(sys);
    auto base = build_ensemble(sys, M, T, seed, workers);
    rep.est_base = fit_for(*base.ensemble, deltas, nus, workers);
    rep.slope_base = rep.est_base.slope;

    auto power = build_ensemble(sys, M, T, seed, workers, 2);
    rep.est_power = fit_for(*power.ensemble, deltas, nus, workers);
    rep.slope_power = rep.est_power.slope;

    ExperimentSystem prod;
    prod.type = ExpType::product;
    prod.text = "product(rotation:alpha=golden," + sys.text + ")";
    ExperimentSystem rot;
    rot.type = ExpType::continuous;
    rot.text = "rotation:alpha=golden";
    rot.spec = parse_spec(rot.text);
    prod.children = {rot, sys};
    // the cross sample needs enough non-rotation points for the scaling
    // of the second factor to show through
    auto product = build_ensemble(prod, std::max<std::size_t>(M, 1024), T, seed, workers);
    std::vector<double> prod_deltas = sys.symbolic() ? std::vector<double>{0.25}
                                                     : deltas;
    rep.est_product = fit_for(*product.ensemble, prod_deltas, nus, workers);
    rep.slope_product_rotation = rep.est_product.slope;
    return rep;
}

}  // namespace amorph
