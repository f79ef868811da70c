// amorph: asymptotic separation numbers and amorphic complexity estimation
// for a catalog of dynamical systems.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amorph/besicovitch.hpp"
#include "amorph/experiment.hpp"
#include "amorph/io.hpp"
#include "amorph/pinched.hpp"
#include "amorph/rng.hpp"
#include "amorph/scaling.hpp"
#include "amorph/separation.hpp"
#include "amorph/toeplitz.hpp"

using namespace amorph;
using nlohmann::json;

namespace {

// grids come as dyadic ranges "2^-1..2^-10", single values, or comma lists
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    auto parse_one = [](const std::string& tok) -> double {
        if (tok.rfind("2^", 0) == 0) return std::ldexp(1.0, std::stoi(tok.substr(2)));
        auto slash = tok.find('/');
        if (slash != std::string::npos)
            return std::stod(tok.substr(0, slash)) / std::stod(tok.substr(slash + 1));
        return std::stod(tok);
    };
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        std::string a = text.substr(0, dots), b = text.substr(dots + 2);
        if (a.rfind("2^", 0) != 0 || b.rfind("2^", 0) != 0)
            throw std::invalid_argument("range grids must be dyadic, e.g. 2^-1..2^-10");
        int ea = std::stoi(a.substr(2)), eb = std::stoi(b.substr(2));
        for (int e = std::max(ea, eb); e >= std::min(ea, eb); --e)
            out.push_back(std::ldexp(1.0, e));
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_one(tok));
    std::sort(out.rbegin(), out.rend());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> doubling_sizes(std::size_t target) {
    std::vector<std::size_t> sizes;
    std::size_t m = target;
    while (m >= 64 && sizes.size() < 3) {
        sizes.push_back(m);
        m /= 2;
    }
    std::reverse(sizes.begin(), sizes.end());
    if (sizes.empty()) sizes.push_back(target);
    return sizes;
}

std::string sweep_csv(const std::string& system, const std::vector<SweepRow>& rows,
                      const std::string& config, std::uint64_t seed) {
    std::string out = output_header(config, seed);
    out += "system,delta,nu,M,T,sep_est,span_est,saturated\n";
    for (const auto& r : rows) {
        out += system + "," + format_g12(r.delta) + "," + format_g12(r.nu) + "," +
               std::to_string(r.samples) + "," + std::to_string(r.horizon) + "," +
               std::to_string(r.sep) + "," + std::to_string(r.span) + "," +
               (r.saturated ? "1" : "0") + "\n";
    }
    return out;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty())
        std::fputs(content.c_str(), stdout);
    else
        atomic_write(path, content);
}

json estimate_json(const ScalingEstimate& est) {
    json j;
    j["slope"] = est.slope;
    j["lower"] = est.lower;
    j["upper"] = est.upper;
    j["r2"] = est.r2;
    j["bounded"] = est.bounded;
    j["saturated_by_sample"] = est.saturated_by_sample;
    j["infinite_suspected"] = est.infinite_suspected;
    j["per_delta"] = json::array();
    for (const auto& df : est.per_delta) {
        json d;
        d["delta"] = df.delta;
        d["slope"] = df.fit.slope;
        d["intercept"] = df.fit.intercept;
        d["r2"] = df.fit.r2;
        d["usable_cells"] = df.usable;
        d["dropped_saturated"] = df.dropped_saturated;
        d["dropped_monotone"] = df.dropped_monotone;
        d["local_slopes"] = df.local_slopes;
        j["per_delta"].push_back(d);
    }
    return j;
}

const char* kSchemaText =
    "sweep CSV columns:\n"
    "  system     canonical system text\n"
    "  delta      separation distance threshold\n"
    "  nu         separation frequency threshold\n"
    "  M          sample size used for this row\n"
    "  T          orbit horizon (steps)\n"
    "  sep_est    greedy maximal (delta,nu)-separated subset size\n"
    "  span_est   greedy (delta,nu)-spanning cover size\n"
    "  saturated  1 if sep_est hit the sample size or grew >10% at the\n"
    "             last sample doubling; such cells are censored in fits\n"
    "record CSV columns (estimate --dump-record):\n"
    "  i,j        sample indices\n"
    "  delta      distance threshold\n"
    "  frequency  suffix-max estimate of the separation frequency\n"
    "pinched CSV columns:\n"
    "  theta      base angle (uniform grid plus exact tau_k insertions)\n"
    "  n          boundary-line depth\n"
    "  value      phi_n(theta)\n"
    "besicovitch CSV columns:\n"
    "  eps        packing/covering radius\n"
    "  count      greedy packing or covering count\n"
    "all CSVs: comma separated, LF endings, floats at 12 significant\n"
    "digits, first line '# amorph version=... config=... seed=...'\n"
    "environment: AMORPH_BUDGET_CELLS caps M^2*T per sweep cell\n";

int run_selftest();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymptotic separation numbers and amorphic complexity"};
    app.require_subcommand(0, 1);

    bool schema = false;
    app.add_flag("--schema", schema, "print the output column documentation");

    std::string system_text = "sturmian:alpha=golden";
    std::string deltas_text, nus_text = "2^-1..2^-8";
    std::size_t samples = 512;
    std::uint64_t horizon = 100000;
    std::uint64_t seed = 1;
    std::string out_path;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    bool force_samples = false;

    auto add_common = [&](CLI::App* cmd, bool with_system = true) {
        if (with_system)
            cmd->add_option("--system", system_text, "system spec text");
        cmd->add_option("--deltas", deltas_text, "delta grid, e.g. 2^-1..2^-5 or 0.5,0.25");
        cmd->add_option("--nus", nus_text, "nu grid, e.g. 2^-1..2^-10");
        cmd->add_option("--samples", samples, "sample size M");
        cmd->add_option("--horizon", horizon, "orbit horizon T");
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--out", out_path, "output path (default: stdout)");
        cmd->add_option("--workers", workers, "worker threads");
        cmd->add_flag("--force-samples", force_samples, "allow M beyond the 4096 cap");
    };

    auto* cmd_sweep = app.add_subcommand("sweep", "emit the (delta,nu,M) sweep as CSV");
    add_common(cmd_sweep);

    auto* cmd_est = app.add_subcommand("estimate", "sweep, fit the scaling exponent, report");
    add_common(cmd_est);
    std::string record_path, from_record;
    cmd_est->add_option("--dump-record", record_path, "also write the pair-frequency CSV");
    cmd_est->add_option("--from-record", from_record,
                        "re-threshold a saved pair-frequency CSV instead of simulating");

    auto* cmd_toe = app.add_subcommand("toeplitz", "density table and predicted complexity");
    std::string word = "0001*1*";
    unsigned word_m = 3;
    unsigned depth = 3;
    cmd_toe->add_option("--word", word, "template 0^m 1 v over {0,1,*}")->required();
    cmd_toe->add_option("--m", word_m, "prefix zero count m")->required();
    cmd_toe->add_option("--depth", depth, "levels of the periodic structure");
    cmd_toe->add_option("--out", out_path, "output path");

    auto* cmd_bes = app.add_subcommand("besicovitch", "box dimension in Besicovitch space");
    add_common(cmd_bes);
    std::string eps_text = "2^-1..2^-6";
    std::string mode_text = "packing";
    cmd_bes->add_option("--eps", eps_text, "epsilon grid");
    cmd_bes->add_option("--mode", mode_text, "packing | covering | probe");

    auto* cmd_pin = app.add_subcommand("pinched", "boundary lines, SNA verdict, exponents");
    double p_alpha = 3.0, p_eps = 0.0;
    std::string p_omega = "golden";
    std::size_t p_grid = 4096;
    unsigned p_depth = 25;
    bool p_census = false, p_exponent = false;
    cmd_pin->add_option("--alpha", p_alpha, "expansion strength");
    cmd_pin->add_option("--eps", p_eps, "forcing offset (0 pinches)");
    cmd_pin->add_option("--omega", p_omega, "rotation number");
    cmd_pin->add_option("--grid", p_grid, "theta grid size");
    cmd_pin->add_option("--depth", p_depth, "boundary-line depth N");
    cmd_pin->add_flag("--census", p_census, "also run the fresh-peak census");
    cmd_pin->add_flag("--exponent", p_exponent, "also fit the graph separation exponent");
    cmd_pin->add_option("--nus", nus_text, "nu grid for --exponent");
    cmd_pin->add_option("--horizon", horizon, "orbit horizon for --exponent");
    cmd_pin->add_option("--seed", seed, "master seed");
    cmd_pin->add_option("--out", out_path, "output path");
    cmd_pin->add_option("--workers", workers, "worker threads");

    auto* cmd_props = app.add_subcommand("props", "power and product cross-validation");
    add_common(cmd_props);

    auto* cmd_self = app.add_subcommand("selftest", "run the built-in oracle suite");

    CLI11_PARSE(app, argc, argv);

    if (schema) {
        std::fputs(kSchemaText, stdout);
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::fputs(app.help().c_str(), stdout);
        return 0;
    }

    try {
        if (cmd_self->parsed()) return run_selftest();

        if (cmd_toe->parsed()) {
            ToeplitzWord w(word, word_m);
            auto table = density_table(w, depth);
            std::string config = "toeplitz word=" + word + " m=" + std::to_string(word_m) +
                                 " depth=" + std::to_string(depth);
            std::string out = output_header(config, 0);
            out += "level,period,density,density_value\n";
            for (std::size_t l = 0; l < table.periods.size(); ++l) {
                out += std::to_string(l + 1) + "," + std::to_string(table.periods[l]) + "," +
                       std::to_string(table.densities[l].num) + "/" +
                       std::to_string(table.densities[l].den) + "," +
                       format_g12(table.densities[l].value()) + "\n";
            }
            out += "p=" + std::to_string(w.p()) + " q=" + std::to_string(w.q()) +
                   " d=" + std::to_string(w.d()) + "\n";
            if (is_periodic(w)) {
                out += "periodic=1\n";
            } else {
                out += "periodic=0\npredicted_ac=" + format_g12(predicted_ac(w)) + "\n";
            }
            emit(out_path, out);
            return 0;
        }

        if (cmd_pin->parsed()) {
            Fixed128 omega = parse_param_value(p_omega).circle;
            auto grid = boundary_lines(p_alpha, p_eps, omega, p_grid, p_depth);
            auto verdict = sna_detect(grid);
            std::string config = "pinched alpha=" + format_g12(p_alpha) +
                                 " eps=" + format_g12(p_eps) + " omega=" + p_omega +
                                 " grid=" + std::to_string(p_grid) +
                                 " depth=" + std::to_string(p_depth);
            std::string out = output_header(config, seed);
            out += "theta,n,value\n";
            for (unsigned n = 1; n <= grid.depth; ++n)
                for (std::size_t i = 0; i < grid.theta.size(); ++i)
                    out += format_g12(grid.theta[i]) + "," + std::to_string(n) + "," +
                           format_g12(grid.line(n)[i]) + "\n";
            emit(out_path, out);

            const char* cls = verdict.cls == AttractorClass::sna ? "SNA"
                              : verdict.cls == AttractorClass::continuous ? "continuous"
                                                                          : "undecided";
            std::printf("verdict=%s zero_graph=%d q90=%s min=%s convergence=%s\n", cls,
                        verdict.zero_graph ? 1 : 0, format_g12(verdict.upper_quantile).c_str(),
                        format_g12(verdict.grid_min).c_str(),
                        format_g12(verdict.convergence).c_str());
            std::printf("lyapunov_zero=%s\n",
                        format_g12(lyapunov_zero_line(p_alpha, p_eps, omega, 2000000)).c_str());
            if (p_census) {
                auto census = peak_census(omega, PeakConstants{}, 10000, p_alpha, p_eps);
                std::printf("fresh_peaks=%zu density=%s\n", census.fresh.size(),
                            format_g12(census.density.empty() ? 0.0 : census.density.back())
                                .c_str());
                for (const auto& v : census.soft_violations)
                    std::printf("constant_check_failed=%s\n", v.c_str());
            }
            if (p_exponent) {
                auto nus = parse_grid(nus_text);
                auto res = graph_separation_exponent(p_alpha, p_eps, omega, p_grid / 8,
                                                     horizon, {0.5}, nus, 12,
                                                     PeakConstants{}, workers);
                std::printf("graph_exponent=%s tail_lower=%s sample=%zu\n",
                            format_g12(res.estimate.slope).c_str(),
                            format_g12(res.tail_lower).c_str(), res.sample_size);
            }
            return 0;
        }

        if (cmd_est->parsed() && !from_record.empty()) {
            // offline re-thresholding of a saved matrix at many nu
            std::ifstream in(from_record, std::ios::binary);
            if (!in) throw std::invalid_argument("cannot read " + from_record);
            std::string csv((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
            auto rec = record_from_csv(csv);
            auto nus = parse_grid(nus_text);
            std::string out = output_header("from-record " + from_record, seed);
            out += "delta,nu,sep_est,span_est\n";
            for (double nu : nus)
                out += format_g12(rec.delta()) + "," + format_g12(nu) + "," +
                       std::to_string(max_separated_set(rec, nu).size()) + "," +
                       std::to_string(min_spanning_set(rec, nu).size()) + "\n";
            emit(out_path, out);
            return 0;
        }

        // remaining commands share the experiment-system machinery
        ExperimentSystem sys = parse_experiment(system_text);
        check_budget(samples, horizon, force_samples);
        auto nus = parse_grid(nus_text);
        std::vector<double> deltas =
            deltas_text.empty() ? default_deltas(sys) : parse_grid(deltas_text);

        if (cmd_sweep->parsed() || cmd_est->parsed()) {
            auto built = build_ensemble(sys, samples, horizon, seed, workers);
            SweepPlan plan;
            plan.deltas = deltas;
            plan.nus = nus;
            plan.m_list = doubling_sizes(built.ensemble->size());
            plan.horizon = horizon;
            plan.seed = seed;
            plan.workers = workers;
            auto rows = sweep(*built.ensemble, plan);
            std::string config = "system=" + sys.text + " samples=" +
                                 std::to_string(samples) + " horizon=" +
                                 std::to_string(horizon);
            if (cmd_sweep->parsed()) {
                emit(out_path, sweep_csv(sys.text, rows, config, seed));
                return 0;
            }
            auto est = fit_exponent(rows);
            std::string out = output_header(config, seed);
            out += "delta      slope      r2         usable  dropped\n";
            for (const auto& df : est.per_delta) {
                char line[128];
                std::snprintf(line, sizeof line, "%-10s %-10.4f %-10.4f %-7zu %zu\n",
                              format_g12(df.delta).c_str(), df.fit.slope, df.fit.r2,
                              df.usable, df.dropped_saturated + df.dropped_monotone);
                out += line;
            }
            json j = estimate_json(est);
            j["system"] = sys.text;
            j["seed"] = seed;
            out += "SUMMARY " + j.dump() + "\n";
            emit(out_path, out);
            if (!record_path.empty()) {
                auto built2 = build_ensemble(sys, samples, horizon, seed, workers);
                auto rec = compute_record(*built2.ensemble, deltas[0],
                                          EstimatorMode::suffix_max, workers);
                std::string metric =
                    sys.symbolic() ? "besicovitch:delta=" + format_g12(deltas[0]) : "";
                atomic_write(record_path, output_header(config, seed) +
                                              record_to_csv(rec, metric));
            }
            return 0;
        }

        if (cmd_bes->parsed()) {
            if (!sys.symbolic())
                throw std::invalid_argument("besicovitch needs a symbolic system");
            auto gen = make_sequence(sys);
            auto eps_grid = parse_grid(eps_text);
            std::string config = "besicovitch system=" + sys.text + " mode=" + mode_text;
            if (mode_text == "probe") {
                auto probe = total_boundedness_probe(*gen, eps_grid.back(),
                                                     doubling_sizes(samples), horizon);
                std::string out = output_header(config, seed);
                out += "M,count\n";
                for (std::size_t i = 0; i < probe.sizes.size(); ++i)
                    out += std::to_string(probe.sizes[i]) + "," +
                           std::to_string(probe.counts[i]) + "\n";
                out += std::string("not_totally_bounded=") +
                       (probe.not_totally_bounded ? "1" : "0") + "\n";
                emit(out_path, out);
                return 0;
            }
            auto matrix = besicovitch_matrix(*gen, samples, 1.0, horizon);
            auto dist = [&](std::size_t i, std::size_t j) { return matrix[i * samples + j]; };
            auto box = box_dimension(dist, samples, eps_grid,
                                     mode_text == "covering" ? BoxMode::covering
                                                             : BoxMode::packing);
            std::string out = output_header(config, seed);
            out += "eps,count\n";
            for (std::size_t i = 0; i < box.eps_grid.size(); ++i)
                out += format_g12(box.eps_grid[i]) + "," + std::to_string(box.counts[i]) + "\n";
            out += "slope=" + format_g12(box.fit.slope) + " lower=" + format_g12(box.lower) +
                   " upper=" + format_g12(box.upper) + "\n";
            emit(out_path, out);
            return 0;
        }

        if (cmd_props->parsed()) {
            auto rep = property_checks(sys, samples, horizon, seed, workers, nus);
            json j;
            j["system"] = sys.text;
            j["slope_base"] = rep.slope_base;
            j["slope_power2"] = rep.slope_power;
            j["power_deviation"] = std::fabs(rep.slope_base - rep.slope_power);
            j["slope_product_with_rotation"] = rep.slope_product_rotation;
            std::string out = "PROPS " + j.dump() + "\n";
            emit(out_path, out);
            return 0;
        }
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "budget error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

namespace {

// the exact-oracle suite: random small instances with honestly computed
// frequency matrices; the two Lemma inequalities must never fail
int run_selftest() {
    std::size_t fails = 0, equal = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        std::size_t K = 5 + (std::size_t)(task_rand(seed, 0, 0) % 11);
        const std::uint64_t n = 64;
        std::vector<double> traj(K * n);
        for (std::size_t i = 0; i < K; ++i)
            for (std::uint64_t k = 0; k < n; ++k) traj[i * n + k] = task_uniform(seed, i, k);
        double delta = 0.1 + 0.15 * task_uniform(seed, 1000, 0);
        double nu = 0.1 + 0.5 * task_uniform(seed, 1001, 0);
        auto record_at = [&](double d) {
            SeparationRecord rec(K, d, n, EstimatorMode::terminal);
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < i; ++j) {
                    std::uint64_t s = 0;
                    for (std::uint64_t k = 0; k < n; ++k)
                        if (circle_arc(traj[i * n + k], traj[j * n + k]) >= d) ++s;
                    rec.set(i, j, (float)((double)s / (double)n));
                }
            return rec;
        };
        auto rec_d = record_at(delta);
        auto rec_2d = record_at(2 * delta);
        std::size_t sep = exact_max_separated(rec_d, nu);
        std::size_t span = exact_min_span(rec_d, nu);
        std::size_t span_half = exact_min_span(rec_d, nu / 2);
        std::size_t sep_2d = exact_max_separated(rec_2d, nu);
        std::size_t greedy = max_separated_set(rec_d, nu).size();
        if (sep < span) ++fails;
        if (span_half < sep_2d) ++fails;
        if (greedy > sep) ++fails;
        if (greedy == sep) ++equal;
        ++total;
    }
    std::printf("selftest: %zu instances, %zu violations, greedy=exact on %zu (%.0f%%)\n",
                total, fails, equal, 100.0 * (double)equal / (double)total);
    // deterministic regression spot checks
    {
        SeparationRecord rec(4, 0.6, 64, EstimatorMode::terminal);
        double pos[4] = {0.0, 0.5, 1.0, 1.5};
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < i; ++j)
                rec.set(i, j, std::fabs(pos[i] - pos[j]) >= 0.6 ? 1.0f : 0.0f);
        if (exact_max_separated(rec, 0.5) != 2 || max_separated_set(rec, 0.5).size() != 2) {
            std::printf("selftest: line-instance regression failed\n");
            ++fails;
        }
    }
    if (fails) {
        std::printf("selftest: FAILED\n");
        return 1;
    }
    std::printf("selftest: OK\n");
    return 0;
}

}  // namespace
