#include <catch2/catch_amalgamated.hpp>

#include "amorph/besicovitch.hpp"
#include "amorph/experiment.hpp"

using namespace amorph;

TEST_CASE("besicovitch distance basics") {
    PeriodicSequence a({0, 1});
    PeriodicSequence b({1, 0});
    REQUIRE(besicovitch_distance(a, b, 1.0, 4096) == 1.0);
    REQUIRE(besicovitch_distance(a, a, 1.0, 4096) == 0.0);

    PeriodicSequence zeros({0});
    PeriodicSequence c({0, 0, 1});
    REQUIRE(besicovitch_distance(zeros, c, 1.0, 49152, EstimatorMode::terminal) ==
            Catch::Approx(1.0 / 3.0).margin(1e-4));
}

TEST_CASE("windowed distance widens with smaller delta") {
    PeriodicSequence zeros({0});
    PeriodicSequence c({0, 0, 0, 0, 0, 1});  // density 1/6 of mismatches
    double d1 = besicovitch_distance(zeros, c, 1.0, 46080, EstimatorMode::terminal);
    double dh = besicovitch_distance(zeros, c, 0.5, 46080, EstimatorMode::terminal);
    double dq = besicovitch_distance(zeros, c, 0.25, 46080, EstimatorMode::terminal);
    REQUIRE(d1 == Catch::Approx(1.0 / 6.0).margin(1e-3));
    REQUIRE(dh == Catch::Approx(2.0 / 6.0).margin(1e-3));  // window of 2 positions
    REQUIRE(dq == Catch::Approx(3.0 / 6.0).margin(1e-3));
}

TEST_CASE("bi-Lipschitz consistency between delta=1 and delta=1/2") {
    SturmianSequence x(Fixed128::golden());
    SymbolicEnsemble ens(x, 24, 32768);
    for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            double d1 = ens.pair_frequency(i, j, 1.0, EstimatorMode::suffix_max);
            double dh = ens.pair_frequency(i, j, 0.5, EstimatorMode::suffix_max);
            if (d1 == 0.0) continue;
            double ratio = dh / d1;
            REQUIRE(ratio >= 1.0 - 1e-9);  // wider window can only add
            REQUIRE(ratio <= 3.0);         // window-length factor m+1 = 2, slack for the surrogate
        }
}

TEST_CASE("pseudo-metric triangle inequality on sampled triples") {
    SturmianSequence gen(Fixed128::golden());
    SymbolicEnsemble ens(gen, 9, 16384);
    double slack = 2.0 / 16384.0 + 1e-9;
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
            for (std::size_t k = 0; k < 9; ++k) {
                if (i == j || j == k || i == k) continue;
                double dij = ens.pair_frequency(i, j, 1.0, EstimatorMode::terminal);
                double djk = ens.pair_frequency(j, k, 1.0, EstimatorMode::terminal);
                double dik = ens.pair_frequency(i, k, 1.0, EstimatorMode::terminal);
                REQUIRE(dik <= dij + djk + slack);
            }
}

TEST_CASE("packing count on a static unit interval grid") {
    // 101 grid points 0, 0.01, ..., 1.0 with |.| distance: packing at 0.1.
    // distances computed from the integer indices so 0.3 - 0.2 >= 0.1
    // holds exactly, as in the pencil-and-paper count
    auto dist = [](std::size_t i, std::size_t j) {
        return (double)(i > j ? i - j : j - i) / 100.0;
    };
    REQUIRE(packing_count(dist, 101, 0.1) == 11);
}

TEST_CASE("single point has dimension zero") {
    auto dist = [](std::size_t, std::size_t) { return 0.0; };
    auto box = box_dimension(dist, 1, {0.5, 0.25, 0.125, 0.0625}, BoxMode::packing);
    REQUIRE(box.fit.slope == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("sturmian box dimension near one, and Sep = M_nu exactly") {
    ExperimentSystem sys = parse_experiment("sturmian:alpha=golden");
    auto gen = make_sequence(sys);
    const std::size_t M = 256;
    const std::uint64_t T = 32768;
    auto dist_matrix = besicovitch_matrix(*gen, M, 1.0, T);
    auto dist = [&](std::size_t i, std::size_t j) { return dist_matrix[i * M + j]; };
    std::vector<double> eps;
    for (int a = 1; a <= 6; ++a) eps.push_back(std::ldexp(1.0, -a));
    auto box = box_dimension(dist, M, eps, BoxMode::packing);
    REQUIRE(box.fit.slope == Catch::Approx(1.0).margin(0.25));

    // identity: the packing path and the separation path agree integer
    // for integer at matched (nu, horizon)
    SymbolicEnsemble ens(*gen, M, T);
    auto rec = compute_record(ens, 1.0, EstimatorMode::suffix_max);
    for (double nu : eps) {
        std::size_t pack = packing_count(dist, M, nu);
        std::size_t sep = max_separated_set(rec, nu).size();
        REQUIRE(pack == sep);
    }
}

TEST_CASE("covering counts stay below packing counts") {
    ExperimentSystem sys = parse_experiment("toeplitz:word=01*,m=1");
    auto gen = make_sequence(sys);
    const std::size_t M = 128;
    auto dist_matrix = besicovitch_matrix(*gen, M, 1.0, 16384);
    auto dist = [&](std::size_t i, std::size_t j) { return dist_matrix[i * M + j]; };
    for (double eps : {0.5, 0.25, 0.125})
        REQUIRE(covering_count(dist, M, eps) <= packing_count(dist, M, eps));
}

TEST_CASE("total boundedness probes") {
    // periodic orbit: count bounded by the period
    ExperimentSystem per = parse_experiment("periodic:block=00101");
    auto pgen = make_sequence(per);
    auto probe = total_boundedness_probe(*pgen, 0.0625, {16, 32, 64}, 8192);
    REQUIRE(!probe.not_totally_bounded);
    REQUIRE(probe.counts.back() <= 5);

    // thue-morse: aperiodicity measure is positive, growth is linear
    ExperimentSystem tm = parse_experiment("thue_morse");
    auto tgen = make_sequence(tm);
    auto tprobe = total_boundedness_probe(*tgen, 0.0625, {32, 64, 128, 256}, 16384);
    REQUIRE(tprobe.not_totally_bounded);
    REQUIRE(tprobe.counts.back() >= 192);

    // the (3,1)-Toeplitz word is regular: counts plateau
    ExperimentSystem tp = parse_experiment("toeplitz:word=01*,m=1");
    auto ogen = make_sequence(tp);
    auto oprobe = total_boundedness_probe(*ogen, 0.0625, {32, 64, 128, 256}, 16384);
    REQUIRE(!oprobe.not_totally_bounded);
}
