#include <catch2/catch_amalgamated.hpp>

#include "amorph/fixed128.hpp"
#include "amorph/rng.hpp"

using namespace amorph;

TEST_CASE("golden constant") {
    double g = Fixed128::golden().to_double();
    REQUIRE(g == Catch::Approx(0.6180339887498949).epsilon(1e-15));
    // alpha + alpha^2 = 1 for the golden mean conjugate
    REQUIRE(g + g * g == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("fraction round trip") {
    REQUIRE(Fixed128::from_fraction(1, 3).to_double() == Catch::Approx(1.0 / 3.0).epsilon(1e-18));
    REQUIRE(Fixed128::from_fraction(7, 4).to_double() == Catch::Approx(0.75));
    REQUIRE(Fixed128::from_fraction(2, 2).to_double() == 0.0);
    REQUIRE_THROWS_AS(Fixed128::from_fraction(1, 0), std::invalid_argument);
}

TEST_CASE("wrap-around addition is exact mod 1") {
    Fixed128 a = Fixed128::from_fraction(3, 4);
    Fixed128 b = Fixed128::from_fraction(1, 2);
    REQUIRE((a + b).to_double() == 0.25);
    REQUIRE((a - b).to_double() == 0.25);
    // n steps forward then n back is the identity, bit for bit
    Fixed128 x = Fixed128::golden();
    Fixed128 y = x;
    for (int i = 0; i < 1000; ++i) y += Fixed128::sqrt2_half();
    for (int i = 0; i < 1000; ++i) y -= Fixed128::sqrt2_half();
    REQUIRE(x == y);
    REQUIRE(x.times(1000) == Fixed128::golden().times(999) + Fixed128::golden());
}

TEST_CASE("arc distance") {
    auto d = [](double a, double b) {
        return Fixed128::arc_distance(Fixed128::from_double(a), Fixed128::from_double(b));
    };
    REQUIRE(d(0.1, 0.9) == Catch::Approx(0.2).margin(1e-12));
    REQUIRE(d(0.25, 0.75) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(d(0.3, 0.3) == 0.0);
}

TEST_CASE("doubling is a shift") {
    Fixed128 x = Fixed128::from_fraction(1, 3);
    REQUIRE(x.doubled().to_double() == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(x.doubled().doubled().to_double() == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("counter rng is scheduling independent") {
    REQUIRE(task_rand(1, 2, 3) == task_rand(1, 2, 3));
    REQUIRE(task_rand(1, 2, 3) != task_rand(1, 2, 4));
    REQUIRE(task_rand(1, 2, 3) != task_rand(2, 2, 3));
    double u = task_uniform(42, 0, 0);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
}
