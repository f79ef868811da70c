#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "amorph/runtime.hpp"
#include "amorph/systems.hpp"

using namespace amorph;

TEST_CASE("parse rotation") {
    auto spec = parse_spec("rotation:alpha=0.6180339887");
    REQUIRE(spec.kind == SystemKind::rotation);
    REQUIRE(spec.value("alpha") == Catch::Approx(0.6180339887));
}

TEST_CASE("parse pinched with golden keyword") {
    auto spec = parse_spec("pinched:alpha=3,eps=0.05,omega=golden");
    REQUIRE(spec.kind == SystemKind::pinched);
    REQUIRE(spec.value("alpha") == 3.0);
    REQUIRE(spec.value("eps") == 0.05);
    REQUIRE(spec.circle("omega").to_double() ==
            Catch::Approx(0.6180339887498949).epsilon(1e-15));
}

TEST_CASE("parse nested product") {
    auto spec = parse_spec("product(rotation:alpha=0.30103,doubling)");
    REQUIRE(spec.kind == SystemKind::product);
    REQUIRE(spec.children.size() == 2);
    REQUIRE(spec.children[0].kind == SystemKind::rotation);
    REQUIRE(spec.children[1].kind == SystemKind::doubling);
    REQUIRE(phase_dim(spec) == 2);
}

TEST_CASE("parse fractions") {
    auto spec = parse_spec("rotation:alpha=1/3");
    REQUIRE(spec.value("alpha") == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("parse errors carry a position") {
    REQUIRE_THROWS_AS(parse_spec("spinning:alpha=1"), ParseError);
    REQUIRE_THROWS_AS(parse_spec("rotation:alpha"), ParseError);
    REQUIRE_THROWS_AS(parse_spec("rotation:alpha=0.5 trailing"), ParseError);
    REQUIRE_THROWS_AS(parse_spec("product(doubling)"), ParseError);
    try {
        parse_spec("rotation:=1");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        REQUIRE(e.position == 9);
    }
}

TEST_CASE("parameter domain validation") {
    REQUIRE_THROWS_AS(parse_spec("rotation:alpha=1.5"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_spec("rotation"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_spec("pinched:alpha=0"), std::invalid_argument);
    REQUIRE_NOTHROW(parse_spec("pinched:alpha=3"));
}

TEST_CASE("torus shear step") {
    SystemRuntime rt(parse_spec("torus_shear"));
    Point p{{0.25, 0.1}};
    Point q = rt.step(p);
    REQUIRE(q.coords[0] == Catch::Approx(0.25));
    REQUIRE(q.coords[1] == Catch::Approx(0.35));
}

TEST_CASE("doubling step") {
    SystemRuntime rt(parse_spec("doubling"));
    Point p{{1.0 / 3.0}};
    REQUIRE(rt.step(p).coords[0] == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("pinched step at the golden point") {
    SystemRuntime rt(parse_spec("pinched:alpha=3,eps=0,omega=golden"));
    double w = Fixed128::golden().to_double();
    Point p{{w, 1.0}};
    Point q = rt.step(p);
    REQUIRE(q.coords[0] == Catch::Approx(frac_part(2 * w)).margin(1e-15));
    REQUIRE(q.coords[1] == Catch::Approx(std::tanh(3.0) * std::sin(M_PI * w)).epsilon(1e-12));
}

TEST_CASE("pinched fibre over theta=0 collapses to 0 when eps=0") {
    SystemRuntime rt(parse_spec("pinched:alpha=3,eps=0,omega=golden"));
    for (double x : {0.0, 0.3, 0.7, 1.0}) {
        Point p{{0.0, x}};
        REQUIRE(rt.step(p).coords[1] == 0.0);
    }
}

TEST_CASE("power steps") {
    SystemRuntime rt(parse_spec("doubling"));
    Point p{{1.0 / 3.0}};
    Point q = rt.step_n(p, 4);
    REQUIRE(q.coords[0] == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("metric is the max metric with circle arcs") {
    auto spec = parse_spec("product(rotation:alpha=golden,morse_smale)");
    Point a{{0.05, 0.2}};
    Point b{{0.95, 0.5}};
    REQUIRE(metric(spec, a, b) == Catch::Approx(0.3));  // max(arc 0.1, 0.3)
}

TEST_CASE("metric axioms on sampled triples") {
    auto spec = parse_spec("torus_shear");
    std::vector<Point> pts = {Point{{0.1, 0.9}}, Point{{0.5, 0.55}}, Point{{0.77, 0.12}},
                              Point{{0.0, 0.0}}};
    for (const auto& a : pts)
        for (const auto& b : pts) {
            REQUIRE(metric(spec, a, b) == Catch::Approx(metric(spec, b, a)));
            if (&a == &b) REQUIRE(metric(spec, a, b) == 0.0);
            for (const auto& c : pts)
                REQUIRE(metric(spec, a, c) <=
                        metric(spec, a, b) + metric(spec, b, c) + 1e-12);
        }
}

TEST_CASE("rotation orbits stay isometric") {
    SystemRuntime rt(parse_spec("rotation:alpha=golden"));
    Point a{{0.0}};
    Point b{{0.4}};
    double d0 = rt.distance(a, b);
    for (int k = 0; k < 500; ++k) {
        a = rt.step(a);
        b = rt.step(b);
        REQUIRE(rt.distance(a, b) == Catch::Approx(d0).margin(1e-9));
    }
}

TEST_CASE("morse-smale orbits reach the non-wandering set") {
    SystemRuntime rt(parse_spec("morse_smale"));
    for (double x0 : {0.05, 0.35, 0.72, 0.97, 1.0}) {
        Point p{{x0}};
        p = rt.step_n(p, 60);
        bool at_attractor = p.coords[0] < 1e-9;
        bool at_repeller = std::fabs(p.coords[0] - 1.0) < 1e-9;
        REQUIRE((at_attractor || at_repeller));
    }
}

TEST_CASE("annulus forcing function") {
    AnnulusAnchors an(0.5);
    // 0 on {0} and above x0
    REQUIRE(annulus_alpha(0.0, an) == 0.0);
    REQUIRE(annulus_alpha(0.75, an) == 0.0);
    REQUIRE(annulus_alpha(1.0, an) == 0.0);
    // peak of the tent branch
    REQUIRE(annulus_alpha(0.375, an) == Catch::Approx(1.0));
    // one level down: g(x0') = 9/64 sits in (x_2, x_1]
    REQUIRE(annulus_alpha(9.0 / 64.0, an) == Catch::Approx(0.5));
    // interior boundary continuity: alpha(x1) from both branches is 0
    REQUIRE(annulus_alpha(0.25, an) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("annulus sum difference follows the harmonic series") {
    // |sum_k alpha(g^k x) - alpha(g^k x')| = 2|x-x'|/(x0-x1) H_n
    // for x, x' in [x1, x0']; n stops before x^(2^n) underflows
    AnnulusAnchors an(0.5);
    double x = 0.3, xp = 0.35;
    int n = 9;
    double sx = 0, sxp = 0, hn = 0;
    double ux = x, uxp = xp;
    for (int k = 1; k <= n; ++k) {
        sx += annulus_alpha(ux, an);
        sxp += annulus_alpha(uxp, an);
        ux *= ux;
        uxp *= uxp;
        hn += 1.0 / (double)k;
    }
    REQUIRE(std::fabs(sx - sxp) ==
            Catch::Approx(2.0 * std::fabs(x - xp) / (an.x0 - an.x1) * hn).epsilon(1e-9));
}

TEST_CASE("annulus step advances the fibre by alpha(x)") {
    SystemRuntime rt(parse_spec("annulus_transient"));
    Point p{{0.375, 0.9}};
    Point q = rt.step(p);
    REQUIRE(q.coords[0] == Catch::Approx(0.140625));
    REQUIRE(q.coords[1] == Catch::Approx(frac_part(0.9 + 1.0)));
}

TEST_CASE("product system step is componentwise") {
    SystemRuntime rt(parse_spec("product(rotation:alpha=1/4,doubling)"));
    Point p{{0.1, 0.3}};
    Point q = rt.step(p);
    REQUIRE(q.coords[0] == Catch::Approx(0.35));
    REQUIRE(q.coords[1] == Catch::Approx(0.6));
}

TEST_CASE("canonical text round trip") {
    auto spec = parse_spec("product(rotation:alpha=1/3,pinched:alpha=3,eps=0.05)");
    auto again = parse_spec(spec.text());
    REQUIRE(again.kind == SystemKind::product);
    REQUIRE(again.children[1].value("eps") == 0.05);
}
