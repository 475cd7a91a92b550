#include <doctest.h>

#include <cmath>

#include "degenlab/core.hpp"
#include "degenlab/rng.hpp"

using namespace degenlab;

namespace {

Grid square_grid(double extent, double h, double dt, double t_start) {
    return Grid(2, extent, h, dt, {t_start, 0.0});
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(2, 1.0, -0.1, 0.1, {-1.0, 0.0}), Error);
    CHECK_THROWS_AS(Grid(2, 1.0, 0.3, 0.1, {-1.0, 0.0}), Error);   // extent/h not integer
    CHECK_THROWS_AS(Grid(2, 1.0, 0.25, 0.3, {-1.0, 0.0}), Error);  // span not multiple of dt
    CHECK_THROWS_AS(Grid(2, 1.0, 0.25, 0.1, {0.0, 1.0}), Error);   // t_end > 0
    CHECK_THROWS_AS(Grid(3, 1.0, 0.25, 0.1, {-1.0, 0.0}), Error);

    Grid g = square_grid(0.75, 1.0 / 32, 1.0 / 64, -0.5625);
    CHECK(g.nodes(0) == 49);
    CHECK(g.nodes(1) == 49);
    CHECK(g.steps() == 36);
    CHECK(g.coord(0, 24) == doctest::Approx(0.0));

    Grid half(2, 1.0, 0.25, 0.5, {-1.0, 0.0}, true);
    CHECK(half.nodes(0) == 9);
    CHECK(half.nodes(1) == 5);
    CHECK(half.axis_min(1) == 0.0);
}

TEST_CASE("sample") {
    Grid g(2, 0.6, 0.1, 0.25, {-0.5, 0.0});

    Field zero = sample([](const Vec&, double) { return 0.0; }, g, -0.25);
    for (double v : zero.values()) CHECK(v == 0.0);

    Field ident = sample([](const Vec& x, double) { return x[0]; }, g, 0.0);
    for (int i = 0; i < g.nodes(0); ++i)
        CHECK(ident(i, 3) == doctest::Approx(g.coord(0, i)));

    // |x|^{3/2} + 4.5 t at the node (0.4, 0.3), t = -0.25
    Field f = sample(
        [](const Vec& x, double t) { return std::pow(x.norm(), 1.5) + 4.5 * t; }, g,
        -0.25);
    CHECK(f(10, 9) == doctest::Approx(-0.7714466094067262).epsilon(1e-13));

    CHECK_THROWS_AS(sample([](const Vec&, double) { return 1.0; }, g, -0.13), Error);
}

TEST_CASE("gradient stencils") {
    Grid g(2, 0.6, 0.1, 0.3, {-0.6, 0.0});

    Field c = sample([](const Vec&, double) { return 7.5; }, g, 0.0);
    auto gc = gradient(c);
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            CHECK(gc[0](i, j) == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(gc[1](i, j) == doctest::Approx(0.0).epsilon(1e-14));
        }

    // linear: exact everywhere, one-sided stencils included
    Field lin = sample([](const Vec& x, double) { return x[0]; }, g, 0.0);
    auto gl = gradient(lin);
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            CHECK(gl[0](i, j) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(gl[1](i, j) == doctest::Approx(0.0).epsilon(1e-12));
        }

    // |x|^2 at (0.3, 0.4): central differences exact on quadratics
    Field quad = sample([](const Vec& x, double) { return x.norm_sq(); }, g, 0.0);
    const int i = 9, j = 10;  // (0.3, 0.4)
    CHECK(g.coord(0, i) == doctest::Approx(0.3));
    CHECK(g.coord(1, j) == doctest::Approx(0.4));
    auto gq = gradient(quad);
    CHECK(gq[0](i, j) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(gq[1](i, j) == doctest::Approx(0.8).epsilon(1e-13));

    CHECK_THROWS_AS(gradient(Field(Grid(1, 0.05, 0.05, 0.1, {-0.1, 0.0}))), Error);
}

TEST_CASE("hessian stencils") {
    Grid g(2, 0.6, 0.1, 0.3, {-0.6, 0.0});

    Field bil = sample([](const Vec& x, double) { return x[0] * x[1]; }, g, 0.0);
    auto hb = hessian(bil);
    for (int j = 1; j < g.nodes(1) - 1; ++j)
        for (int i = 1; i < g.nodes(0) - 1; ++i) {
            CHECK(hb[0](i, j) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(hb[1](i, j) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(hb[2](i, j) == doctest::Approx(1.0).epsilon(1e-12));
        }

    Field quad = sample([](const Vec& x, double) { return x.norm_sq(); }, g, 0.0);
    auto hq = hessian(quad);
    for (int j = 1; j < g.nodes(1) - 1; ++j)
        for (int i = 1; i < g.nodes(0) - 1; ++i) {
            CHECK(hq[0](i, j) == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(hq[1](i, j) == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(hq[2](i, j) == doctest::Approx(0.0).epsilon(1e-12));
        }

    // |x|^{3/2} at |x| = 0.5 against the closed-form Hessian
    Grid fine(2, 0.6, 0.01, 0.3, {-0.6, 0.0});
    Field f = sample([](const Vec& x, double) { return std::pow(x.norm(), 1.5); }, fine,
                     0.0);
    const int i = 90, j = 100;  // (0.3, 0.4)
    const double k = 1.5 * std::pow(0.5, -0.5);
    const double hxx = k * (1.0 - 0.5 * 0.36);
    const double hyy = k * (1.0 - 0.5 * 0.64);
    const double hxy = k * (-0.5 * 0.48);
    SymMat m = hessian_at(f, i, j);
    CHECK(m(0, 0) == doctest::Approx(hxx).epsilon(1e-3));
    CHECK(m(1, 1) == doctest::Approx(hyy).epsilon(1e-3));
    CHECK(m(0, 1) == doctest::Approx(hxy).epsilon(1e-3));
}

TEST_CASE("stencils reproduce random quadratics exactly at interior nodes") {
    Grid g(2, 0.5, 0.125, 0.25, {-0.25, 0.0});
    SplitMix64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2),
                     c = rng.uniform(-2, 2), d = rng.uniform(-2, 2),
                     e = rng.uniform(-2, 2), f0 = rng.uniform(-2, 2);
        Field f = sample(
            [&](const Vec& x, double) {
                return a * x[0] * x[0] + b * x[1] * x[1] + c * x[0] * x[1] + d * x[0] +
                       e * x[1] + f0;
            },
            g, 0.0);
        for (int j = 1; j < g.nodes(1) - 1; ++j)
            for (int i = 1; i < g.nodes(0) - 1; ++i) {
                const Vec x = g.node(i, j);
                const Vec q = gradient_at(f, i, j);
                CHECK(q[0] == doctest::Approx(2 * a * x[0] + c * x[1] + d).epsilon(1e-11));
                CHECK(q[1] == doctest::Approx(2 * b * x[1] + c * x[0] + e).epsilon(1e-11));
                const SymMat m = hessian_at(f, i, j);
                CHECK(m(0, 0) == doctest::Approx(2 * a).epsilon(1e-10));
                CHECK(m(1, 1) == doctest::Approx(2 * b).epsilon(1e-10));
                CHECK(m(0, 1) == doctest::Approx(c).epsilon(1e-10));
            }
    }
}

TEST_CASE("refinement order is two") {
    auto f = [](const Vec& x, double) { return std::sin(x[0]) * std::cos(x[1]); };
    auto grad_err = [&](double h) {
        Grid g(2, 0.5, h, 0.25, {-0.25, 0.0});
        Field s = sample(f, g, 0.0);
        double worst = 0.0;
        for (int j = 1; j < g.nodes(1) - 1; ++j)
            for (int i = 1; i < g.nodes(0) - 1; ++i) {
                const Vec x = g.node(i, j);
                const Vec q = gradient_at(s, i, j);
                worst = std::max(worst,
                                 std::abs(q[0] - std::cos(x[0]) * std::cos(x[1])));
                const SymMat m = hessian_at(s, i, j);
                worst = std::max(worst,
                                 std::abs(m(0, 1) + std::cos(x[0]) * std::sin(x[1])));
            }
        return worst;
    };
    const double order = std::log2(grad_err(1.0 / 16) / grad_err(1.0 / 32));
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("time derivative") {
    Grid g(2, 0.5, 0.25, 0.01, {-0.6, 0.0});

    SpaceTimeSolution constant =
        sample_solution([](const Vec&, double) { return 3.0; }, g);
    Field ut = time_derivative(constant, 1);
    for (double v : ut.values()) CHECK(v == 0.0);

    SpaceTimeSolution linear =
        sample_solution([](const Vec&, double t) { return 4.5 * t; }, g);
    ut = time_derivative(linear, 25);
    for (double v : ut.values()) CHECK(v == doctest::Approx(4.5).epsilon(1e-11));

    // u = t^2: backward difference at t = -0.5 (level 10) is 2t - dt = -1.01
    SpaceTimeSolution sq =
        sample_solution([](const Vec&, double t) { return t * t; }, g);
    CHECK(g.time(10) == doctest::Approx(-0.5));
    ut = time_derivative(sq, 10);
    for (double v : ut.values()) CHECK(v == doctest::Approx(-1.01).epsilon(1e-10));

    CHECK_THROWS_AS(time_derivative(sq, 0), Error);
}

TEST_CASE("sup norm on cylinders") {
    Grid g(2, 1.0, 0.125, 0.01, {-1.0, 0.0});

    Field zero(g);
    CHECK(sup_norm_on_cylinder(zero, 0.5) == 0.0);

    Field c = sample([](const Vec&, double) { return -3.0; }, g, 0.0);
    CHECK(sup_norm_on_cylinder(c, 0.5) == 3.0);

    // exact solution's time derivative on Q_{1/2}
    SpaceTimeSolution u = sample_solution(
        [](const Vec& x, double t) { return std::pow(x.norm(), 1.5) + 4.5 * t; }, g);
    CHECK(sup_time_derivative_on_cylinder(u, 0.5) == doctest::Approx(4.5).epsilon(1e-11));

    // monotone in r
    Field wavy = sample(
        [](const Vec& x, double) { return std::sin(5 * x[0]) + x[1] * x[1]; }, g, 0.0);
    double prev = 0.0;
    for (double r : {0.25, 0.5, 0.75, 1.0}) {
        const double s = sup_norm_on_cylinder(wavy, r);
        CHECK(s >= prev);
        prev = s;
    }

    CHECK_THROWS_AS(sup_norm_on_cylinder(zero, 2.0), Error);
    // no time levels inside (-r^2, 0]
    Grid late(2, 1.0, 0.5, 0.05, {-1.0, -0.5});
    SpaceTimeSolution v = sample_solution([](const Vec&, double) { return 1.0; }, late);
    CHECK_THROWS_AS(sup_norm_on_cylinder(v, 0.5), Error);
}
