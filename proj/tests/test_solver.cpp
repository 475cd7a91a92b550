#include <doctest.h>

#include <cmath>

#include "degenlab/solver.hpp"

using namespace degenlab;

namespace {

ProblemSpec exact_spec(double p, double eps, double extent, double h, int out_levels) {
    const auto sol = ExactSolution::p_laplace_radial(2, p);
    const double t_start = -extent * extent;
    Grid g(2, extent, h, -t_start / out_levels, {t_start, 0.0});
    auto params = CoefficientParams::p_laplace(p, eps);
    auto data = ProblemData::from_exact(sol, t_start);
    const double cap = suggest_gradient_cap(data, g);
    return ProblemSpec(std::move(params), std::move(g), std::move(data), cap);
}

}  // namespace

TEST_CASE("cfl_dt closed forms") {
    // heat equation, dim 1
    CHECK(cfl_dt(CoefficientParams::p_laplace(2.0, 0.0), 1, 0.1, 5.0) ==
          doctest::Approx(2e-3).epsilon(1e-13));
    // p = 3, eps = 0.1, G = 1, dim 2, h = 0.05
    CHECK(cfl_dt(CoefficientParams::p_laplace(3.0, 0.1), 2, 0.05, 1.0) ==
          doctest::Approx(0.4 * 0.0025 / (8.0 * std::sqrt(1.01))).epsilon(1e-12));
    // doubling G with p > 2 strictly decreases dt
    const auto p3 = CoefficientParams::p_laplace(3.0, 0.1);
    CHECK(cfl_dt(p3, 2, 0.05, 2.0) < cfl_dt(p3, 2, 0.05, 1.0));
}

TEST_CASE("affine states are static") {
    Grid g(2, 0.5, 0.125, 0.01, {-0.1, 0.0});
    auto params = CoefficientParams::p_laplace(3.0, 0.1);
    SpaceTimeFn f = [](const Vec& x, double) { return 0.3 * x[0] - 0.7 * x[1] + 2.0; };
    ProblemSpec spec(params, g, ProblemData::from_function(f, g.t_start()), 2.0);
    const Field u0 = sample(f, g, g.t_start());
    const Field u1 = step(u0, g.t_start(), spec, 0.01);
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i)
            CHECK(u1(i, j) == doctest::Approx(u0(i, j)).epsilon(1e-13));
}

TEST_CASE("heat step damps the sine eigenfunction") {
    Grid g(1, 1.0, 0.05, 5e-4, {-0.1, 0.0});
    auto params = CoefficientParams::p_laplace(2.0, 0.1);
    SpaceTimeFn f = [](const Vec& x, double) { return std::sin(M_PI * x[0]); };
    ProblemSpec spec(params, g, ProblemData::from_function(f, g.t_start()), 5.0);
    const double dt = 5e-4;
    const Field u0 = sample(f, g, g.t_start());
    const Field u1 = step(u0, g.t_start(), spec, dt);
    for (int i = 1; i < g.nodes(0) - 1; ++i) {
        if (std::abs(u0(i)) < 0.1) continue;
        CHECK(u1(i) / u0(i) == doctest::Approx(1.0 - M_PI * M_PI * dt).epsilon(3e-5));
    }
}

TEST_CASE("one step from exact data stays near the exact solution") {
    const ProblemSpec spec = exact_spec(3.0, 0.05, 0.75, 1.0 / 32, 100);
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    const Grid& g = spec.grid;
    const double dt = cfl_dt(spec.params, 2, g.h(), spec.gradient_cap);
    const Field u0 = sample(sol.as_function(), g, g.t_start());
    const Field u1 = step(u0, g.t_start(), spec, dt);
    double err = 0.0;
    for (int j = 1; j < g.nodes(1) - 1; ++j)
        for (int i = 1; i < g.nodes(0) - 1; ++i)
            err = std::max(err,
                           std::abs(u1(i, j) - sol.value(g.node(i, j), g.t_start() + dt)));
    // one Euler step: dt times (regularization + stencil truncation) only
    CHECK(err <= 10.0 * dt);
}

TEST_CASE("constant data stays constant") {
    Grid g(2, 0.5, 0.125, 0.025, {-0.25, 0.0});
    ProblemSpec spec(CoefficientParams::p_laplace(3.0, 0.1), g, ProblemData::constant(2.5),
                     1.0);
    const SolveReport rep = solve(spec);
    REQUIRE(!rep.diverged);
    for (int k = 0; k < rep.solution->level_count(); ++k)
        for (double v : rep.solution->level(k).values())
            CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(rep.max_observed_gradient == doctest::Approx(0.0));
}

TEST_CASE("exact-data solve: pinned final-time error") {
    // Reference-run regression pin for (p, eps, h) = (3, 0.05, 1/32) on Q_{3/4};
    // the error concentrates at the degeneracy point.
    const SolveReport rep = solve(exact_spec(3.0, 0.05, 0.75, 1.0 / 32, 500));
    REQUIRE(!rep.diverged);
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    const Grid& g = rep.solution->grid();
    const Field& fin = rep.solution->level(rep.solution->level_count() - 1);
    double err = 0.0;
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i)
            err = std::max(err, std::abs(fin(i, j) - sol.value(g.node(i, j), 0.0)));
    CHECK(err <= 0.05);
}

TEST_CASE("fully nonlinear trace run reproduces C(2,1)") {
    const auto sol = ExactSolution::fully_nonlinear_radial(2, 1.0);
    const double extent = 0.75, h = 1.0 / 16, t_start = -extent * extent;
    Grid g(2, extent, h, -t_start / 250, {t_start, 0.0});
    auto params = CoefficientParams::fully_nonlinear(1.0, SmoothOperatorF::trace(2), 0.1);
    auto data = ProblemData::from_exact(sol, t_start);
    const double cap = suggest_gradient_cap(data, g);
    const SolveReport rep = solve(ProblemSpec(params, g, data, cap));
    REQUIRE(!rep.diverged);
    const double sup = sup_time_derivative_on_cylinder(*rep.solution, 0.5);
    CHECK(sup == doctest::Approx(3.375).epsilon(0.10));
}

TEST_CASE("general quasilinear with gamma = p-2 matches the p-Laplace flow") {
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    Grid g(2, 0.5, 1.0 / 16, 0.25 / 50, {-0.25, 0.0});
    auto data = ProblemData::from_exact(sol, g.t_start());
    const double cap = suggest_gradient_cap(data, g);
    const SolveReport a =
        solve(ProblemSpec(CoefficientParams::p_laplace(3.0, 0.1), g, data, cap));
    const SolveReport b = solve(
        ProblemSpec(CoefficientParams::general_quasilinear(1.0, 3.0, 0.1), g, data, cap));
    REQUIRE(!a.diverged);
    REQUIRE(!b.diverged);
    CHECK(a.dt_used == b.dt_used);
    for (int k = 0; k < a.solution->level_count(); ++k)
        CHECK(a.solution->level(k).values() == b.solution->level(k).values());
}

TEST_CASE("epsilon sweep on constant data") {
    Grid g(2, 0.75, 0.25, 0.05625, {-0.5625, 0.0});
    ProblemSpec tmpl(CoefficientParams::p_laplace(3.0, 0.2), g, ProblemData::constant(1.0),
                     1.0);
    const auto entries = epsilon_sweep(tmpl, {0.2, 0.1, 0.05});
    for (const auto& e : entries) {
        CHECK(!e.report.diverged);
        CHECK(e.sup_ut_half == doctest::Approx(0.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(epsilon_sweep(tmpl, {0.1, 0.2}), Error);
}

TEST_CASE("discrete comparison principle") {
    // dominating data -> dominating solutions, three data pairs
    const double extent = 0.5, h = 1.0 / 16, t_start = -0.25;
    Grid g(2, extent, h, 0.25 / 50, {t_start, 0.0});
    const auto params = CoefficientParams::p_laplace(3.0, 0.1);
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);

    auto run = [&](const SpaceTimeFn& f, double cap) {
        ProblemSpec spec(params, g, ProblemData::from_function(f, t_start), cap);
        SolveReport rep = solve(spec);
        REQUIRE(!rep.diverged);
        return *rep.solution;
    };
    auto dominates = [&](const SpaceTimeSolution& a, const SpaceTimeSolution& b) {
        for (int k = 0; k < a.level_count(); ++k)
            for (long n = 0; n < g.node_count(); ++n)
                if (a.level(k).values()[n] < b.level(k).values()[n] - 1e-10) return false;
        return true;
    };

    SpaceTimeFn base = sol.as_function();
    SpaceTimeFn shifted = [&](const Vec& x, double t) { return sol.value(x, t) + 0.5; };
    SpaceTimeFn tilted = [&](const Vec& x, double t) {
        return sol.value(x, t) + 0.05 * (2.0 + x[0]);
    };
    SpaceTimeFn cosine = [](const Vec& x, double) {
        return std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]);
    };
    SpaceTimeFn cosine_low = [&](const Vec& x, double t) { return cosine(x, t) - 0.3; };

    CHECK(dominates(run(shifted, 2.0), run(base, 2.0)));
    CHECK(dominates(run(tilted, 2.1), run(base, 2.1)));
    CHECK(dominates(run(cosine, 4.2), run(cosine_low, 4.2)));
}

TEST_CASE("step throws on non-finite values") {
    Grid g(2, 0.5, 0.125, 0.025, {-0.25, 0.0});
    SpaceTimeFn huge = [](const Vec& x, double) { return 1e200 * x[0]; };
    ProblemSpec spec(CoefficientParams::p_laplace(3.0, 0.1), g,
                     ProblemData::from_function(huge, g.t_start()), 1e280);
    const Field u0 = sample(huge, g, g.t_start());
    CHECK_THROWS_AS(step(u0, g.t_start(), spec, 0.025), DivergenceError);
}

TEST_CASE("gradient cap violation aborts loudly") {
    Grid g(2, 0.5, 0.125, 0.025, {-0.25, 0.0});
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    ProblemSpec spec(CoefficientParams::p_laplace(3.0, 0.1), g,
                     ProblemData::from_exact(sol, g.t_start()), 0.01);
    const SolveReport rep = solve(spec);
    CHECK(rep.diverged);
    CHECK(!rep.solution.has_value());
    CHECK(rep.divergence_note.find("cap") != std::string::npos);
}

TEST_CASE("solve is deterministic") {
    const ProblemSpec spec = exact_spec(3.0, 0.1, 0.5, 1.0 / 16, 50);
    const SolveReport a = solve(spec), b = solve(spec);
    REQUIRE(!a.diverged);
    REQUIRE(!b.diverged);
    for (int k = 0; k < a.solution->level_count(); ++k)
        CHECK(a.solution->level(k).values() == b.solution->level(k).values());
    CHECK(a.max_observed_gradient == b.max_observed_gradient);
}

TEST_CASE("intrinsic rescale") {
    const double extent = 0.5, t_start = -0.25;
    Grid src(2, extent, 1.0 / 16, 0.25 / 64, {t_start, 0.0});

    // identity transform on the matching grid
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    const SpaceTimeSolution u = sample_solution(sol.as_function(), src);
    const auto params = CoefficientParams::p_laplace(3.0, 0.1);
    const SpaceTimeSolution same = intrinsic_rescale(u, params, 1.0, 1.0, src);
    for (int k = 0; k < u.level_count(); ++k)
        for (long n = 0; n < src.node_count(); ++n)
            CHECK(same.level(k).values()[n] ==
                  doctest::Approx(u.level(k).values()[n]).epsilon(1e-12));

    // gradient chain rule: Dv(x) = rho^{-1} Du(r x) to discretization order
    const double r = 0.5, rho = 2.0;
    Grid tgt(2, 1.0, 1.0 / 16, 0.25 / 64, {-0.25, 0.0});
    const SpaceTimeSolution v = intrinsic_rescale(u, params, r, rho, tgt);
    const Field& vf = v.level(v.level_count() - 1);
    for (int j = 2; j < tgt.nodes(1) - 2; ++j)
        for (int i = 2; i < tgt.nodes(0) - 2; ++i) {
            const Vec x = tgt.node(i, j);
            if (x.norm() < 0.4) continue;  // interpolation error peaks at the cusp
            const Vec expected = sol.gradient(x * r, 0.0) * (1.0 / rho);
            const Vec got = gradient_at(vf, i, j);
            CHECK(std::abs(got[0] - expected[0]) < 0.02);
            CHECK(std::abs(got[1] - expected[1]) < 0.02);
        }

    // out-of-cylinder sampling is rejected
    Grid wide(2, 1.0, 1.0 / 16, 1.0 / 64, {-1.0, 0.0});
    CHECK_THROWS_AS(intrinsic_rescale(u, params, 1.5, 1.0, wide), Error);
}
