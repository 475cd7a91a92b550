#include <doctest.h>

#include <cmath>

#include "degenlab/exact.hpp"
#include "degenlab/rng.hpp"

using namespace degenlab;

TEST_CASE("family constants") {
    // c_{2,3} = 2 (3/2)^2 = 4.5
    const auto plap = ExactSolution::p_laplace_radial(2, 3.0);
    CHECK(plap.time_slope() == doctest::Approx(4.5).epsilon(1e-13));
    // C(2,1) = (3/2)^2 (1 + 1/2) = 3.375
    const auto fn = ExactSolution::fully_nonlinear_radial(2, 1.0);
    CHECK(fn.time_slope() == doctest::Approx(3.375).epsilon(1e-13));
}

TEST_CASE("gradient magnitude") {
    const auto plap = ExactSolution::p_laplace_radial(2, 3.0);
    const Vec x(0.3, 0.4);
    CHECK(plap.gradient(x, 0.0).norm() ==
          doctest::Approx(1.5 * std::sqrt(0.5)).epsilon(1e-13));
}

TEST_CASE("derivatives match central differences of the value") {
    SplitMix64 rng(5);
    for (const auto& sol : {ExactSolution::p_laplace_radial(2, 3.0),
                            ExactSolution::fully_nonlinear_radial(2, 1.5)}) {
        for (int s = 0; s < 50; ++s) {
            const double r = rng.uniform(0.3, 0.9);
            const double th = rng.uniform(0, 2 * M_PI);
            const Vec x(r * std::cos(th), r * std::sin(th));
            const double t = rng.uniform(-1.0, 0.0);
            const double h = 1e-5;
            const ExactJet jet = evaluate_exact(sol, x, t);
            for (int k = 0; k < 2; ++k) {
                Vec xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                const double fd =
                    (sol.value(xp, t) - sol.value(xm, t)) / (2 * h);
                CHECK(jet.gradient[k] == doctest::Approx(fd).epsilon(1e-7));
                const Vec gp = sol.gradient(xp, t), gm = sol.gradient(xm, t);
                for (int l = k; l < 2; ++l)
                    CHECK(jet.hessian(k, l) ==
                          doctest::Approx((gp[l] - gm[l]) / (2 * h)).epsilon(1e-6));
            }
            const double ft =
                (sol.value(x, t + h) - sol.value(x, t - h)) / (2 * h);
            CHECK(jet.ut == doctest::Approx(ft).epsilon(1e-9));
        }
    }
}

TEST_CASE("hessian singular at the center") {
    const auto plap = ExactSolution::p_laplace_radial(2, 3.0);
    CHECK_THROWS_AS(plap.hessian(Vec::zero(2), 0.0), SingularityError);
    CHECK(plap.gradient(Vec::zero(2), 0.0).norm() == 0.0);
    CHECK(plap.value(Vec::zero(2), -1.0) == doctest::Approx(-4.5));
}

TEST_CASE("residual oracle") {
    SplitMix64 rng(9);
    const auto plap = ExactSolution::p_laplace_radial(2, 3.0);
    const auto p0 = CoefficientParams::p_laplace(3.0, 0.0);
    const auto fn = ExactSolution::fully_nonlinear_radial(2, 1.0);
    const auto f0 =
        CoefficientParams::fully_nonlinear(1.0, SmoothOperatorF::trace(2), 0.0);
    for (int s = 0; s < 100; ++s) {
        const double r = rng.uniform(0.3, 0.9);
        const double th = rng.uniform(0, 2 * M_PI);
        const Vec x(r * std::cos(th), r * std::sin(th));
        const double t = rng.uniform(-1.0, 0.0);
        CHECK(std::abs(residual_oracle(plap, p0, x, t)) < 1e-12);
        CHECK(std::abs(residual_oracle(fn, f0, x, t)) < 1e-12);
    }

    // eps = 0.1 regularization error, pinned once from the analytic evaluator
    const auto p01 = CoefficientParams::p_laplace(3.0, 0.1);
    CHECK(residual_oracle(plap, p01, Vec(0.3, 0.4), -0.25) ==
          doctest::Approx(-0.0099999023218107).epsilon(1e-10));
}

TEST_CASE("affine reparameterizations keep zero residual") {
    SplitMix64 rng(13);
    const auto base = ExactSolution::p_laplace_radial(2, 2.5);
    const auto params = CoefficientParams::p_laplace(2.5, 0.0);
    const auto moved = base.translated(Vec(0.2, -0.1), -0.3, 1.7);
    for (int s = 0; s < 50; ++s) {
        const double r = rng.uniform(0.3, 0.9);
        const double th = rng.uniform(0, 2 * M_PI);
        const Vec x(0.2 + r * std::cos(th), -0.1 + r * std::sin(th));
        CHECK(std::abs(residual_oracle(moved, params, x, rng.uniform(-1, 0))) < 1e-12);
    }
    CHECK(moved.ut() == base.ut());
}

TEST_CASE("barrier construction and verification") {
    const auto params = CoefficientParams::p_laplace(3.0, 0.1);

    // phi = 0, bound 0: some pair passes all three sampled conditions
    const auto zero = BoundaryDatum::zero(2);
    const Barrier b0 = build_barrier(zero, params, 0.0, 1.0 / 16);
    const BarrierReport r0 = verify_barrier(b0, params, 0.0, 1.0 / 16);
    CHECK(r0.pass());

    // touching property at the origin: v(0, 0) = phi(0, 0)
    CHECK(b0.value(Vec::zero(2), 0.0) == doctest::Approx(0.0).epsilon(1e-14));

    // phi = x1, bound 1 (coarser sample keeps this test quick)
    const auto x1 = BoundaryDatum::coordinate(2, 0);
    std::vector<BarrierSearchTrace> trace;
    const Barrier b1 = build_barrier(x1, params, 1.0, 1.0 / 16, &trace);
    const BarrierReport r1 = verify_barrier(b1, params, 1.0, 1.0 / 16);
    CHECK(r1.supersolution_defect >= -1e-8);
    CHECK(r1.flat_boundary_margin >= -1e-8);
    CHECK(r1.outer_boundary_margin >= -1e-8);
    CHECK(b1.value(Vec::zero(2), 0.0) == doctest::Approx(0.0).epsilon(1e-14));

    // an A far below the found threshold fails the supersolution condition
    const Barrier weak{b1.A / 1024.0, b1.beta, x1};
    const BarrierReport rw = verify_barrier(weak, params, 1.0, 1.0 / 16);
    CHECK(rw.supersolution_defect < 0.0);

    // doubling bound_u never decreases the returned A
    const Barrier b2 = build_barrier(x1, params, 2.0, 1.0 / 16);
    CHECK(b2.A >= b1.A);

    // an unreachable bound exhausts the doubling search
    CHECK_THROWS_AS(build_barrier(x1, params, 1e8, 1.0 / 4), Error);
}

TEST_CASE("analytic intrinsic rescale has zero residual") {
    SplitMix64 rng(21);
    const auto sol = ExactSolution::p_laplace_radial(2, 3.0);
    const auto params = CoefficientParams::p_laplace(3.0, 0.0);
    for (int s = 0; s < 100; ++s) {
        const double r = rng.uniform(0.3, 0.9);
        const double th = rng.uniform(0, 2 * M_PI);
        const Vec x(r * std::cos(th), r * std::sin(th));
        CHECK(std::abs(rescaled_residual(sol, params, 0.5, 2.0, x,
                                         rng.uniform(-1, 0))) < 1e-10);
    }
    // r = rho = 1 reduces to the plain residual
    CHECK(std::abs(rescaled_residual(sol, params, 1.0, 1.0, Vec(0.5, 0.0), -0.5)) <
          1e-12);
}
