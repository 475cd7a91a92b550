#include <doctest.h>

#include <cmath>

#include "degenlab/coefficients.hpp"
#include "degenlab/rng.hpp"

using namespace degenlab;

TEST_CASE("a_tensor closed forms") {
    // p = 2 reduces to the identity for any q and epsilon
    auto heat = CoefficientParams::p_laplace(2.0, 0.3);
    SymMat a = a_tensor(heat, Vec(0.7, -1.2));
    CHECK(a(0, 0) == doctest::Approx(1.0));
    CHECK(a(1, 1) == doctest::Approx(1.0));
    CHECK(a(0, 1) == doctest::Approx(0.0));

    // q = 0: eps^{p-2} I
    auto p3 = CoefficientParams::p_laplace(3.0, 0.2);
    a = a_tensor(p3, Vec::zero(2));
    CHECK(a(0, 0) == doctest::Approx(0.2));
    CHECK(a(1, 1) == doctest::Approx(0.2));
    CHECK(a(0, 1) == doctest::Approx(0.0));

    // p = 4, eps = 0, q = e1: diag(3, 1)
    auto p4 = CoefficientParams::p_laplace(4.0, 0.0);
    a = a_tensor(p4, Vec(1.0, 0.0));
    CHECK(a(0, 0) == doctest::Approx(3.0));
    CHECK(a(1, 1) == doctest::Approx(1.0));
    CHECK(a(0, 1) == doctest::Approx(0.0));

    // singular case
    auto p15 = CoefficientParams::p_laplace(1.5, 0.0);
    CHECK_THROWS_AS(a_tensor(p15, Vec::zero(2)), SingularityError);
}

TEST_CASE("ellipticity sandwich on random samples") {
    SplitMix64 rng(7);
    for (double p : {2.5, 3.0, 4.0, 5.5}) {
        const auto params = CoefficientParams::p_laplace(p, 0.1);
        const auto ell = ellipticity_of(params);
        for (int s = 0; s < 500; ++s) {
            const Vec q(rng.uniform(-2, 2), rng.uniform(-2, 2));
            const double pref =
                std::pow(params.epsilon * params.epsilon + q.norm_sq(), 0.5 * (p - 2));
            const auto ev = a_tensor(params, q).eigenvalues();
            CHECK(ev[0] >= ell.lambda * pref * (1 - 1e-12));
            CHECK(ev[1] <= ell.Lambda * pref * (1 + 1e-12));
        }
    }
}

TEST_CASE("a_tensor_gradient against central differences") {
    auto check_fd = [](const CoefficientParams& params, const Vec& q) {
        const auto grad = a_tensor_gradient(params, q);
        const double h = 1e-5;
        for (int l = 0; l < 2; ++l) {
            Vec qp = q, qm = q;
            qp[l] += h;
            qm[l] -= h;
            const SymMat fd = (a_tensor(params, qp) - a_tensor(params, qm)) * (0.5 / h);
            for (int i = 0; i < 2; ++i)
                for (int j = i; j < 2; ++j)
                    CHECK(grad[l](i, j) == doctest::Approx(fd(i, j)).epsilon(1e-6));
        }
    };
    check_fd(CoefficientParams::p_laplace(3.0, 0.1), Vec(0.3, -0.2));
    check_fd(CoefficientParams::p_laplace(4.5, 0.05), Vec(-0.8, 0.4));
    check_fd(CoefficientParams::general_quasilinear(1.5, 2.5, 0.1), Vec(0.3, -0.2));

    // p = 2: a is the constant identity
    const auto heat = CoefficientParams::p_laplace(2.0, 0.1);
    for (const auto& d : a_tensor_gradient(heat, Vec(0.4, 0.9)))
        CHECK(d.frobenius() == doctest::Approx(0.0).epsilon(1e-14));

    // q = 0: odd symmetry kills every term
    const auto p3 = CoefficientParams::p_laplace(3.0, 0.2);
    for (const auto& d : a_tensor_gradient(p3, Vec::zero(2)))
        CHECK(d.frobenius() == doctest::Approx(0.0).epsilon(1e-14));

    CHECK_THROWS_AS(
        a_tensor_gradient(CoefficientParams::p_laplace(3.0, 0.0), Vec::zero(2)),
        SingularityError);
}

TEST_CASE("derivative growth law has exponent p-3") {
    // log-log slope of max_l ||d a/d q_l||_F against sqrt(eps^2+s^2)
    SplitMix64 rng(11);
    for (double p : {2.5, 4.0}) {
        const double eps = 0.01;
        const auto params = CoefficientParams::p_laplace(p, eps);
        std::vector<double> lx, ly;
        for (double s = 10 * eps; s < 2000 * eps; s *= 2.0) {
            double worst = 0.0;
            for (int k = 0; k < 64; ++k) {
                const double th = rng.uniform(0, 2 * M_PI);
                const Vec q(s * std::cos(th), s * std::sin(th));
                for (const auto& d : a_tensor_gradient(params, q))
                    worst = std::max(worst, d.frobenius());
            }
            lx.push_back(std::log(std::sqrt(eps * eps + s * s)));
            ly.push_back(std::log(worst));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = lx.size();
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope == doctest::Approx(p - 3.0).epsilon(0.05));
    }
}

TEST_CASE("pucci extremal operators") {
    const EllipticityPair ell(1.0, 2.0);
    CHECK(pucci_plus(ell, SymMat::zero(2)) == 0.0);
    CHECK(pucci_minus(ell, SymMat::zero(2)) == 0.0);

    SymMat m(2);
    m.set(0, 0, 1.0);
    m.set(1, 1, -1.0);
    CHECK(pucci_plus(ell, m) == doctest::Approx(1.0));
    CHECK(pucci_minus(ell, m) == doctest::Approx(-1.0));

    CHECK(pucci_plus(ell, SymMat::identity(2)) == doctest::Approx(4.0));
    CHECK(pucci_minus(ell, SymMat::identity(2)) == doctest::Approx(2.0));
}

namespace {

SymMat random_sym(SplitMix64& rng, double scale = 1.0) {
    SymMat m(2);
    m.set(0, 0, rng.uniform(-scale, scale));
    m.set(1, 1, rng.uniform(-scale, scale));
    m.set(0, 1, rng.uniform(-scale, scale));
    return m;
}

}  // namespace

TEST_CASE("smooth operators: trace and bellman") {
    auto tr = SmoothOperatorF::trace(2);
    SymMat m(2);
    m.set(0, 0, 1.0);
    m.set(1, 1, -1.0);
    CHECK(tr(m) == doctest::Approx(0.0));
    CHECK(tr(SymMat::identity(2)) == doctest::Approx(2.0));

    SymMat d21 = SymMat::identity(2);
    d21.set(0, 0, 2.0);
    const double scale = 0.25;
    auto bell = SmoothOperatorF::bellman_smooth({SymMat::identity(2), d21}, scale);
    CHECK(bell(SymMat::zero(2)) == 0.0);
    CHECK(bell.ellipticity().lambda == doctest::Approx(1.0));
    CHECK(bell.ellipticity().Lambda == doctest::Approx(2.0));

    SplitMix64 rng(3);
    for (int s = 0; s < 2000; ++s) {
        const SymMat M = random_sym(rng, 2.0);
        const double exact = std::max(M.trace(), d21.contract(M));
        // soft-max sits within scale*log 2 of the max, shifted by the F(0) = 0
        // normalization
        CHECK(std::abs(bell(M) - exact) <= scale * std::log(2.0) + 1e-12);
    }

    // Pucci sandwich (uniform ellipticity) on random pairs, for both instances
    for (const auto& F : {tr, bell}) {
        SplitMix64 r2(17);
        for (int s = 0; s < 10000; ++s) {
            const SymMat M = random_sym(r2, 2.0), N = random_sym(r2, 2.0);
            const double diff = F(M) - F(N);
            CHECK(diff >= pucci_minus(F.ellipticity(), M - N) - 1e-9);
            CHECK(diff <= pucci_plus(F.ellipticity(), M - N) + 1e-9);
        }
    }

    // convexity of the soft-max
    SplitMix64 r3(23);
    for (int s = 0; s < 2000; ++s) {
        const SymMat M = random_sym(r3, 2.0), N = random_sym(r3, 2.0);
        const SymMat mid = (M + N) * 0.5;
        CHECK(bell(mid) <= 0.5 * (bell(M) + bell(N)) + 1e-12);
    }
}

TEST_CASE("degenerate multiplier") {
    // gamma = 0 returns 1 for every q
    auto g0 = CoefficientParams::fully_nonlinear(0.0, SmoothOperatorF::trace(2), 0.0);
    CHECK(degenerate_multiplier(g0, Vec(0.3, 0.4)) == doctest::Approx(1.0));
    CHECK(degenerate_multiplier(g0, Vec::zero(2)) == doctest::Approx(1.0));

    auto g1 = CoefficientParams::fully_nonlinear(1.0, SmoothOperatorF::trace(2), 0.0);
    CHECK(degenerate_multiplier(g1, Vec(0.0, 2.0)) == doctest::Approx(2.0));

    auto g2 = CoefficientParams::fully_nonlinear(2.0, SmoothOperatorF::trace(2), 0.1);
    CHECK(degenerate_multiplier(g2, Vec::zero(2)) == doctest::Approx(0.01));

    auto neg = CoefficientParams::fully_nonlinear(-0.5, SmoothOperatorF::trace(2), 0.0);
    CHECK_THROWS_AS(degenerate_multiplier(neg, Vec::zero(2)), SingularityError);
}

TEST_CASE("ellipticity_of") {
    auto check_pair = [](double p, double lo, double hi) {
        const auto ell = ellipticity_of(CoefficientParams::p_laplace(p, 0.1));
        CHECK(ell.lambda == doctest::Approx(lo));
        CHECK(ell.Lambda == doctest::Approx(hi));
    };
    check_pair(3.0, 1.0, 2.0);
    check_pair(1.5, 0.5, 1.0);
    check_pair(2.0, 1.0, 1.0);
}
