#include "degenlab/exact.hpp"

#include <cmath>
#include <limits>

namespace degenlab {

ExactSolution::ExactSolution(Kind k, int n, double param)
    : kind_(k), n_(n), param_(param), x0_(Vec::zero(2)) {
    if (n < 1) throw Error("ExactSolution: n must be >= 1");
    if (k == Kind::PLaplaceRadial) {
        if (!(param > 2.0)) throw Error("ExactSolution: p must exceed 2");
        const double pp = param / (param - 1.0);
        a_ = pp;
        c_ = n * std::pow(pp, param - 1.0);
    } else {
        if (!(param > 0.0)) throw Error("ExactSolution: gamma must be positive");
        const double b = 1.0 + 1.0 / (1.0 + param);
        a_ = b;
        c_ = std::pow(b, 1.0 + param) * (n - 1.0 + 1.0 / (1.0 + param));
    }
}

ExactSolution ExactSolution::p_laplace_radial(int n, double p) {
    return ExactSolution(Kind::PLaplaceRadial, n, p);
}

ExactSolution ExactSolution::fully_nonlinear_radial(int n, double gamma) {
    return ExactSolution(Kind::FullyNonlinearRadial, n, gamma);
}

ExactSolution ExactSolution::translated(const Vec& x0, double t0, double shift) const {
    ExactSolution s = *this;
    s.x0_ = x0;
    s.t0_ = t0;
    s.shift_ = shift;
    return s;
}

ExactSolution ExactSolution::scaled(double kappa) const {
    if (!(kappa > 0.0)) throw Error("ExactSolution: amplitude must be positive");
    ExactSolution s = *this;
    s.amp_ = amp_ * kappa;
    // Delta_p(kappa f) = kappa^(p-1) Delta_p f; |D(kappa f)|^gamma tr = kappa^(1+gamma).
    const double hom = kind_ == Kind::PLaplaceRadial ? param_ - 1.0 : 1.0 + param_;
    s.c_ = c_ * std::pow(kappa, hom);
    return s;
}

double ExactSolution::value(const Vec& x, double t) const {
    Vec y = x;
    for (int i = 0; i < x.dim(); ++i) y[i] -= x0_[i];
    return amp_ * std::pow(y.norm(), a_) + c_ * (t - t0_) + shift_;
}

Vec ExactSolution::gradient(const Vec& x, double t) const {
    (void)t;
    Vec y = x;
    for (int i = 0; i < x.dim(); ++i) y[i] -= x0_[i];
    const double r = y.norm();
    if (r == 0.0) return Vec::zero(x.dim());  // |grad| = amp a r^(a-1) -> 0
    return (amp_ * a_ * std::pow(r, a_ - 2.0)) * y;
}

SymMat ExactSolution::hessian(const Vec& x, double t) const {
    (void)t;
    Vec y = x;
    for (int i = 0; i < x.dim(); ++i) y[i] -= x0_[i];
    const double r = y.norm();
    if (r == 0.0)
        throw SingularityError("ExactSolution: Hessian is singular at the center");
    const Vec yh = y * (1.0 / r);
    const double k = amp_ * a_ * std::pow(r, a_ - 2.0);
    return k * (SymMat::identity(x.dim()) + (a_ - 2.0) * SymMat::outer(yh));
}

SpaceTimeFn ExactSolution::as_function() const {
    ExactSolution copy = *this;
    return [copy](const Vec& x, double t) { return copy.value(x, t); };
}

ExactJet evaluate_exact(const ExactSolution& sol, const Vec& x, double t) {
    return ExactJet{sol.value(x, t), sol.gradient(x, t), sol.hessian(x, t), sol.ut()};
}

namespace {

double equation_value(const CoefficientParams& params, const Vec& q, const SymMat& M) {
    if (params.family == Family::FullyNonlinear) {
        if (!params.F) throw Error("equation_value: missing F instance");
        return degenerate_multiplier(params, q) * (*params.F)(M);
    }
    return a_tensor(params, q).contract(M);
}

}  // namespace

double residual_oracle(const ExactSolution& sol, const CoefficientParams& params,
                       const Vec& x, double t) {
    const ExactJet jet = evaluate_exact(sol, x, t);
    return jet.ut - equation_value(params, jet.gradient, jet.hessian);
}

// --- boundary datum ----------------------------------------------------------

BoundaryDatum BoundaryDatum::zero(int dim) {
    return BoundaryDatum{
        [](const Vec&, double) { return 0.0; },
        [dim](const Vec&, double) { return Vec::zero(dim); },
        [dim](const Vec&, double) { return SymMat::zero(dim); },
        [](const Vec&, double) { return 0.0; },
    };
}

BoundaryDatum BoundaryDatum::coordinate(int dim, int axis) {
    if (axis < 0 || axis >= dim) throw Error("BoundaryDatum: axis out of range");
    return BoundaryDatum{
        [axis](const Vec& x, double) { return x[axis]; },
        [dim, axis](const Vec&, double) {
            Vec g = Vec::zero(dim);
            g[axis] = 1.0;
            return g;
        },
        [dim](const Vec&, double) { return SymMat::zero(dim); },
        [](const Vec&, double) { return 0.0; },
    };
}

// --- barrier ------------------------------------------------------------------

namespace {

// y = x + e_n; dimension follows x.
Vec shifted(const Vec& x) {
    Vec y = x;
    y[x.dim() - 1] += 1.0;
    return y;
}

}  // namespace

double Barrier::value(const Vec& x, double t) const {
    const double r = shifted(x).norm();
    return A * (1.0 - std::pow(r, -beta)) - A * t + phi.value(x, t);
}

Vec Barrier::gradient(const Vec& x, double t) const {
    const Vec y = shifted(x);
    const double r = y.norm();
    return (A * beta * std::pow(r, -beta - 2.0)) * y + phi.grad(x, t);
}

SymMat Barrier::hessian(const Vec& x, double t) const {
    const Vec y = shifted(x);
    const double r = y.norm();
    const double k = A * beta * std::pow(r, -beta - 2.0);
    return k * SymMat::identity(x.dim()) -
           (A * beta * (beta + 2.0) * std::pow(r, -beta - 4.0)) * SymMat::outer(y) +
           phi.hess(x, t);
}

double Barrier::time_deriv(const Vec& x, double t) const {
    return -A + phi.time_deriv(x, t);
}

double Barrier::boundary_lipschitz(double sample_h) const {
    double dn = 0.0;
    const int m = static_cast<int>(std::round(1.0 / sample_h));
    for (int j = 0; j <= m; ++j)
        for (int i = -m; i <= m; ++i) {
            const Vec x(i * sample_h, j * sample_h);
            dn = std::max(dn, std::abs(phi.grad(x, 0.0)[1]));
        }
    return A * beta + dn;
}

BarrierReport verify_barrier(const Barrier& b, const CoefficientParams& params,
                             double bound_u, double sample_h) {
    if (!(b.A > 0.0) || !(b.beta > 0.0))
        throw Error("verify_barrier: A and beta must be positive");
    const int m = static_cast<int>(std::round(1.0 / sample_h));
    BarrierReport rep;
    rep.supersolution_defect = std::numeric_limits<double>::infinity();
    rep.flat_boundary_margin = rep.supersolution_defect;
    rep.outer_boundary_margin = rep.supersolution_defect;
    // Uniform sample of the closed half cylinder {|x|_inf <= 1, x_n >= 0} x [-1, 0].
    for (int k = 0; k <= m; ++k) {
        const double t = -1.0 + k * sample_h;
        for (int j = 0; j <= m; ++j)
            for (int i = -m; i <= m; ++i) {
                const Vec x(i * sample_h, j * sample_h);
                ++rep.sample_count;
                if (j == 0) {
                    rep.flat_boundary_margin = std::min(
                        rep.flat_boundary_margin, b.value(x, t) - b.phi.value(x, t));
                    continue;
                }
                if (std::abs(i) == m || j == m || k == 0) {
                    rep.outer_boundary_margin = std::min(
                        rep.outer_boundary_margin, b.value(x, t) - bound_u);
                    continue;
                }
                const Vec dv = b.gradient(x, t);
                const double lhs =
                    params.family == Family::FullyNonlinear
                        ? degenerate_multiplier(params, dv) * (*params.F)(b.hessian(x, t))
                        : a_tensor(params, dv).contract(b.hessian(x, t));
                rep.supersolution_defect =
                    std::min(rep.supersolution_defect, b.time_deriv(x, t) - lhs);
            }
    }
    return rep;
}

Barrier build_barrier(const BoundaryDatum& phi, const CoefficientParams& params,
                      double bound_u, double sample_h,
                      std::vector<BarrierSearchTrace>* trace) {
    BarrierReport last;
    for (double beta = 1.0; beta <= 1024.0; beta *= 2.0) {
        for (double A = 1.0; A <= 1048576.0; A *= 2.0) {
            Barrier b{A, beta, phi};
            last = verify_barrier(b, params, bound_u, sample_h);
            if (last.pass()) return b;
            if (trace) trace->push_back({A, beta, last});
        }
    }
    throw Error("build_barrier: search exhausted (last defect " +
                std::to_string(last.supersolution_defect) + ", outer margin " +
                std::to_string(last.outer_boundary_margin) + ")");
}

// --- intrinsic scaling ---------------------------------------------------------

double rescaled_residual(const ExactSolution& sol, const CoefficientParams& params,
                         double r, double rho, const Vec& x, double t) {
    if (!(r > 0.0) || !(rho > 0.0))
        throw Error("rescaled_residual: r and rho must be positive");
    const double g = params.degeneracy_exponent();
    const double ts = r * r * std::pow(rho, -g);
    const Vec xs = x * r;
    const ExactJet jet = evaluate_exact(sol, xs, t * ts);
    // v = (r rho)^{-1} u(r x, r^2 rho^{-g} t):
    const Vec dv = jet.gradient * (1.0 / rho);
    const SymMat d2v = jet.hessian * (r / rho);
    const double vt = jet.ut * ts / (r * rho);
    const CoefficientParams scaled = params.with_epsilon(params.epsilon / rho);
    const double eq = scaled.family == Family::FullyNonlinear
                          ? degenerate_multiplier(scaled, dv) * (*scaled.F)(d2v)
                          : a_tensor(scaled, dv).contract(d2v);
    return vt - eq;
}

}  // namespace degenlab
