#include "degenlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degenlab {

SmoothOperatorF::SmoothOperatorF(int dim, std::vector<SymMat> ops, double scale,
                                 EllipticityPair ell)
    : dim_(dim), ops_(std::move(ops)), scale_(scale), ell_(ell) {}

SmoothOperatorF SmoothOperatorF::trace(int dim) {
    return SmoothOperatorF(dim, {}, 0.0, EllipticityPair(1.0, 1.0));
}

SmoothOperatorF SmoothOperatorF::bellman_smooth(std::vector<SymMat> ops, double scale) {
    if (ops.empty()) throw Error("bellman_smooth: need at least one operator");
    if (!(scale > 0.0)) throw Error("bellman_smooth: scale must be positive");
    const int dim = ops.front().dim();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const SymMat& A : ops) {
        if (A.dim() != dim) throw Error("bellman_smooth: operator dim mismatch");
        const auto ev = A.eigenvalues();
        lo = std::min(lo, ev[0]);
        hi = std::max(hi, dim == 1 ? ev[0] : ev[1]);
    }
    if (!(lo > 0.0)) throw Error("bellman_smooth: operators must be positive definite");
    return SmoothOperatorF(dim, std::move(ops), scale, EllipticityPair(lo, hi));
}

double SmoothOperatorF::operator()(const SymMat& M) const {
    if (M.dim() != dim_) throw Error("SmoothOperatorF: matrix dim mismatch");
    if (ops_.empty()) return M.trace();
    // scale * log sum exp(tr(A_k M)/scale), shifted by its value at 0 so that
    // F(0) = 0 exactly.
    double top = -std::numeric_limits<double>::infinity();
    for (const SymMat& A : ops_) top = std::max(top, A.contract(M));
    double s = 0.0;
    for (const SymMat& A : ops_) s += std::exp((A.contract(M) - top) / scale_);
    return top + scale_ * std::log(s) -
           scale_ * std::log(static_cast<double>(ops_.size()));
}

SymMat SmoothOperatorF::derivative(const SymMat& M) const {
    if (ops_.empty()) return SymMat::identity(dim_);
    double top = -std::numeric_limits<double>::infinity();
    for (const SymMat& A : ops_) top = std::max(top, A.contract(M));
    double Z = 0.0;
    SymMat out(dim_);
    for (const SymMat& A : ops_) {
        const double w = std::exp((A.contract(M) - top) / scale_);
        Z += w;
        out = out + w * A;
    }
    return out * (1.0 / Z);
}

double evaluate_F(const SmoothOperatorF& F, const SymMat& M) { return F(M); }

CoefficientParams CoefficientParams::p_laplace(double p, double epsilon) {
    if (!(p > 1.0)) throw Error("p_laplace: p must exceed 1");
    if (epsilon < 0.0) throw Error("params: epsilon must be >= 0");
    CoefficientParams c;
    c.family = Family::PLaplace;
    c.p = p;
    c.epsilon = epsilon;
    return c;
}

CoefficientParams CoefficientParams::fully_nonlinear(double gamma, SmoothOperatorF F,
                                                     double epsilon) {
    if (!(gamma > -1.0)) throw Error("fully_nonlinear: gamma must exceed -1");
    if (epsilon < 0.0) throw Error("params: epsilon must be >= 0");
    CoefficientParams c;
    c.family = Family::FullyNonlinear;
    c.gamma = gamma;
    c.epsilon = epsilon;
    c.F = std::move(F);
    return c;
}

CoefficientParams CoefficientParams::general_quasilinear(double gamma, double p,
                                                         double epsilon) {
    if (!(gamma > 0.0)) throw Error("general_quasilinear: gamma must be positive");
    if (!(p > 1.0)) throw Error("general_quasilinear: p must exceed 1");
    if (epsilon < 0.0) throw Error("params: epsilon must be >= 0");
    CoefficientParams c;
    c.family = Family::GeneralQuasilinear;
    c.gamma = gamma;
    c.p = p;
    c.epsilon = epsilon;
    return c;
}

SymMat a_tensor(const CoefficientParams& params, const Vec& q) {
    if (params.family == Family::FullyNonlinear)
        throw Error("a_tensor: quasilinear families only");
    const double g = params.degeneracy_exponent();
    const double s = params.epsilon * params.epsilon + q.norm_sq();
    const int dim = q.dim();
    if (s == 0.0) {
        if (g < 0.0)
            throw SingularityError("a_tensor: epsilon = 0 and q = 0 with p < 2");
        // Continuous extension: prefactor s^(g/2) -> 0 for g > 0, 1 for g = 0.
        return g > 0.0 ? SymMat::zero(dim) : SymMat::identity(dim);
    }
    const double pref = std::pow(s, 0.5 * g);
    SymMat a = SymMat::identity(dim) + ((params.p - 2.0) / s) * SymMat::outer(q);
    return a * pref;
}

std::vector<SymMat> a_tensor_gradient(const CoefficientParams& params, const Vec& q) {
    if (params.family == Family::FullyNonlinear)
        throw Error("a_tensor_gradient: quasilinear families only");
    const double s = params.epsilon * params.epsilon + q.norm_sq();
    if (s == 0.0)
        throw SingularityError("a_tensor_gradient: epsilon^2 + |q|^2 must be positive");
    const double g = params.degeneracy_exponent();
    const double pm2 = params.p - 2.0;
    const int dim = q.dim();

    // a(q) = s^(g/2) I + pm2 s^((g-2)/2) q qT, so
    // d a / d q_l = g s^((g-2)/2) q_l I + pm2 (g-2) s^((g-4)/2) q_l q qT
    //             + pm2 s^((g-2)/2) (e_l qT + q e_lT).
    const double sg2 = std::pow(s, 0.5 * (g - 2.0));
    const double sg4 = std::pow(s, 0.5 * (g - 4.0));
    std::vector<SymMat> out;
    out.reserve(dim);
    for (int l = 0; l < dim; ++l) {
        SymMat d = (g * sg2 * q[l]) * SymMat::identity(dim) +
                   (pm2 * (g - 2.0) * sg4 * q[l]) * SymMat::outer(q);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                const double sym = (i == l ? q[j] : 0.0) + (j == l ? q[i] : 0.0);
                d.set(i, j, d(i, j) + pm2 * sg2 * sym);
            }
        out.push_back(d);
    }
    return out;
}

double pucci_plus(const EllipticityPair& ell, const SymMat& M) {
    const auto ev = M.eigenvalues();
    const int n = M.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = ev[i];
        s += e >= 0.0 ? ell.Lambda * e : ell.lambda * e;
    }
    return s;
}

double pucci_minus(const EllipticityPair& ell, const SymMat& M) {
    const auto ev = M.eigenvalues();
    const int n = M.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = ev[i];
        s += e >= 0.0 ? ell.lambda * e : ell.Lambda * e;
    }
    return s;
}

double degenerate_multiplier(const CoefficientParams& params, const Vec& q) {
    const double g = params.degeneracy_exponent();
    const double s = params.epsilon * params.epsilon + q.norm_sq();
    if (s == 0.0) {
        if (g < 0.0)
            throw SingularityError("degenerate_multiplier: epsilon = 0, q = 0, gamma < 0");
        return g > 0.0 ? 0.0 : 1.0;
    }
    return std::pow(s, 0.5 * g);
}

EllipticityPair ellipticity_of(const CoefficientParams& params) {
    if (params.family == Family::FullyNonlinear) {
        if (!params.F) throw Error("ellipticity_of: missing F instance");
        return params.F->ellipticity();
    }
    return EllipticityPair(std::min(params.p - 1.0, 1.0), std::max(params.p - 1.0, 1.0));
}

}  // namespace degenlab
