#ifndef DEGENLAB_COEFFICIENTS_HPP
#define DEGENLAB_COEFFICIENTS_HPP

#include <optional>
#include <vector>

#include "degenlab/error.hpp"
#include "degenlab/linalg.hpp"

namespace degenlab {

enum class Family { PLaplace, FullyNonlinear, GeneralQuasilinear };

struct EllipticityPair {
    double lambda;
    double Lambda;

    EllipticityPair(double lambda, double Lambda) : lambda(lambda), Lambda(Lambda) {
        if (!(lambda > 0.0 && lambda <= Lambda))
            throw Error("EllipticityPair: need 0 < lambda <= Lambda");
    }
};

// Smooth uniformly elliptic operator with F(0) = 0: the trace, or a soft-max
// Bellman operator over finitely many linear operators tr(A_k M), normalized
// so F(0) = 0 holds exactly. Log-sum-exp of affine maps is convex and its
// gradient is a convex combination of the A_k, so the declared ellipticity
// pair (min/max eigenvalue over the A_k family) is exact.
class SmoothOperatorF {
public:
    static SmoothOperatorF trace(int dim = 2);
    static SmoothOperatorF bellman_smooth(std::vector<SymMat> ops, double scale);

    double operator()(const SymMat& M) const;
    // dF/dM_ij as a symmetric matrix (identity for trace, softmax mix of A_k).
    SymMat derivative(const SymMat& M) const;
    const EllipticityPair& ellipticity() const { return ell_; }
    bool is_trace() const { return ops_.empty(); }
    int dim() const { return dim_; }

private:
    SmoothOperatorF(int dim, std::vector<SymMat> ops, double scale, EllipticityPair ell);
    int dim_;
    std::vector<SymMat> ops_;  // empty = trace
    double scale_ = 0.0;
    EllipticityPair ell_;
};

// Equation family and parameters (p, gamma, epsilon, F instance).
struct CoefficientParams {
    Family family = Family::PLaplace;
    double p = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
    std::optional<SmoothOperatorF> F;

    static CoefficientParams p_laplace(double p, double epsilon);
    static CoefficientParams fully_nonlinear(double gamma, SmoothOperatorF F, double epsilon);
    static CoefficientParams general_quasilinear(double gamma, double p, double epsilon);

    // Exponent of (eps^2 + |q|^2)^(g/2) in front of the diffusion: p-2 for
    // the p-Laplace family, gamma otherwise.
    double degeneracy_exponent() const {
        return family == Family::PLaplace ? p - 2.0 : gamma;
    }
    CoefficientParams with_epsilon(double eps) const {
        CoefficientParams c = *this;
        c.epsilon = eps;
        return c;
    }
};

// a_eps(q) = (eps^2+|q|^2)^((p-2)/2) (I + (p-2) q qT / (eps^2+|q|^2)) for the
// p-Laplace family; the general quasilinear family carries prefactor exponent
// gamma/2 instead. Quasilinear families only.
SymMat a_tensor(const CoefficientParams& params, const Vec& q);

// Exact analytic derivative d a^{ij} / d q_l; component l of the result.
std::vector<SymMat> a_tensor_gradient(const CoefficientParams& params, const Vec& q);

// Pucci extremal operators over lambda I <= A <= Lambda I.
double pucci_plus(const EllipticityPair& ell, const SymMat& M);
double pucci_minus(const EllipticityPair& ell, const SymMat& M);

double evaluate_F(const SmoothOperatorF& F, const SymMat& M);

// (eps^2 + |q|^2)^(gamma/2); rejects eps = q = 0 with gamma < 0.
double degenerate_multiplier(const CoefficientParams& params, const Vec& q);

// (min{p-1,1}, max{p-1,1}) for quasilinear families, the F instance's pair
// for the fully nonlinear family.
EllipticityPair ellipticity_of(const CoefficientParams& params);

}  // namespace degenlab

#endif
