#ifndef DEGENLAB_EXACT_HPP
#define DEGENLAB_EXACT_HPP

#include <functional>
#include <vector>

#include "degenlab/coefficients.hpp"
#include "degenlab/core.hpp"

namespace degenlab {

struct ExactJet {
    double value;
    Vec gradient;
    SymMat hessian;
    double ut;
};

// Closed-form radial solutions u = amp |x - x0|^a + c (t - t0) + shift with
// u_t identically equal to the family constant:
//   p-Laplace:        a = p' = p/(p-1),      c = n (p')^(p-1)
//   fully nonlinear:  a = 1 + 1/(1+gamma),   c = (1+1/(1+gamma))^(1+gamma) (n-1+1/(1+gamma))
// (trace operator). An amplitude kappa rescales the time constant by
// kappa^(p-1) resp. kappa^(1+gamma), so intrinsically rescaled copies stay
// in the family.
class ExactSolution {
public:
    enum class Kind { PLaplaceRadial, FullyNonlinearRadial };

    static ExactSolution p_laplace_radial(int n, double p);
    static ExactSolution fully_nonlinear_radial(int n, double gamma);

    // Affine reparameterization: translation in x and t plus an additive constant.
    ExactSolution translated(const Vec& x0, double t0, double shift = 0.0) const;
    // Amplitude-scaled copy kappa * |x|^a with the matching time constant.
    ExactSolution scaled(double kappa) const;

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    double profile_exponent() const { return a_; }  // p' resp. 1 + 1/(1+gamma)
    double time_slope() const { return c_; }        // c_{n,p} resp. C(n,gamma)

    double value(const Vec& x, double t) const;
    Vec gradient(const Vec& x, double t) const;  // 0 at the center
    // Rejects x at the translation center (the Hessian of |x|^a is singular
    // there since a < 2).
    SymMat hessian(const Vec& x, double t) const;
    double ut() const { return c_; }

    SpaceTimeFn as_function() const;

private:
    ExactSolution(Kind k, int n, double param);
    Kind kind_;
    int n_;
    double param_;  // p resp. gamma
    double a_, c_, amp_ = 1.0;
    Vec x0_{0.0, 0.0};
    double t0_ = 0.0, shift_ = 0.0;
};

ExactJet evaluate_exact(const ExactSolution& sol, const Vec& x, double t);

// u_t - a_eps(Du) : D^2 u (quasilinear) resp. u_t - (eps^2+|Du|^2)^(gamma/2) F(D^2 u)
// evaluated from analytic derivatives. Zero to machine precision at eps = 0
// when params match the solution's family.
double residual_oracle(const ExactSolution& sol, const CoefficientParams& params,
                       const Vec& x, double t);

// --- boundary barrier on the half cylinder ---------------------------------

// Twice differentiable boundary datum with analytic derivatives.
struct BoundaryDatum {
    SpaceTimeFn value;
    std::function<Vec(const Vec&, double)> grad;
    std::function<SymMat(const Vec&, double)> hess;
    SpaceTimeFn time_deriv;

    static BoundaryDatum zero(int dim);
    static BoundaryDatum coordinate(int dim, int axis);  // phi = x_axis
};

// v(x,t) = A (1 - |x + e_n|^{-beta}) - A t + phi(x,t).
struct Barrier {
    double A;
    double beta;
    BoundaryDatum phi;

    double value(const Vec& x, double t) const;
    Vec gradient(const Vec& x, double t) const;
    SymMat hessian(const Vec& x, double t) const;
    double time_deriv(const Vec& x, double t) const;

    // Lipschitz constant in x_n implied by the barrier at the flat boundary:
    // A beta + sup |d phi / d x_n| over the sampled half cube.
    double boundary_lipschitz(double sample_h = 1.0 / 64) const;
};

struct BarrierReport {
    double supersolution_defect = 0.0;   // min over interior sample of v_t - a(Dv):D^2 v
    double flat_boundary_margin = 0.0;   // min over {x_n = 0} of v - phi
    double outer_boundary_margin = 0.0;  // min over lateral/bottom boundary of v - bound_u
    long sample_count = 0;

    bool pass(double tol = 1e-8) const {
        return supersolution_defect >= -tol && flat_boundary_margin >= -tol &&
               outer_boundary_margin >= -tol;
    }
};

// Checks the three barrier conditions on the uniform sample of the half
// cylinder Q_1^+ with spacing sample_h in space and time.
BarrierReport verify_barrier(const Barrier& b, const CoefficientParams& params,
                             double bound_u, double sample_h = 1.0 / 64);

struct BarrierSearchTrace {
    double A, beta;
    BarrierReport report;
};

// Doubling search, beta outer then A inner (caps 2^10 and 2^20), returning
// the first pair whose sampled conditions all hold. The trace of failed
// attempts is appended to *trace when given.
Barrier build_barrier(const BoundaryDatum& phi, const CoefficientParams& params,
                      double bound_u, double sample_h = 1.0 / 64,
                      std::vector<BarrierSearchTrace>* trace = nullptr);

// --- intrinsic scaling of exact solutions -----------------------------------

// Residual of v(x,t) = (r rho)^{-1} u(r x, r^2 rho^{-g} t) at (x,t), computed
// through the analytic chain rule (g = p-2 resp. gamma). The regularization
// parameter transforms as eps -> eps / rho.
double rescaled_residual(const ExactSolution& sol, const CoefficientParams& params,
                         double r, double rho, const Vec& x, double t);

}  // namespace degenlab

#endif
