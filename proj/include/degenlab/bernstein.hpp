#ifndef DEGENLAB_BERNSTEIN_HPP
#define DEGENLAB_BERNSTEIN_HPP

#include <array>
#include <vector>

#include "degenlab/coefficients.hpp"
#include "degenlab/core.hpp"

namespace degenlab {

// Product of 1-D C^2 bumps on the cylinder of the given extent E: identically
// 1 on Q_{E/2}, supported in Q_{0.95 E}, with closed-form first and second
// derivatives (quintic smoothstep profile). On half-space grids the bump in
// x_n is one-sided, so the cutoff does not vanish on {x_n = 0}.
class Cutoff {
public:
    Cutoff(int dim, double extent, bool half_space = false);
    explicit Cutoff(const Grid& g) : Cutoff(g.dim(), g.extent(), g.half_space()) {}

    double value(const Vec& x, double t) const;
    Vec grad(const Vec& x, double t) const;
    SymMat hess(const Vec& x, double t) const;
    double time_deriv(const Vec& x, double t) const;
    double extent() const { return extent_; }

private:
    int dim_;
    double extent_;
    bool half_space_;
};

// beta = max{3-p, 0} for the p-Laplace family (needs p > 2), beta = max{1-gamma, 0}
// for the other families (needs gamma > 0). Always lands in [0, 1).
double select_beta(const CoefficientParams& params);

struct DominationReport {
    bool ok = false;
    double margin = 0.0;  // rhs - lhs
    double lhs = 0.0, rhs = 0.0;
    bool min_identity_exact = false;  // min{...} equals the claimed closed form
};

// Exponent comparison that makes the good term dominate:
//   p-Laplace:  (p-beta-2)/2 <= min{p-2, 3(p-2)/2, (2p-5)/2} = (2p-5)/2
//   others:     -(gamma+beta)/2 <= min{0, gamma/2, -1/2} = -1/2
DominationReport check_domination(const CoefficientParams& params, double beta);

struct JetCheck {
    bool ok = false;
    double lhs = 0.0, rhs = 0.0;
};

// (xi^T M q)^2 <= (eps^2 + |q|^2) |M xi|^2.
JetCheck jet_cauchy_schwarz(const Jet& jet, double epsilon, const Vec& xi);

// |u_t| <= sqrt(n) Lambda_p (eps^2+|q|^2)^((p-2)/2) ||M|| for quasilinear
// families (exponent gamma/2 for the general family) and
// |u_t| <= n Lambda (eps^2+|q|^2)^(gamma/2) ||M|| fully nonlinear, with tau
// recomputed as the equation value of (q, M).
JetCheck jet_ut_bound(const Jet& jet, const CoefficientParams& params);

struct BernsteinConfig {
    double delta;
    double beta;
    double A;  // sup over the run of eta |u_t|
    Cutoff cutoff;

    // beta from select_beta, A measured from the run's backward differences.
    static BernsteinConfig for_run(const SpaceTimeSolution& u,
                                   const CoefficientParams& params, double delta);
};

// v = eta^2 u_t^2 + delta A (eps^2 + |Du|^2)^((2-beta)/2) per node; entry k of
// the result corresponds to solution level k+1 (backward differences).
std::vector<Field> auxiliary_v(const SpaceTimeSolution& u, const BernsteinConfig& config,
                               const CoefficientParams& params);

struct DefectReport {
    double v_max = 0.0;
    int v_max_level = 0;  // solution level index
    std::array<int, 2> v_max_node{0, 0};
    double eta_at_max = 0.0;
    double ut_at_max = 0.0;
    bool dichotomy = false;  // max sits where eta ~ 0 or |u_t| is near its interior scale
    double max_defect = 0.0;  // max over interior nodes of v_t - Lv (diagnostic)
    long skipped_nodes = 0;   // nodes without a full stencil, excluded from the defect
    double A = 0.0, delta = 0.0;
    double boundary_term = 0.0;  // sup |phi_t|^2 on the flat boundary (half-space runs)
    bool verdict = false;        // v_max <= boundary_term + 2 delta A  (=> A <= 2 delta)
    double verdict_margin = 0.0;
};

// Transcribes the maximum-point chain A^2 <= v_max <= ||phi_t||^2 + 2 delta A.
// The pointwise sign of v_t - Lv is reported, not asserted.
DefectReport defect_report(const SpaceTimeSolution& u, const BernsteinConfig& config,
                           const CoefficientParams& params);

struct DeltaSweepResult {
    double delta_min = 0.0;
    DefectReport report;
    std::vector<std::pair<double, bool>> trace;
};

// Smallest delta in the increasing ladder whose verdict holds; throws with the
// best margin when none passes.
DeltaSweepResult delta_sweep(const SpaceTimeSolution& u, const CoefficientParams& params,
                             const std::vector<double>& ladder);

}  // namespace degenlab

#endif
