#ifndef DEGENLAB_SOLVER_HPP
#define DEGENLAB_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "degenlab/coefficients.hpp"
#include "degenlab/core.hpp"
#include "degenlab/exact.hpp"

namespace degenlab {

// Boundary values on the parabolic boundary plus the initial slice.
struct ProblemData {
    SpaceTimeFn boundary;
    std::function<double(const Vec&)> initial;

    static ProblemData from_function(const SpaceTimeFn& f, double t_start);
    static ProblemData from_exact(const ExactSolution& sol, double t_start);
    static ProblemData constant(double c);
};

struct ProblemSpec {
    CoefficientParams params;
    Grid grid;
    ProblemData data;
    double gradient_cap;  // asserted a-priori bound G on |Du|, drives the CFL

    ProblemSpec(CoefficientParams params, Grid grid, ProblemData data,
                double gradient_cap);
};

struct SolveReport {
    std::optional<SpaceTimeSolution> solution;  // absent exactly when diverged
    double dt_used = 0.0;          // internal Euler substep
    int substeps_per_level = 1;    // grid.dt() / dt_used
    double max_observed_gradient = 0.0;
    double cfl_margin = 0.0;       // cfl_dt at the observed gradient / dt_used
    bool diverged = false;
    std::string divergence_note;
};

// dt = 0.4 h^2 / (2 dim Lambda (eps^2 + G^2)^(g/2)) with g = p-2 resp. gamma.
double cfl_dt(const CoefficientParams& params, int dim, double h, double G);

// Max finite-difference gradient of the initial slice, plus one.
double suggest_gradient_cap(const ProblemData& data, const Grid& grid);

// Largest divisor of span/levels that respects dt_max, as a grid time step.
double fitted_dt(double span, double dt_max);

// One forward Euler update of size dt: interior nodes advance by the frozen-
// coefficient contraction, boundary nodes are refreshed at prev_time + dt.
// The quasilinear cross term uses the sign-adapted (Kushner--Dupuis) stencil,
// which keeps the update monotone under the CFL restriction for p <= 6.
Field step(const Field& state, double prev_time, const ProblemSpec& spec, double dt);

// Iterate step over the grid's t_span, substepping below the CFL limit
// between stored levels. Aborts (diverged report) on non-finite values or
// when the observed gradient exceeds twice the cap.
SolveReport solve(const ProblemSpec& spec);

struct SweepEntry {
    double epsilon;
    SolveReport report;
    double sup_ut_half;  // sup of |u_t| over the cylinder Q_{1/2}
};

// One solve per epsilon on the identical grid and data; eps_list must be
// strictly decreasing and positive. Parallelizes over entries (DEGENLAB_THREADS
// caps the worker count); results are merged in input order.
std::vector<SweepEntry> epsilon_sweep(const ProblemSpec& tmpl,
                                      const std::vector<double>& eps_list);

// v(x,t) = (r rho)^{-1} u(r x, r^2 rho^{-g} t) sampled on the target grid,
// bilinear in space and linear in time. Every target node must map into the
// source cylinder.
SpaceTimeSolution intrinsic_rescale(const SpaceTimeSolution& u,
                                    const CoefficientParams& params, double r,
                                    double rho, const Grid& target);

}  // namespace degenlab

#endif
