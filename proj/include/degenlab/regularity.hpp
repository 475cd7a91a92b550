#ifndef DEGENLAB_REGULARITY_HPP
#define DEGENLAB_REGULARITY_HPP

#include <vector>

#include "degenlab/core.hpp"

namespace degenlab {

struct ExponentReport {
    double fitted_exponent = 0.0;
    double fitted_constant = 0.0;  // exp(intercept) of the log-log fit
    double r_squared = 0.0;
    double predicted_exponent = 0.0;
    long pair_count = 0;
};

// mu = alpha / (2 + alpha (2-p)), nu = (1+alpha) / (2 + alpha (2-p)).
// Rejects a non-positive denominator.
std::pair<double, double> scaling_exponents(double alpha, double p);

// alpha beta / (1 + alpha) for alpha, beta in (0, 1].
double mixed_time_exponent(double alpha, double beta);

// Geometric radius ladder (factor sqrt 2) from 4h up to r_max.
std::vector<double> radius_ladder(double h, double r_max);

// Least-squares slope of log |Du(x) - Du(center)| against log |x - center|
// over nodes snapped to the radius ladder along axis and diagonal directions.
// Needs at least 8 usable pairs (zero differences are unusable).
ExponentReport fit_spatial_holder(const std::vector<Field>& gradient_fields,
                                  const Vec& center, const std::vector<double>& radii,
                                  double predicted_exponent);

// Slope of log sup_x |u(x,0) - u(x,-m dt)| against log (m dt) over a geometric
// separation ladder, restricted to |x|_inf <= radius. The fitted constant is
// the max ratio (Lipschitz constant estimate).
ExponentReport fit_time_lipschitz(const SpaceTimeSolution& u, double radius,
                                  double predicted_exponent);

struct MixedCheckReport {
    double max_ratio = 0.0;   // |Du(x,t)-Du(x,s)| / |t-s|^(alpha beta/(1+alpha))
    long samples = 0;
    long skipped = 0;          // probe point left the grid
    long chain_violations = 0; // triangle-inequality chain failures (expect 0)
};

// Samples (x, t, s) triples, evaluates the probe-point inequality chain and
// reports the max ratio against the predicted mixed exponent.
MixedCheckReport mixed_gradient_time_check(const SpaceTimeSolution& u, double alpha,
                                           double beta);

}  // namespace degenlab

#endif
