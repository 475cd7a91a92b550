#include "degenlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace degenlab {

std::pair<double, double> scaling_exponents(double alpha, double p) {
    const double den = 2.0 + alpha * (2.0 - p);
    if (!(den > 0.0))
        throw Error("scaling_exponents: degenerate denominator 2 + alpha(2-p)");
    return {alpha / den, (1.0 + alpha) / den};
}

double mixed_time_exponent(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
        throw Error("mixed_time_exponent: alpha, beta must lie in (0, 1]");
    return alpha * beta / (1.0 + alpha);
}

std::vector<double> radius_ladder(double h, double r_max) {
    std::vector<double> out;
    for (double r = 4.0 * h; r <= r_max * (1.0 + 1e-12); r *= std::sqrt(2.0))
        out.push_back(r);
    return out;
}

namespace {

struct FitResult {
    double slope, intercept, r2;
};

FitResult least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw Error("fit: degenerate abscissa");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssres = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ssres += r * r;
    }
    const double r2 = syy == 0.0 ? 1.0 : 1.0 - ssres / syy;
    return {slope, intercept, r2};
}

}  // namespace

ExponentReport fit_spatial_holder(const std::vector<Field>& gradient_fields,
                                  const Vec& center, const std::vector<double>& radii,
                                  double predicted_exponent) {
    if (gradient_fields.empty()) throw Error("fit_spatial_holder: no gradient fields");
    const Grid& g = gradient_fields.front().grid();
    const int dim = g.dim();
    if (static_cast<int>(gradient_fields.size()) != dim)
        throw Error("fit_spatial_holder: need one gradient component per dimension");
    if (radii.size() < 2) throw Error("fit_spatial_holder: need a radius ladder");

    auto snap = [&](double c, int axis) {
        return static_cast<int>(std::round((c - g.axis_min(axis)) / g.h()));
    };
    const int ci = snap(center[0], 0);
    const int cj = dim == 2 ? snap(center[1], 1) : 0;
    if (ci < 0 || ci >= g.nodes(0) || (dim == 2 && (cj < 0 || cj >= g.nodes(1))))
        throw Error("fit_spatial_holder: center outside grid");

    auto grad_of = [&](int i, int j) {
        Vec q(dim);
        for (int k = 0; k < dim; ++k) q[k] = gradient_fields[k](i, j);
        return q;
    };
    const Vec gc = grad_of(ci, cj);
    const Vec xc = g.node(ci, cj);

    static const double dirs2[8][2] = {{1, 0}, {-1, 0}, {0, 1},  {0, -1},
                                       {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    std::set<std::pair<int, int>> seen;
    std::vector<double> lx, ly;
    const int ndirs = dim == 2 ? 8 : 2;
    for (double r : radii)
        for (int d = 0; d < ndirs; ++d) {
            double dx = dim == 2 ? dirs2[d][0] : (d == 0 ? 1.0 : -1.0);
            double dy = dim == 2 ? dirs2[d][1] : 0.0;
            const double nrm = std::hypot(dx, dy);
            const int i = ci + static_cast<int>(std::round(r * dx / nrm / g.h()));
            const int j = cj + static_cast<int>(std::round(r * dy / nrm / g.h()));
            if (i < 0 || i >= g.nodes(0) || (dim == 2 && (j < 0 || j >= g.nodes(1))))
                continue;
            if ((i == ci && j == cj) || !seen.insert({i, j}).second) continue;
            const double dist = (g.node(i, j) - xc).norm();
            const double diff = (grad_of(i, j) - gc).norm();
            if (dist <= 0.0 || diff <= 0.0) continue;  // zero differences are unusable
            lx.push_back(std::log(dist));
            ly.push_back(std::log(diff));
        }
    if (lx.size() < 8)
        throw Error("fit_spatial_holder: fewer than 8 usable pairs (degenerate fit)");
    const FitResult f = least_squares(lx, ly);
    return ExponentReport{f.slope, std::exp(f.intercept), f.r2, predicted_exponent,
                          static_cast<long>(lx.size())};
}

ExponentReport fit_time_lipschitz(const SpaceTimeSolution& u, double radius,
                                  double predicted_exponent) {
    const Grid& g = u.grid();
    const int K = u.level_count() - 1;
    if (K < 9) throw Error("fit_time_lipschitz: too few time levels");

    // Geometric ladder of level separations from the final level.
    std::vector<int> seps;
    for (double m = 1.0; m <= K; m = std::max(m + 1.0, m * std::sqrt(2.0)))
        seps.push_back(static_cast<int>(m));

    std::vector<double> lx, ly;
    double max_ratio = 0.0;
    for (int m : seps) {
        double sup = 0.0;
        const Field& a = u.level(K);
        const Field& b = u.level(K - m);
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i) {
                const Vec x = g.node(i, j);
                double nrm = std::abs(x[0]);
                if (g.dim() == 2) nrm = std::max(nrm, std::abs(x[1]));
                if (nrm <= radius + 1e-12) sup = std::max(sup, std::abs(a(i, j) - b(i, j)));
            }
        const double sep = m * g.dt();
        if (sup <= 0.0) continue;
        max_ratio = std::max(max_ratio, sup / sep);
        lx.push_back(std::log(sep));
        ly.push_back(std::log(sup));
    }
    if (lx.size() < 8)
        throw Error("fit_time_lipschitz: fewer than 8 usable separations (degenerate fit)");
    const FitResult f = least_squares(lx, ly);
    return ExponentReport{f.slope, max_ratio, f.r2, predicted_exponent,
                          static_cast<long>(lx.size())};
}

MixedCheckReport mixed_gradient_time_check(const SpaceTimeSolution& u, double alpha,
                                           double beta) {
    const Grid& g = u.grid();
    const double expo = mixed_time_exponent(alpha, beta);
    const int K = u.level_count() - 1;
    MixedCheckReport rep;

    std::vector<int> seps;
    for (double m = 1.0; m <= K; m = std::max(m + 1.0, m * 2.0))
        seps.push_back(static_cast<int>(m));

    // Bilinear interpolation of a level at an off-grid point.
    auto interp = [&](const Field& f, const Vec& x) {
        auto cell = [&](int axis, double c) {
            const double fi = (c - g.axis_min(axis)) / g.h();
            int i0 = static_cast<int>(std::floor(fi));
            i0 = std::max(0, std::min(i0, g.nodes(axis) - 2));
            return std::pair<int, double>(i0, fi - i0);
        };
        const auto [i0, wx] = cell(0, x[0]);
        if (g.dim() == 1) return (1 - wx) * f(i0) + wx * f(i0 + 1);
        const auto [j0, wy] = cell(1, x[1]);
        return (1 - wx) * (1 - wy) * f(i0, j0) + wx * (1 - wy) * f(i0 + 1, j0) +
               (1 - wx) * wy * f(i0, j0 + 1) + wx * wy * f(i0 + 1, j0 + 1);
    };
    auto inside = [&](const Vec& x) {
        for (int a = 0; a < g.dim(); ++a)
            if (x[a] < g.axis_min(a) || x[a] > g.extent()) return false;
        return true;
    };

    const int stride = std::max(1, g.nodes(0) / 8);
    const int j_lo = g.dim() == 2 ? 1 : 0;
    const int j_hi = g.dim() == 2 ? g.nodes(1) - 1 : 1;
    for (int m : seps) {
        const Field& ft = u.level(K);
        const Field& fs = u.level(K - m);
        const double sep = m * g.dt();
        const double denom = std::pow(sep, expo);
        for (int j = j_lo; j < j_hi; j += stride)
            for (int i = 1; i < g.nodes(0) - 1; i += stride) {
                ++rep.samples;
                const Vec dt_grad = gradient_at(ft, i, j);
                const Vec ds_grad = gradient_at(fs, i, j);
                const Vec dg = dt_grad - ds_grad;
                const double nd = dg.norm();
                rep.max_ratio = std::max(rep.max_ratio, nd / denom);
                if (nd == 0.0) continue;
                const Vec x = g.node(i, j);
                const Vec y = x + (std::pow(sep, beta / (1.0 + alpha)) / 4.0 / nd) * dg;
                if (!inside(y)) {
                    ++rep.skipped;
                    continue;
                }
                // |(Du(x,t)-Du(x,s)) . (y-x)| <= R1 + R2 + R3 + R4 holds as a
                // triangle identity; violations can only come from roundoff.
                const Vec step = y - x;
                const double lhs = std::abs(dg.dot(step));
                const double r1 =
                    std::abs(interp(ft, y) - ft(i, j) - dt_grad.dot(step));
                const double r2 =
                    std::abs(interp(fs, y) - fs(i, j) - ds_grad.dot(step));
                const double r3 = std::abs(interp(ft, y) - interp(fs, y));
                const double r4 = std::abs(ft(i, j) - fs(i, j));
                if (lhs > r1 + r2 + r3 + r4 + 1e-9) ++rep.chain_violations;
            }
    }
    return rep;
}

}  // namespace degenlab
