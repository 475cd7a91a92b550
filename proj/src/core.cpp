#include "degenlab/core.hpp"

#include <cmath>
#include <string>

namespace degenlab {

namespace {

// extent/h and span/dt must be integers up to roundoff.
int checked_ratio(double num, double den, const char* what) {
    const double r = num / den;
    const double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
        throw Error(std::string(what) + " must be a positive integer multiple (got ratio " +
                    std::to_string(r) + ")");
    }
    return static_cast<int>(n);
}

}  // namespace

Grid::Grid(int dim, double extent, double h, double dt,
           std::pair<double, double> t_span, bool half_space)
    : dim_(dim),
      extent_(extent),
      h_(h),
      dt_(dt),
      t_start_(t_span.first),
      t_end_(t_span.second),
      half_space_(half_space) {
    if (dim != 1 && dim != 2) throw Error("Grid: dim must be 1 or 2");
    if (!(extent > 0.0)) throw Error("Grid: extent must be positive");
    if (!(h > 0.0)) throw Error("Grid: h must be positive");
    if (!(dt > 0.0)) throw Error("Grid: dt must be positive");
    if (!(t_start_ < t_end_)) throw Error("Grid: t_span must have positive width");
    if (t_end_ > 1e-12) throw Error("Grid: t_end must be <= 0");

    const int half_cells = checked_ratio(extent, h, "Grid: extent/h");
    nx_ = 2 * half_cells + 1;
    ny_ = 1;
    if (dim_ == 2) ny_ = half_space_ ? half_cells + 1 : nx_;
    if (dim_ == 1 && half_space_) nx_ = half_cells + 1;
    steps_ = checked_ratio(t_end_ - t_start_, dt, "Grid: t_span width / dt");
}

int Grid::level_of(double t) const {
    const double k = (t - t_start_) / dt_;
    const double n = std::round(k);
    if (n < 0 || n > steps_ || std::abs(k - n) > 1e-9 * std::max(1.0, std::abs(k)))
        return -1;
    return static_cast<int>(n);
}

Field::Field(const Grid& g, std::vector<double> values)
    : grid_(g), v_(std::move(values)) {
    if (static_cast<long>(v_.size()) != grid_.node_count())
        throw Error("Field: value count does not match node count");
    for (double x : v_)
        if (!std::isfinite(x)) throw Error("Field: non-finite value");
}

SpaceTimeSolution::SpaceTimeSolution(const Grid& g, std::vector<Field> levels)
    : grid_(g), levels_(std::move(levels)) {
    if (static_cast<int>(levels_.size()) != grid_.levels())
        throw Error("SpaceTimeSolution: level count must equal step count + 1");
    for (const Field& f : levels_)
        if (!(f.grid() == grid_)) throw Error("SpaceTimeSolution: level grid mismatch");
}

Field sample(const SpaceTimeFn& f, const Grid& g, double t) {
    const int level = g.level_of(t);
    if (level < 0)
        throw Error("sample: t = " + std::to_string(t) + " is not on a grid time level");
    Field out(g);
    const double tl = g.time(level);
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            const double v = f(g.node(i, j), tl);
            if (!std::isfinite(v)) throw Error("sample: non-finite value");
            out.at(i, j) = v;
        }
    return out;
}

SpaceTimeSolution sample_solution(const SpaceTimeFn& f, const Grid& g) {
    std::vector<Field> levels;
    levels.reserve(g.levels());
    for (int k = 0; k < g.levels(); ++k) levels.push_back(sample(f, g, g.time(k)));
    return SpaceTimeSolution(g, std::move(levels));
}

namespace {

void require_stencil_room(const Grid& g) {
    if (g.nodes(0) < 4 || (g.dim() == 2 && g.nodes(1) < 4))
        throw Error("stencil: grids need at least 4 nodes per axis");
}

// Second-order first derivative along one axis; one-sided at the ends.
double d1(const Field& f, int i, int j, int axis) {
    const Grid& g = f.grid();
    const double h = g.h();
    const int n = g.nodes(axis);
    const int pos = axis == 0 ? i : j;
    auto val = [&](int s) { return axis == 0 ? f(i + s, j) : f(i, j + s); };
    if (pos == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
    if (pos == n - 1) return (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
    return (val(1) - val(-1)) / (2.0 * h);
}

// Second-order pure second derivative; one-sided four-point at the ends.
double d2(const Field& f, int i, int j, int axis) {
    const Grid& g = f.grid();
    const double h2 = g.h() * g.h();
    const int n = g.nodes(axis);
    const int pos = axis == 0 ? i : j;
    auto val = [&](int s) { return axis == 0 ? f(i + s, j) : f(i, j + s); };
    if (pos == 0) return (2.0 * val(0) - 5.0 * val(1) + 4.0 * val(2) - val(3)) / h2;
    if (pos == n - 1) return (2.0 * val(0) - 5.0 * val(-1) + 4.0 * val(-2) - val(-3)) / h2;
    return (val(1) - 2.0 * val(0) + val(-1)) / h2;
}

// Mixed derivative as composition of one-axis stencils. At interior nodes
// this is exactly the four-corner stencil.
double dxy(const Field& f, int i, int j) {
    const Grid& g = f.grid();
    const double h = g.h();
    const int ny = g.nodes(1);
    auto dy_at = [&](int ii) {
        if (j == 0) return (-3.0 * f(ii, 0) + 4.0 * f(ii, 1) - f(ii, 2)) / (2.0 * h);
        if (j == ny - 1)
            return (3.0 * f(ii, j) - 4.0 * f(ii, j - 1) + f(ii, j - 2)) / (2.0 * h);
        return (f(ii, j + 1) - f(ii, j - 1)) / (2.0 * h);
    };
    const int nx = g.nodes(0);
    if (i == 0) return (-3.0 * dy_at(0) + 4.0 * dy_at(1) - dy_at(2)) / (2.0 * h);
    if (i == nx - 1)
        return (3.0 * dy_at(i) - 4.0 * dy_at(i - 1) + dy_at(i - 2)) / (2.0 * h);
    return (dy_at(i + 1) - dy_at(i - 1)) / (2.0 * h);
}

}  // namespace

Vec gradient_at(const Field& f, int i, int j) {
    const Grid& g = f.grid();
    Vec q(g.dim());
    q[0] = d1(f, i, j, 0);
    if (g.dim() == 2) q[1] = d1(f, i, j, 1);
    return q;
}

SymMat hessian_at(const Field& f, int i, int j) {
    const Grid& g = f.grid();
    SymMat m(g.dim());
    m.set(0, 0, d2(f, i, j, 0));
    if (g.dim() == 2) {
        m.set(1, 1, d2(f, i, j, 1));
        m.set(0, 1, dxy(f, i, j));
    }
    return m;
}

std::vector<Field> gradient(const Field& f) {
    const Grid& g = f.grid();
    require_stencil_room(g);
    std::vector<Field> out(g.dim(), Field(g));
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            out[0].at(i, j) = d1(f, i, j, 0);
            if (g.dim() == 2) out[1].at(i, j) = d1(f, i, j, 1);
        }
    return out;
}

std::vector<Field> hessian(const Field& f) {
    const Grid& g = f.grid();
    require_stencil_room(g);
    const int comps = g.dim() == 1 ? 1 : 3;
    std::vector<Field> out(comps, Field(g));
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            out[0].at(i, j) = d2(f, i, j, 0);
            if (g.dim() == 2) {
                out[1].at(i, j) = d2(f, i, j, 1);
                out[2].at(i, j) = dxy(f, i, j);
            }
        }
    return out;
}

Field time_derivative(const SpaceTimeSolution& u, int level) {
    if (level < 1) throw Error("time_derivative: level must be >= 1");
    if (level >= u.level_count()) throw Error("time_derivative: level out of range");
    const Grid& g = u.grid();
    Field out(g);
    const Field& cur = u.level(level);
    const Field& prev = u.level(level - 1);
    for (long n = 0; n < g.node_count(); ++n)
        out.values()[n] = (cur.values()[n] - prev.values()[n]) / g.dt();
    return out;
}

namespace {

template <typename NodeFn>
double cylinder_space_max(const Grid& g, double r, NodeFn&& value) {
    if (r > g.extent() + 1e-12) throw Error("cylinder: radius exceeds grid extent");
    double best = -1.0;
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            const Vec x = g.node(i, j);
            double sup = std::abs(x[0]);
            if (g.dim() == 2) sup = std::max(sup, std::abs(x[1]));
            if (sup <= r + 1e-12) best = std::max(best, std::abs(value(i, j)));
        }
    if (best < 0.0) throw Error("cylinder: empty spatial section");
    return best;
}

}  // namespace

double sup_norm_on_cylinder(const Field& f, double r) {
    return cylinder_space_max(f.grid(), r, [&](int i, int j) { return f(i, j); });
}

double sup_norm_on_cylinder(const SpaceTimeSolution& u, double r) {
    const Grid& g = u.grid();
    double best = -1.0;
    for (int k = 0; k < u.level_count(); ++k) {
        const double t = g.time(k);
        if (t <= -r * r + 1e-12 || t > 1e-12) continue;
        const Field& f = u.level(k);
        best = std::max(best, cylinder_space_max(g, r, [&](int i, int j) { return f(i, j); }));
    }
    if (best < 0.0) throw Error("cylinder: no time levels in (-r^2, 0]");
    return best;
}

double sup_time_derivative_on_cylinder(const SpaceTimeSolution& u, double r) {
    const Grid& g = u.grid();
    double best = -1.0;
    for (int k = 1; k < u.level_count(); ++k) {
        const double t = g.time(k);
        if (t <= -r * r + 1e-12 || t > 1e-12) continue;
        const Field ut = time_derivative(u, k);
        best = std::max(best, cylinder_space_max(g, r, [&](int i, int j) { return ut(i, j); }));
    }
    if (best < 0.0) throw Error("cylinder: no time levels in (-r^2, 0]");
    return best;
}

}  // namespace degenlab
