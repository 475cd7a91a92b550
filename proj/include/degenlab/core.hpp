#ifndef DEGENLAB_CORE_HPP
#define DEGENLAB_CORE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "degenlab/error.hpp"
#include "degenlab/linalg.hpp"

namespace degenlab {

// Uniform space-time grid on the cube [-extent, extent]^dim (or the half
// cube with x_n >= 0) with time levels t_start + k*dt up to t_end <= 0.
class Grid {
public:
    Grid(int dim, double extent, double h, double dt,
         std::pair<double, double> t_span, bool half_space = false);

    int dim() const { return dim_; }
    double extent() const { return extent_; }
    double h() const { return h_; }
    double dt() const { return dt_; }
    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    bool half_space() const { return half_space_; }

    double axis_min(int axis) const {
        return (half_space_ && axis == dim_ - 1) ? 0.0 : -extent_;
    }
    int nodes(int axis) const { return axis == 0 ? nx_ : ny_; }
    long node_count() const { return static_cast<long>(nx_) * ny_; }
    int steps() const { return steps_; }
    int levels() const { return steps_ + 1; }

    double coord(int axis, int idx) const { return axis_min(axis) + h_ * idx; }
    Vec node(int i, int j = 0) const {
        return Vec::of(dim_, coord(0, i), dim_ == 2 ? coord(1, j) : 0.0);
    }
    double time(int level) const { return t_start_ + dt_ * level; }

    long index(int i, int j = 0) const { return i + static_cast<long>(nx_) * j; }
    bool interior(int i, int j = 0) const {
        bool in = i > 0 && i < nx_ - 1;
        if (dim_ == 2) in = in && j > 0 && j < ny_ - 1;
        return in;
    }
    // Closest time level, or -1 if t does not sit on the time lattice.
    int level_of(double t) const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && extent_ == o.extent_ && h_ == o.h_ &&
               dt_ == o.dt_ && t_start_ == o.t_start_ && t_end_ == o.t_end_ &&
               half_space_ == o.half_space_;
    }

private:
    int dim_;
    double extent_, h_, dt_, t_start_, t_end_;
    bool half_space_;
    int nx_, ny_, steps_;
};

// Scalar values on the spatial nodes of a grid at one time level.
class Field {
public:
    explicit Field(const Grid& g) : grid_(g), v_(g.node_count(), 0.0) {}
    Field(const Grid& g, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    double operator()(int i, int j = 0) const { return v_[grid_.index(i, j)]; }
    double& at(int i, int j = 0) { return v_[grid_.index(i, j)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

private:
    Grid grid_;
    std::vector<double> v_;
};

// One field per time level. Levels all share the construction grid.
class SpaceTimeSolution {
public:
    SpaceTimeSolution(const Grid& g, std::vector<Field> levels);

    const Grid& grid() const { return grid_; }
    int level_count() const { return static_cast<int>(levels_.size()); }
    const Field& level(int k) const { return levels_[k]; }
    double time(int k) const { return grid_.time(k); }

private:
    Grid grid_;
    std::vector<Field> levels_;
};

// Pointwise (gradient, Hessian, time derivative) triple for inequality fuzzing.
struct Jet {
    Vec q;
    SymMat M;
    double tau = 0.0;

    explicit Jet(int dim) : q(dim), M(dim) {}
    Jet(const Vec& q, const SymMat& M, double tau) : q(q), M(M), tau(tau) {}
};

// --- sampling -------------------------------------------------------------

using SpaceTimeFn = std::function<double(const Vec&, double)>;

// Evaluate f at every node of the level closest to t; t must be on the lattice.
Field sample(const SpaceTimeFn& f, const Grid& g, double t);

// Fill one field per time level.
SpaceTimeSolution sample_solution(const SpaceTimeFn& f, const Grid& g);

// --- discrete derivatives ---------------------------------------------------

// Central second-order stencils at interior nodes, one-sided second-order at
// boundary nodes. Grids need at least 4 nodes per axis (one-sided Hessian).
Vec gradient_at(const Field& f, int i, int j = 0);
SymMat hessian_at(const Field& f, int i, int j = 0);

// Component fields: gradient[k] = d u / d x_k.
std::vector<Field> gradient(const Field& f);
// Packing order (xx) in 1-D, (xx, yy, xy) in 2-D. Mixed entry is the
// four-corner stencil at interior nodes.
std::vector<Field> hessian(const Field& f);

// Backward difference (u^k - u^{k-1}) / dt, the same quantity the explicit
// scheme advances. Rejects level 0.
Field time_derivative(const SpaceTimeSolution& u, int level);

// --- parabolic cylinders ----------------------------------------------------

// Max |value| over nodes with |x|_inf <= r. Q_r uses the infinity ball.
double sup_norm_on_cylinder(const Field& f, double r);
// Max |value| over nodes with |x|_inf <= r at levels with t in (-r^2, 0].
double sup_norm_on_cylinder(const SpaceTimeSolution& u, double r);
// Same cylinder, applied to the backward-difference time derivative.
double sup_time_derivative_on_cylinder(const SpaceTimeSolution& u, double r);

}  // namespace degenlab

#endif
