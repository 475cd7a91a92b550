#include "degenlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace degenlab {

ProblemData ProblemData::from_function(const SpaceTimeFn& f, double t_start) {
    return ProblemData{f, [f, t_start](const Vec& x) { return f(x, t_start); }};
}

ProblemData ProblemData::from_exact(const ExactSolution& sol, double t_start) {
    return from_function(sol.as_function(), t_start);
}

ProblemData ProblemData::constant(double c) {
    return ProblemData{[c](const Vec&, double) { return c; },
                       [c](const Vec&) { return c; }};
}

ProblemSpec::ProblemSpec(CoefficientParams params_, Grid grid_, ProblemData data_,
                         double gradient_cap_)
    : params(std::move(params_)),
      grid(std::move(grid_)),
      data(std::move(data_)),
      gradient_cap(gradient_cap_) {
    if (!(params.epsilon > 0.0))
        throw Error("ProblemSpec: the solver only evolves regularized problems (epsilon > 0)");
    if (params.family == Family::PLaplace && params.p < 2.0)
        throw Error("ProblemSpec: p-Laplace evolution needs p >= 2");
    if (params.family != Family::PLaplace && !(params.gamma > 0.0))
        throw Error("ProblemSpec: evolution needs gamma > 0");
    if (params.family == Family::FullyNonlinear && !params.F)
        throw Error("ProblemSpec: fully nonlinear family needs an F instance");
    if (!(gradient_cap >= 0.0)) throw Error("ProblemSpec: gradient_cap must be >= 0");

    // Boundary and initial data must agree where the initial slice meets the
    // lateral boundary.
    const Grid& g = grid;
    double worst = 0.0;
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
            if (g.interior(i, j)) continue;
            const Vec x = g.node(i, j);
            worst = std::max(worst,
                             std::abs(data.boundary(x, g.t_start()) - data.initial(x)));
        }
    if (worst > 1e-8)
        throw Error("ProblemSpec: boundary and initial data disagree on the corner set by " +
                    std::to_string(worst));
}

double cfl_dt(const CoefficientParams& params, int dim, double h, double G) {
    if (!(h > 0.0)) throw Error("cfl_dt: h must be positive");
    if (G < 0.0) throw Error("cfl_dt: G must be >= 0");
    const double mult = std::pow(params.epsilon * params.epsilon + G * G,
                                 0.5 * params.degeneracy_exponent());
    const double Lambda = ellipticity_of(params).Lambda;
    return 0.4 * h * h / (2.0 * dim * Lambda * mult);
}

double suggest_gradient_cap(const ProblemData& data, const Grid& grid) {
    const Field init = sample([&](const Vec& x, double) { return data.initial(x); },
                              grid, grid.t_start());
    double g = 0.0;
    for (int j = 0; j < grid.nodes(1); ++j)
        for (int i = 0; i < grid.nodes(0); ++i)
            g = std::max(g, gradient_at(init, i, j).norm());
    return g + 1.0;
}

double fitted_dt(double span, double dt_max) {
    if (!(span > 0.0) || !(dt_max > 0.0)) throw Error("fitted_dt: positive inputs required");
    const double n = std::ceil(span / dt_max - 1e-12);
    return span / std::max(1.0, n);
}

namespace {

struct StepStats {
    double max_gradient = 0.0;
    bool finite = true;
    int bad_i = 0, bad_j = 0;
};

// Forward Euler update; writes the new level into out and records the max
// interior gradient of the *input* state.
StepStats euler_update(const Field& u, Field& out, double new_time,
                       const ProblemSpec& spec, double dt) {
    const Grid& g = u.grid();
    const double h = g.h();
    const double h2 = h * h;
    const CoefficientParams& params = spec.params;
    const bool fn = params.family == Family::FullyNonlinear;
    const double eps2 = params.epsilon * params.epsilon;
    const double gexp = params.degeneracy_exponent();
    const double pm2 = params.p - 2.0;
    StepStats stats;

    const int nx = g.nodes(0), ny = g.nodes(1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!g.interior(i, j)) {
                out.at(i, j) = spec.data.boundary(g.node(i, j), new_time);
                continue;
            }
            double inc, gnorm;
            if (g.dim() == 1) {
                const double qx = (u(i + 1) - u(i - 1)) / (2.0 * h);
                const double uxx = (u(i + 1) - 2.0 * u(i) + u(i - 1)) / h2;
                const double s = eps2 + qx * qx;
                gnorm = std::abs(qx);
                if (fn) {
                    SymMat M(1);
                    M.set(0, 0, uxx);
                    inc = std::pow(s, 0.5 * gexp) * (*params.F)(M);
                } else {
                    inc = std::pow(s, 0.5 * gexp) * (1.0 + pm2 * qx * qx / s) * uxx;
                }
            } else {
                const double u0 = u(i, j);
                const double up0 = u(i + 1, j), um0 = u(i - 1, j);
                const double u0p = u(i, j + 1), u0m = u(i, j - 1);
                const double qx = (up0 - um0) / (2.0 * h);
                const double qy = (u0p - u0m) / (2.0 * h);
                const double uxx = (up0 - 2.0 * u0 + um0) / h2;
                const double uyy = (u0p - 2.0 * u0 + u0m) / h2;
                const double s = eps2 + qx * qx + qy * qy;
                gnorm = std::sqrt(qx * qx + qy * qy);
                const double pref = std::pow(s, 0.5 * gexp);
                if (fn) {
                    const double uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) -
                                        u(i - 1, j + 1) + u(i - 1, j - 1)) /
                                       (4.0 * h2);
                    SymMat M(2);
                    M.set(0, 0, uxx);
                    M.set(1, 1, uyy);
                    M.set(0, 1, uxy);
                    inc = pref * (*params.F)(M);
                } else {
                    const double a11 = pref * (1.0 + pm2 * qx * qx / s);
                    const double a22 = pref * (1.0 + pm2 * qy * qy / s);
                    const double a12 = pref * pm2 * qx * qy / s;
                    // Sign-adapted cross stencil keeps all neighbor weights
                    // nonnegative (monotone update) whenever |a12| <= min(a11,a22).
                    double uxy;
                    const double axes = u0 + u0 - up0 - um0 - u0p - u0m;
                    if (a12 >= 0.0)
                        uxy = (axes + u(i + 1, j + 1) + u(i - 1, j - 1)) / (2.0 * h2);
                    else
                        uxy = -(axes + u(i + 1, j - 1) + u(i - 1, j + 1)) / (2.0 * h2);
                    inc = a11 * uxx + a22 * uyy + 2.0 * a12 * uxy;
                }
            }
            const double v = u(i, j) + dt * inc;
            if (!std::isfinite(v)) {
                stats.finite = false;
                stats.bad_i = i;
                stats.bad_j = j;
                return stats;
            }
            out.at(i, j) = v;
            stats.max_gradient = std::max(stats.max_gradient, gnorm);
        }
    return stats;
}

}  // namespace

Field step(const Field& state, double prev_time, const ProblemSpec& spec, double dt) {
    Field out(state.grid());
    const StepStats stats = euler_update(state, out, prev_time + dt, spec, dt);
    if (!stats.finite) {
        const Vec x = state.grid().node(stats.bad_i, stats.bad_j);
        throw DivergenceError("step: non-finite value", x[0],
                              state.grid().dim() == 2 ? x[1] : 0.0, prev_time + dt);
    }
    return out;
}

SolveReport solve(const ProblemSpec& spec) {
    const Grid& g = spec.grid;
    const double dtc = cfl_dt(spec.params, g.dim(), g.h(), spec.gradient_cap);
    const int nsub = static_cast<int>(std::max(1.0, std::ceil(g.dt() / dtc - 1e-12)));
    const double dt = g.dt() / nsub;

    std::vector<Field> levels;
    levels.reserve(g.levels());
    levels.emplace_back(
        sample([&](const Vec& x, double) { return spec.data.initial(x); }, g, g.t_start()));

    SolveReport rep;
    rep.dt_used = dt;
    rep.substeps_per_level = nsub;

    Field cur = levels[0];
    Field next(g);
    for (int k = 1; k <= g.steps(); ++k) {
        for (int s = 0; s < nsub; ++s) {
            const double tn = g.t_start() + (k - 1) * g.dt() + (s + 1) * dt;
            const StepStats stats = euler_update(cur, next, tn, spec, dt);
            if (!stats.finite) {
                rep.diverged = true;
                rep.divergence_note =
                    "non-finite value at node (" + std::to_string(stats.bad_i) + "," +
                    std::to_string(stats.bad_j) + "), t = " + std::to_string(tn);
                return rep;
            }
            rep.max_observed_gradient =
                std::max(rep.max_observed_gradient, stats.max_gradient);
            if (stats.max_gradient > 2.0 * spec.gradient_cap) {
                rep.diverged = true;
                rep.divergence_note =
                    "observed gradient " + std::to_string(stats.max_gradient) +
                    " exceeds twice the cap " + std::to_string(spec.gradient_cap) +
                    " at t = " + std::to_string(tn);
                return rep;
            }
            std::swap(cur, next);
        }
        levels.push_back(cur);
    }
    rep.solution = SpaceTimeSolution(g, std::move(levels));
    rep.cfl_margin =
        cfl_dt(spec.params, g.dim(), g.h(), rep.max_observed_gradient) / dt;
    return rep;
}

namespace {

int worker_count(std::size_t jobs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("DEGENLAB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<int>(std::min<std::size_t>(n, jobs));
}

}  // namespace

std::vector<SweepEntry> epsilon_sweep(const ProblemSpec& tmpl,
                                      const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw Error("epsilon_sweep: empty epsilon list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw Error("epsilon_sweep: epsilons must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw Error("epsilon_sweep: epsilons must be strictly decreasing");
    }
    std::vector<SweepEntry> out;
    out.reserve(eps_list.size());
    for (double e : eps_list) out.push_back(SweepEntry{e, SolveReport{}, 0.0});
    const int workers = worker_count(eps_list.size());
    std::vector<std::thread> pool;
    auto run_one = [&](std::size_t idx) {
        ProblemSpec spec(tmpl.params.with_epsilon(eps_list[idx]), tmpl.grid, tmpl.data,
                         tmpl.gradient_cap);
        SolveReport rep = solve(spec);
        double sup_ut = 0.0;
        if (!rep.diverged)
            sup_ut = sup_time_derivative_on_cylinder(*rep.solution, 0.5);
        out[idx] = SweepEntry{eps_list[idx], std::move(rep), sup_ut};
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < eps_list.size(); ++i) run_one(i);
    } else {
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < eps_list.size(); i += workers) run_one(i);
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

SpaceTimeSolution intrinsic_rescale(const SpaceTimeSolution& u,
                                    const CoefficientParams& params, double r,
                                    double rho, const Grid& target) {
    if (!(r > 0.0) || !(rho > 0.0))
        throw Error("intrinsic_rescale: r and rho must be positive");
    const Grid& src = u.grid();
    if (src.half_space() || target.half_space())
        throw Error("intrinsic_rescale: full cubes only");
    const double ts = r * r * std::pow(rho, -params.degeneracy_exponent());
    const double scale = 1.0 / (r * rho);

    auto interp = [&](const Vec& x, double t) {
        // time bracket
        const double tk = (t - src.t_start()) / src.dt();
        int k0 = static_cast<int>(std::floor(tk));
        k0 = std::max(0, std::min(k0, src.steps() - 1));
        const double wt = tk - k0;
        if (tk < -1e-9 || tk > src.steps() + 1e-9)
            throw Error("intrinsic_rescale: sample time outside source cylinder");
        // space cell
        auto cell = [&](int axis, double c) {
            const double fi = (c - src.axis_min(axis)) / src.h();
            int i0 = static_cast<int>(std::floor(fi));
            i0 = std::max(0, std::min(i0, src.nodes(axis) - 2));
            if (fi < -1e-9 || fi > src.nodes(axis) - 1 + 1e-9)
                throw Error("intrinsic_rescale: sample point outside source cylinder");
            return std::pair<int, double>(i0, fi - i0);
        };
        const std::pair<int, double> cx = cell(0, x[0]);
        const int i0 = cx.first;
        const double wx = cx.second;
        int j0 = 0;
        double wy = 0.0;
        if (src.dim() == 2) std::tie(j0, wy) = cell(1, x[1]);
        auto bilinear = [&](const Field& f) {
            if (src.dim() == 1) return (1 - wx) * f(i0) + wx * f(i0 + 1);
            return (1 - wx) * (1 - wy) * f(i0, j0) + wx * (1 - wy) * f(i0 + 1, j0) +
                   (1 - wx) * wy * f(i0, j0 + 1) + wx * wy * f(i0 + 1, j0 + 1);
        };
        return (1 - wt) * bilinear(u.level(k0)) + wt * bilinear(u.level(k0 + 1));
    };

    std::vector<Field> levels;
    levels.reserve(target.levels());
    for (int k = 0; k < target.levels(); ++k) {
        Field f(target);
        const double t = target.time(k);
        for (int j = 0; j < target.nodes(1); ++j)
            for (int i = 0; i < target.nodes(0); ++i) {
                const Vec x = target.node(i, j);
                f.at(i, j) = scale * interp(x * r, t * ts);
            }
        levels.push_back(std::move(f));
    }
    return SpaceTimeSolution(target, std::move(levels));
}

}  // namespace degenlab
