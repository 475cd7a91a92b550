#include "degenlab/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degenlab {

namespace {

// Quintic smoothstep: 1 on [0, lo], 0 on [hi, inf), C^2 across the joints.
struct Bump {
    double lo, hi;

    double s(double x) const { return (x - lo) / (hi - lo); }
    double value(double x) const {
        if (x <= lo) return 1.0;
        if (x >= hi) return 0.0;
        const double t = s(x);
        return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    double d1(double x) const {
        if (x <= lo || x >= hi) return 0.0;
        const double t = s(x);
        return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (hi - lo);
    }
    double d2(double x) const {
        if (x <= lo || x >= hi) return 0.0;
        const double t = s(x);
        return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / ((hi - lo) * (hi - lo));
    }
};

}  // namespace

Cutoff::Cutoff(int dim, double extent, bool half_space)
    : dim_(dim), extent_(extent), half_space_(half_space) {
    if (dim < 1 || dim > 2) throw Error("Cutoff: dim must be 1 or 2");
    if (!(extent > 0.0)) throw Error("Cutoff: extent must be positive");
}

double Cutoff::value(const Vec& x, double t) const {
    const Bump sp{0.5 * extent_, 0.95 * extent_};
    const Bump tm{0.25 * extent_ * extent_, 0.9025 * extent_ * extent_};
    double v = tm.value(-t);
    for (int k = 0; k < dim_; ++k) v *= sp.value(std::abs(x[k]));
    return v;
}

Vec Cutoff::grad(const Vec& x, double t) const {
    const Bump sp{0.5 * extent_, 0.95 * extent_};
    const Bump tm{0.25 * extent_ * extent_, 0.9025 * extent_ * extent_};
    Vec g(dim_);
    for (int k = 0; k < dim_; ++k) {
        double v = tm.value(-t);
        for (int l = 0; l < dim_; ++l) {
            const double a = std::abs(x[l]);
            v *= (l == k) ? sp.d1(a) * (x[l] >= 0.0 ? 1.0 : -1.0) : sp.value(a);
        }
        g[k] = v;
    }
    return g;
}

SymMat Cutoff::hess(const Vec& x, double t) const {
    const Bump sp{0.5 * extent_, 0.95 * extent_};
    const Bump tm{0.25 * extent_ * extent_, 0.9025 * extent_ * extent_};
    SymMat m(dim_);
    const double w = tm.value(-t);
    if (dim_ == 1) {
        m.set(0, 0, w * sp.d2(std::abs(x[0])));
        return m;
    }
    const double a0 = std::abs(x[0]), a1 = std::abs(x[1]);
    const double s0 = x[0] >= 0.0 ? 1.0 : -1.0, s1 = x[1] >= 0.0 ? 1.0 : -1.0;
    m.set(0, 0, w * sp.d2(a0) * sp.value(a1));
    m.set(1, 1, w * sp.value(a0) * sp.d2(a1));
    m.set(0, 1, w * sp.d1(a0) * s0 * sp.d1(a1) * s1);
    return m;
}

double Cutoff::time_deriv(const Vec& x, double t) const {
    const Bump sp{0.5 * extent_, 0.95 * extent_};
    const Bump tm{0.25 * extent_ * extent_, 0.9025 * extent_ * extent_};
    double v = -tm.d1(-t);  // d/dt of tm(-t)
    for (int k = 0; k < dim_; ++k) v *= sp.value(std::abs(x[k]));
    return v;
}

double select_beta(const CoefficientParams& params) {
    if (params.family == Family::PLaplace) {
        if (!(params.p > 2.0)) throw Error("select_beta: p-Laplace rule needs p > 2");
        return std::max(3.0 - params.p, 0.0);
    }
    if (!(params.gamma > 0.0)) throw Error("select_beta: rule needs gamma > 0");
    return std::max(1.0 - params.gamma, 0.0);
}

DominationReport check_domination(const CoefficientParams& params, double beta) {
    DominationReport rep;
    if (params.family == Family::PLaplace) {
        const double p = params.p;
        if (!(p > 2.0)) throw Error("check_domination: need p > 2");
        rep.lhs = 0.5 * (p - beta - 2.0);
        const double m =
            std::min({p - 2.0, 1.5 * (p - 2.0), 0.5 * (2.0 * p - 5.0)});
        rep.rhs = m;
        rep.min_identity_exact = (m == 0.5 * (2.0 * p - 5.0));
    } else {
        const double gamma = params.gamma;
        if (!(gamma > 0.0)) throw Error("check_domination: need gamma > 0");
        rep.lhs = -0.5 * (gamma + beta);
        const double m = std::min({0.0, 0.5 * gamma, -0.5});
        rep.rhs = m;
        rep.min_identity_exact = (m == -0.5);
    }
    rep.margin = rep.rhs - rep.lhs;
    rep.ok = rep.lhs <= rep.rhs;
    return rep;
}

JetCheck jet_cauchy_schwarz(const Jet& jet, double epsilon, const Vec& xi) {
    const Vec mxi = jet.M.apply(xi);
    const double lhs = jet.q.dot(mxi);
    JetCheck c;
    c.lhs = lhs * lhs;
    c.rhs = (epsilon * epsilon + jet.q.norm_sq()) * mxi.norm_sq();
    c.ok = c.lhs <= c.rhs * (1.0 + 1e-12) + 1e-300;
    return c;
}

JetCheck jet_ut_bound(const Jet& jet, const CoefficientParams& params) {
    const double n = jet.q.dim();
    const double s = params.epsilon * params.epsilon + jet.q.norm_sq();
    JetCheck c;
    double tau;
    if (params.family == Family::FullyNonlinear) {
        if (!params.F) throw Error("jet_ut_bound: missing F instance");
        tau = degenerate_multiplier(params, jet.q) * (*params.F)(jet.M);
        c.rhs = n * params.F->ellipticity().Lambda * std::pow(s, 0.5 * params.gamma) *
                jet.M.frobenius();
    } else {
        tau = a_tensor(params, jet.q).contract(jet.M);
        const double Lambda = ellipticity_of(params).Lambda;
        c.rhs = std::sqrt(n) * Lambda *
                std::pow(s, 0.5 * params.degeneracy_exponent()) * jet.M.frobenius();
    }
    c.lhs = std::abs(tau);
    c.ok = c.lhs <= c.rhs * (1.0 + 1e-12) + 1e-300;
    return c;
}

BernsteinConfig BernsteinConfig::for_run(const SpaceTimeSolution& u,
                                         const CoefficientParams& params, double delta) {
    if (!(delta > 0.0)) throw Error("BernsteinConfig: delta must be positive");
    const Grid& g = u.grid();
    Cutoff cut(g);
    double A = 0.0;
    for (int k = 1; k < u.level_count(); ++k) {
        const Field ut = time_derivative(u, k);
        const double t = g.time(k);
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i)
                A = std::max(A, cut.value(g.node(i, j), t) * std::abs(ut(i, j)));
    }
    return BernsteinConfig{delta, select_beta(params), A, cut};
}

std::vector<Field> auxiliary_v(const SpaceTimeSolution& u, const BernsteinConfig& config,
                               const CoefficientParams& params) {
    const Grid& g = u.grid();
    if (u.level_count() < 2) throw Error("auxiliary_v: need at least 2 time levels");
    const double eps2 = params.epsilon * params.epsilon;
    const double expo = 0.5 * (2.0 - config.beta);
    std::vector<Field> out;
    out.reserve(u.level_count() - 1);
    for (int k = 1; k < u.level_count(); ++k) {
        const Field ut = time_derivative(u, k);
        const double t = g.time(k);
        Field v(g);
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i) {
                const double eta = config.cutoff.value(g.node(i, j), t);
                const Vec q = gradient_at(u.level(k), i, j);
                v.at(i, j) = eta * eta * ut(i, j) * ut(i, j) +
                             config.delta * config.A *
                                 std::pow(eps2 + q.norm_sq(), expo);
            }
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

// Linearized operator L w = a^{ij}(Du) w_ij + a^{ij}_{q_l}(Du) u_ij w_l
// (quasilinear), resp. the fully nonlinear linearization with F_ij and the
// multiplier derivative.
double linearized_at(const CoefficientParams& params, const Vec& du, const SymMat& d2u,
                     const Vec& dw, const SymMat& d2w) {
    if (params.family == Family::FullyNonlinear) {
        const double s = params.epsilon * params.epsilon + du.norm_sq();
        const double mult = std::pow(s, 0.5 * params.gamma);
        const SymMat fij = params.F->derivative(d2u);
        const double fval = (*params.F)(d2u);
        double first = 0.0;
        for (int l = 0; l < du.dim(); ++l)
            first += params.gamma * std::pow(s, 0.5 * params.gamma - 1.0) * fval *
                     du[l] * dw[l];
        return mult * fij.contract(d2w) + first;
    }
    const SymMat a = a_tensor(params, du);
    const std::vector<SymMat> ag = a_tensor_gradient(params, du);
    double out = a.contract(d2w);
    for (int l = 0; l < du.dim(); ++l) out += ag[l].contract(d2u) * dw[l];
    return out;
}

}  // namespace

DefectReport defect_report(const SpaceTimeSolution& u, const BernsteinConfig& config,
                           const CoefficientParams& params) {
    const Grid& g = u.grid();
    const std::vector<Field> vstack = auxiliary_v(u, config, params);
    DefectReport rep;
    rep.A = config.A;
    rep.delta = config.delta;
    rep.v_max = -1.0;

    // (a) location and value of max v over the stack
    for (std::size_t kk = 0; kk < vstack.size(); ++kk) {
        const Field& v = vstack[kk];
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i)
                if (v(i, j) > rep.v_max) {
                    rep.v_max = v(i, j);
                    rep.v_max_level = static_cast<int>(kk) + 1;
                    rep.v_max_node = {i, j};
                }
    }
    const int km = rep.v_max_level;
    const Vec xm = g.node(rep.v_max_node[0], rep.v_max_node[1]);
    rep.eta_at_max = config.cutoff.value(xm, g.time(km));
    rep.ut_at_max = time_derivative(u, km)(rep.v_max_node[0], rep.v_max_node[1]);

    // (b) the maximum-point dichotomy, echoed as a diagnostic: the max lies on the
    // cutoff's zero set, or |u_t| there does not exceed the interior u_t scale
    // (the sup over the eta = 1 region).
    double interior_scale = 0.0;
    for (int k = 1; k < u.level_count(); ++k) {
        const Field ut = time_derivative(u, k);
        const double t = g.time(k);
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i)
                if (config.cutoff.value(g.node(i, j), t) >= 1.0 - 1e-12)
                    interior_scale = std::max(interior_scale, std::abs(ut(i, j)));
    }
    rep.dichotomy = rep.eta_at_max <= 1e-6 ||
                    std::abs(rep.ut_at_max) <= interior_scale * (1.0 + 1e-9) + 1e-12;

    // diagnostic defect field v_t - Lv at interior nodes with full stencils;
    // nodes without one are skipped and counted
    rep.max_defect = -std::numeric_limits<double>::infinity();
    const int j_lo = g.dim() == 2 ? 1 : 0;
    const int j_hi = g.dim() == 2 ? g.nodes(1) - 1 : 1;
    const long interior_per_level =
        static_cast<long>(g.nodes(0) - 2) * (j_hi - j_lo);
    rep.skipped_nodes =
        static_cast<long>(vstack.size() - 1) * (g.node_count() - interior_per_level);
    for (std::size_t kk = 1; kk < vstack.size(); ++kk) {
        const int level = static_cast<int>(kk) + 1;
        const Field& v = vstack[kk];
        const Field& vp = vstack[kk - 1];
        const Field& ul = u.level(level);
        for (int j = j_lo; j < j_hi; ++j)
            for (int i = 1; i < g.nodes(0) - 1; ++i) {
                const double vt = (v(i, j) - vp(i, j)) / g.dt();
                const Vec du = gradient_at(ul, i, j);
                const SymMat d2u = hessian_at(ul, i, j);
                const Vec dv = gradient_at(v, i, j);
                const SymMat d2v = hessian_at(v, i, j);
                rep.max_defect =
                    std::max(rep.max_defect,
                             vt - linearized_at(params, du, d2u, dv, d2v));
            }
    }

    // boundary contribution: sup |phi_t|^2 over the flat boundary, read off
    // the run's own backward differences at x_n = 0
    if (g.half_space()) {
        double sup = 0.0;
        for (int k = 1; k < u.level_count(); ++k) {
            const Field ut = time_derivative(u, k);
            for (int i = 0; i < g.nodes(0); ++i) sup = std::max(sup, std::abs(ut(i, 0)));
        }
        rep.boundary_term = sup * sup;
    }

    // (c) the chain A^2 <= v_max <= ||phi_t||^2 + 2 delta A, asserted at the
    // level where it is literally checkable
    const double bound = rep.boundary_term + 2.0 * config.delta * config.A;
    rep.verdict_margin = bound - rep.v_max;
    rep.verdict = rep.v_max <= bound * (1.0 + 1e-9) + 1e-300;
    return rep;
}

DeltaSweepResult delta_sweep(const SpaceTimeSolution& u, const CoefficientParams& params,
                             const std::vector<double>& ladder) {
    if (ladder.empty()) throw Error("delta_sweep: empty ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i - 1])) throw Error("delta_sweep: ladder must increase");
    DeltaSweepResult res;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (double d : ladder) {
        const BernsteinConfig cfg = BernsteinConfig::for_run(u, params, d);
        const DefectReport rep = defect_report(u, cfg, params);
        res.trace.emplace_back(d, rep.verdict);
        best_margin = std::max(best_margin, rep.verdict_margin);
        if (rep.verdict) {
            res.delta_min = d;
            res.report = rep;
            return res;
        }
    }
    throw Error("delta_sweep: no delta in the ladder passes (best margin " +
                std::to_string(best_margin) + ")");
}

}  // namespace degenlab
