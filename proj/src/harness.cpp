#include "degenlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "degenlab/bernstein.hpp"
#include "degenlab/regularity.hpp"
#include "degenlab/rng.hpp"

namespace degenlab {

using json = nlohmann::json;

std::string command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::SweepEps: return "sweep-eps";
        case Command::Exponents: return "exponents";
        case Command::BernsteinCheck: return "bernstein-check";
        case Command::JetFuzz: return "jet-fuzz";
        case Command::BarrierCheck: return "barrier-check";
        case Command::ScalingCheck: return "scaling-check";
        case Command::Convergence: return "convergence";
    }
    throw Error("command_name: unreachable");
}

Command command_from_name(const std::string& name) {
    for (Command c : {Command::Solve, Command::SweepEps, Command::Exponents,
                      Command::BernsteinCheck, Command::JetFuzz, Command::BarrierCheck,
                      Command::ScalingCheck, Command::Convergence})
        if (command_name(c) == name) return c;
    throw ConfigError("command: unknown command '" + name + "'");
}

// --- config parsing ----------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + ": unknown key '" + it.key() + "'");
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key + ": missing required key");
    }
    if (!v->is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v->get<double>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key + ": missing required key");
    }
    if (!v->is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v->get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v->get<bool>();
}

std::vector<double> get_array(const json& obj, const std::string& path,
                              const std::string& key) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError(path + "." + key + ": missing required key");
    if (!v->is_array()) throw ConfigError(path + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(path + "." + key + ": expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ProblemConfig parse_problem(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"family", "p", "gamma", "operator", "epsilon", "grid", "data",
                "data_value", "gradient_cap"});
    ProblemConfig pc;
    pc.family = get_string(obj, path, "family", std::string("p-laplace"));
    if (pc.family != "p-laplace" && pc.family != "fully-nonlinear" &&
        pc.family != "general-quasilinear")
        throw ConfigError(path + ".family: unknown family '" + pc.family + "'");
    if (pc.family != "fully-nonlinear") pc.p = get_number(obj, path, "p");
    if (pc.family != "p-laplace") pc.gamma = get_number(obj, path, "gamma");
    pc.op = get_string(obj, path, "operator", std::string("trace"));
    if (pc.op != "trace" && pc.op != "bellman")
        throw ConfigError(path + ".operator: expected 'trace' or 'bellman'");
    if (find(obj, "epsilon")) pc.epsilon = get_number(obj, path, "epsilon");
    if (find(obj, "gradient_cap")) pc.gradient_cap = get_number(obj, path, "gradient_cap");
    pc.data = get_string(obj, path, "data", std::string("exact"));
    if (pc.data != "exact" && pc.data != "cosine" && pc.data != "constant" &&
        pc.data != "x1-sine")
        throw ConfigError(path + ".data: unknown data set '" + pc.data + "'");
    pc.data_value = get_number(obj, path, "data_value", 1.0);

    const json* gj = find(obj, "grid");
    if (!gj) throw ConfigError(path + ".grid: missing required key");
    const std::string gpath = path + ".grid";
    check_keys(*gj, gpath, {"dim", "extent", "h", "dt", "t_start", "half_space"});
    pc.grid.dim = static_cast<int>(get_number(*gj, gpath, "dim", 2.0));
    if (pc.grid.dim != 1 && pc.grid.dim != 2)
        throw ConfigError(gpath + ".dim: must be 1 or 2");
    pc.grid.extent = get_number(*gj, gpath, "extent");
    if (!(pc.grid.extent > 0.0)) throw ConfigError(gpath + ".extent: must be positive");
    pc.grid.h = get_number(*gj, gpath, "h");
    if (!(pc.grid.h > 0.0)) throw ConfigError(gpath + ".h: must be positive");
    if (find(*gj, "dt")) pc.grid.dt = get_number(*gj, gpath, "dt");
    if (find(*gj, "t_start")) pc.grid.t_start = get_number(*gj, gpath, "t_start");
    pc.grid.half_space = get_bool(*gj, gpath, "half_space", false);
    return pc;
}

bool needs_problem(Command c) {
    return c != Command::JetFuzz && c != Command::ScalingCheck;
}

bool runs_solver(Command c) {
    return c == Command::Solve || c == Command::SweepEps || c == Command::Exponents ||
           c == Command::BernsteinCheck || c == Command::BarrierCheck ||
           c == Command::Convergence;
}

const std::set<std::string>& tolerance_keys() {
    static const std::set<std::string> keys{
        "sweep_spread",   "sweep_band",        "spatial_fit",
        "time_exponent_min", "barrier_defect", "solve_error",
        "convergence_factor", "exponent_identity"};
    return keys;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not a well-formed document: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected an object");

    ExperimentConfig cfg;
    cfg.command = command_from_name(get_string(doc, "config", "command"));

    std::set<std::string> allowed{"command", "output_dir", "seed", "tolerances"};
    if (needs_problem(cfg.command)) allowed.insert("problem");
    switch (cfg.command) {
        case Command::SweepEps: allowed.insert("epsilons"); break;
        case Command::Exponents: allowed.insert("source"); break;
        case Command::BernsteinCheck:
            allowed.insert({"delta_ladder", "rescale_h", "rescale_levels"});
            break;
        case Command::JetFuzz:
            allowed.insert({"samples", "p_values", "gamma_values"});
            break;
        case Command::BarrierCheck:
            allowed.insert({"phi", "bound_u", "with_solve"});
            break;
        case Command::ScalingCheck:
            allowed.insert({"p_samples", "gamma_samples", "domination_samples"});
            break;
        case Command::Convergence: allowed.insert("h_values"); break;
        default: break;
    }
    check_keys(doc, "config", allowed);

    cfg.output_dir = get_string(doc, "config", "output_dir", std::string("."));
    cfg.seed = static_cast<std::uint64_t>(get_number(doc, "config", "seed", 0.0));
    if (const json* tj = find(doc, "tolerances")) {
        if (!tj->is_object()) throw ConfigError("config.tolerances: expected an object");
        for (auto it = tj->begin(); it != tj->end(); ++it) {
            if (!tolerance_keys().count(it.key()))
                throw ConfigError("config.tolerances: unknown key '" + it.key() + "'");
            if (!it.value().is_number())
                throw ConfigError("config.tolerances." + it.key() + ": expected a number");
            cfg.tolerances[it.key()] = it.value().get<double>();
        }
    }

    if (needs_problem(cfg.command)) {
        const json* pj = find(doc, "problem");
        if (!pj) throw ConfigError("config.problem: missing required key");
        cfg.problem = parse_problem(*pj, "problem");
        const ProblemConfig& pc = *cfg.problem;
        if (runs_solver(cfg.command)) {
            if (pc.family == "p-laplace" && !(pc.p > 2.0))
                throw ConfigError("problem.p: p must exceed 2 for evolution");
            if (pc.family != "p-laplace" && !(pc.gamma > 0.0))
                throw ConfigError("problem.gamma: gamma must be positive for evolution");
            if (pc.family == "general-quasilinear" && !(pc.p > 1.0))
                throw ConfigError("problem.p: p must exceed 1");
        }
        if (pc.data == "exact") {
            if (pc.family == "general-quasilinear")
                throw ConfigError(
                    "problem.data: no closed-form solution wired for general-quasilinear");
            if (pc.family == "fully-nonlinear" && pc.op != "trace")
                throw ConfigError("problem.data: exact data requires the trace operator");
        }
        if (pc.data == "x1-sine" && pc.grid.dim != 2)
            throw ConfigError("problem.data: x1-sine needs dim = 2");
    }

    switch (cfg.command) {
        case Command::SweepEps: {
            if (cfg.problem->epsilon)
                throw ConfigError("problem.epsilon: sweep-eps takes the 'epsilons' list");
            cfg.epsilons = get_array(doc, "config", "epsilons");
            if (cfg.epsilons.empty()) throw ConfigError("config.epsilons: empty list");
            for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
                if (!(cfg.epsilons[i] > 0.0))
                    throw ConfigError("config.epsilons: entries must be positive");
                if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))
                    throw ConfigError("config.epsilons: must be strictly decreasing");
            }
            break;
        }
        case Command::Exponents:
            cfg.source = get_string(doc, "config", "source", std::string("solver"));
            if (cfg.source != "solver" && cfg.source != "analytic")
                throw ConfigError("config.source: expected 'solver' or 'analytic'");
            break;
        case Command::BernsteinCheck: {
            if (find(doc, "delta_ladder")) {
                cfg.delta_ladder = get_array(doc, "config", "delta_ladder");
            } else {
                for (int k = 0; k <= 24; ++k) cfg.delta_ladder.push_back(std::ldexp(1.0, k - 6));
            }
            for (std::size_t i = 0; i < cfg.delta_ladder.size(); ++i) {
                if (!(cfg.delta_ladder[i] > 0.0))
                    throw ConfigError("config.delta_ladder: entries must be positive");
                if (i > 0 && !(cfg.delta_ladder[i] > cfg.delta_ladder[i - 1]))
                    throw ConfigError("config.delta_ladder: must be increasing");
            }
            cfg.rescale_h = get_number(doc, "config", "rescale_h", 1.0 / 16);
            cfg.rescale_levels =
                static_cast<int>(get_number(doc, "config", "rescale_levels", 512.0));
            if (cfg.rescale_levels < 16)
                throw ConfigError("config.rescale_levels: need at least 16");
            if (cfg.problem->data != "exact")
                throw ConfigError("problem.data: bernstein-check expects exact data");
            break;
        }
        case Command::JetFuzz: {
            cfg.samples = static_cast<long>(get_number(doc, "config", "samples", 100000.0));
            if (cfg.samples < 1) throw ConfigError("config.samples: must be positive");
            if (find(doc, "p_values")) cfg.p_values = get_array(doc, "config", "p_values");
            if (find(doc, "gamma_values"))
                cfg.gamma_values = get_array(doc, "config", "gamma_values");
            for (double p : cfg.p_values)
                if (!(p >= 2.0)) throw ConfigError("config.p_values: need p >= 2");
            for (double gm : cfg.gamma_values)
                if (!(gm > 0.0)) throw ConfigError("config.gamma_values: need gamma > 0");
            break;
        }
        case Command::BarrierCheck: {
            cfg.phi = get_string(doc, "config", "phi", std::string("x1"));
            if (cfg.phi != "x1" && cfg.phi != "zero")
                throw ConfigError("config.phi: expected 'x1' or 'zero'");
            if (find(doc, "bound_u")) cfg.bound_u = get_number(doc, "config", "bound_u");
            cfg.with_solve = get_bool(doc, "config", "with_solve", true);
            if (cfg.problem->family != "p-laplace")
                throw ConfigError("problem.family: barrier-check is wired for p-laplace");
            if (cfg.with_solve &&
                (!cfg.problem->grid.half_space || cfg.problem->grid.dim != 2 ||
                 cfg.problem->grid.extent != 1.0))
                throw ConfigError(
                    "problem.grid: barrier-check solve needs the 2-D unit half cube");
            break;
        }
        case Command::ScalingCheck: {
            cfg.p_samples = static_cast<int>(get_number(doc, "config", "p_samples", 100.0));
            cfg.gamma_samples =
                static_cast<int>(get_number(doc, "config", "gamma_samples", 100.0));
            cfg.domination_samples =
                static_cast<int>(get_number(doc, "config", "domination_samples", 200.0));
            if (cfg.p_samples < 1 || cfg.gamma_samples < 1 || cfg.domination_samples < 1)
                throw ConfigError("config: sample counts must be positive");
            break;
        }
        case Command::Convergence: {
            if (find(doc, "h_values")) {
                cfg.h_values = get_array(doc, "config", "h_values");
            } else {
                cfg.h_values = {1.0 / 32, 1.0 / 64};
            }
            if (cfg.h_values.size() < 2)
                throw ConfigError("config.h_values: need at least two spacings");
            for (std::size_t i = 1; i < cfg.h_values.size(); ++i)
                if (!(cfg.h_values[i] < cfg.h_values[i - 1]))
                    throw ConfigError("config.h_values: must be strictly decreasing");
            if (cfg.problem->data != "exact")
                throw ConfigError("problem.data: convergence expects exact data");
            if (!cfg.problem->epsilon)
                throw ConfigError("problem.epsilon: required for convergence");
            break;
        }
        default:
            if (cfg.command != Command::SweepEps && needs_problem(cfg.command) &&
                !cfg.problem->epsilon)
                throw ConfigError("problem.epsilon: missing required key");
            break;
    }
    if ((cfg.command == Command::Exponents || cfg.command == Command::BernsteinCheck ||
         cfg.command == Command::BarrierCheck) &&
        !cfg.problem->epsilon)
        throw ConfigError("problem.epsilon: missing required key");
    return cfg;
}

// --- canonical serialization ---------------------------------------------------

namespace {

json config_to_json(const ExperimentConfig& cfg, bool with_output_dir) {
    json doc;
    doc["command"] = command_name(cfg.command);
    if (with_output_dir) doc["output_dir"] = cfg.output_dir;
    doc["seed"] = cfg.seed;
    if (!cfg.tolerances.empty()) doc["tolerances"] = cfg.tolerances;
    if (cfg.problem) {
        const ProblemConfig& pc = *cfg.problem;
        json p;
        p["family"] = pc.family;
        if (pc.family != "fully-nonlinear") p["p"] = pc.p;
        if (pc.family != "p-laplace") p["gamma"] = pc.gamma;
        if (pc.family == "fully-nonlinear") p["operator"] = pc.op;
        if (pc.epsilon) p["epsilon"] = *pc.epsilon;
        if (pc.gradient_cap) p["gradient_cap"] = *pc.gradient_cap;
        p["data"] = pc.data;
        if (pc.data == "constant") p["data_value"] = pc.data_value;
        json g;
        g["dim"] = pc.grid.dim;
        g["extent"] = pc.grid.extent;
        g["h"] = pc.grid.h;
        if (pc.grid.dt) g["dt"] = *pc.grid.dt;
        if (pc.grid.t_start) g["t_start"] = *pc.grid.t_start;
        g["half_space"] = pc.grid.half_space;
        p["grid"] = g;
        doc["problem"] = p;
    }
    switch (cfg.command) {
        case Command::SweepEps: doc["epsilons"] = cfg.epsilons; break;
        case Command::Exponents: doc["source"] = cfg.source; break;
        case Command::BernsteinCheck:
            doc["delta_ladder"] = cfg.delta_ladder;
            doc["rescale_h"] = cfg.rescale_h;
            doc["rescale_levels"] = cfg.rescale_levels;
            break;
        case Command::JetFuzz:
            doc["samples"] = cfg.samples;
            doc["p_values"] = cfg.p_values;
            doc["gamma_values"] = cfg.gamma_values;
            break;
        case Command::BarrierCheck:
            doc["phi"] = cfg.phi;
            if (cfg.bound_u) doc["bound_u"] = *cfg.bound_u;
            doc["with_solve"] = cfg.with_solve;
            break;
        case Command::ScalingCheck:
            doc["p_samples"] = cfg.p_samples;
            doc["gamma_samples"] = cfg.gamma_samples;
            doc["domination_samples"] = cfg.domination_samples;
            break;
        case Command::Convergence: doc["h_values"] = cfg.h_values; break;
        default: break;
    }
    return doc;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::string ExperimentConfig::canonical_text() const {
    return config_to_json(*this, false).dump();
}

// --- problem assembly ------------------------------------------------------------

namespace {

SmoothOperatorF default_bellman(int dim) {
    SymMat a = SymMat::identity(dim);
    SymMat b = SymMat::identity(dim);
    b.set(0, 0, 2.0);
    return SmoothOperatorF::bellman_smooth({a, b}, 0.25);
}

CoefficientParams make_params(const ProblemConfig& pc, double epsilon) {
    if (pc.family == "p-laplace") return CoefficientParams::p_laplace(pc.p, epsilon);
    if (pc.family == "general-quasilinear")
        return CoefficientParams::general_quasilinear(pc.gamma, pc.p, epsilon);
    SmoothOperatorF F = pc.op == "trace" ? SmoothOperatorF::trace(pc.grid.dim)
                                         : default_bellman(pc.grid.dim);
    return CoefficientParams::fully_nonlinear(pc.gamma, std::move(F), epsilon);
}

struct BuiltProblem {
    CoefficientParams params;
    Grid grid;
    ProblemData data;
    double cap;
    std::optional<ExactSolution> exact;
};

SpaceTimeFn named_data(const ProblemConfig& pc, const std::optional<ExactSolution>& ex) {
    if (pc.data == "exact") return ex->as_function();
    if (pc.data == "constant") {
        const double c = pc.data_value;
        return [c](const Vec&, double) { return c; };
    }
    if (pc.data == "cosine") {
        const int dim = pc.grid.dim;
        return [dim](const Vec& x, double) {
            double v = std::cos(M_PI * x[0]);
            if (dim == 2) v *= std::cos(M_PI * x[1]);
            return v;
        };
    }
    // x1-sine: equals x_1 on the flat boundary, bends away from it above.
    return [](const Vec& x, double) {
        return x[0] + 0.5 * std::sin(0.5 * M_PI * x[1]);
    };
}

BuiltProblem build_problem(const ProblemConfig& pc, double epsilon,
                           std::optional<double> h_override = std::nullopt) {
    CoefficientParams params = make_params(pc, epsilon);
    std::optional<ExactSolution> ex;
    if (pc.data == "exact")
        ex = pc.family == "p-laplace"
                 ? ExactSolution::p_laplace_radial(pc.grid.dim, pc.p)
                 : ExactSolution::fully_nonlinear_radial(pc.grid.dim, pc.gamma);

    const double h = h_override.value_or(pc.grid.h);
    const double t_start = pc.grid.t_start.value_or(-pc.grid.extent * pc.grid.extent);
    const double span = -t_start;
    const SpaceTimeFn f = named_data(pc, ex);
    ProblemData data = ProblemData::from_function(f, t_start);

    // The gradient cap feeds the CFL step, so estimate it before fixing dt.
    Grid probe(pc.grid.dim, pc.grid.extent, h, span, {t_start, 0.0}, pc.grid.half_space);
    const double cap = pc.gradient_cap.value_or(suggest_gradient_cap(data, probe));

    double dt;
    if (pc.grid.dt) {
        dt = *pc.grid.dt;
    } else {
        dt = fitted_dt(span, cfl_dt(params, pc.grid.dim, h, cap));
        if (span / dt > 1024.0) dt = fitted_dt(span, span / 1024.0);
    }
    Grid grid(pc.grid.dim, pc.grid.extent, h, dt, {t_start, 0.0}, pc.grid.half_space);
    return BuiltProblem{std::move(params), std::move(grid), std::move(data), cap,
                        std::move(ex)};
}

double final_sup_error(const SolveReport& rep, const ExactSolution& ex) {
    const SpaceTimeSolution& u = *rep.solution;
    const Grid& g = u.grid();
    const Field& fin = u.level(u.level_count() - 1);
    double err = 0.0;
    for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i)
            err = std::max(err, std::abs(fin(i, j) - ex.value(g.node(i, j), 0.0)));
    return err;
}

// --- command runners ----------------------------------------------------------

void run_solve(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BuiltProblem bp = build_problem(*cfg.problem, *cfg.problem->epsilon);
    const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
    const SolveReport rep = solve(spec);
    rec.verdicts["not_diverged"] = !rep.diverged;
    rec.any_divergence = rep.diverged;
    rec.metrics["dt_used"] = rep.dt_used;
    rec.metrics["substeps_per_level"] = rep.substeps_per_level;
    rec.metrics["max_observed_gradient"] = rep.max_observed_gradient;
    if (rep.diverged) {
        rec.failure_note = rep.divergence_note;
        return;
    }
    rec.metrics["cfl_margin"] = rep.cfl_margin;
    const SpaceTimeSolution& u = *rep.solution;
    if (bp.grid.extent() >= 0.5 && -bp.grid.t_start() > 0.25)
        rec.metrics["sup_ut_half"] = sup_time_derivative_on_cylinder(u, 0.5);
    if (bp.exact) {
        const double err = final_sup_error(rep, *bp.exact);
        rec.metrics["final_sup_error"] = err;
        rec.verdicts["final_error_within_tolerance"] =
            err <= cfg.tolerance("solve_error", 0.05);
    }
    Table tr{"solve_trace", {"t", "sup_u", "sup_ut"}, {}};
    for (int k = 0; k < u.level_count(); ++k) {
        double su = 0.0;
        for (double v : u.level(k).values()) su = std::max(su, std::abs(v));
        double sut = 0.0;
        if (k >= 1) {
            const Field ut = time_derivative(u, k);
            for (double v : ut.values()) sut = std::max(sut, std::abs(v));
        }
        tr.rows.push_back({u.time(k), su, sut});
    }
    rec.tables.push_back(std::move(tr));
}

void run_sweep_eps(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BuiltProblem bp = build_problem(*cfg.problem, cfg.epsilons.front());
    const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
    const std::vector<SweepEntry> entries = epsilon_sweep(spec, cfg.epsilons);

    Table tab{"sweep_eps_ut", {"eps", "sup_ut", "cfl_margin"}, {}};
    bool all_ok = true;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const SweepEntry& e : entries) {
        all_ok = all_ok && !e.report.diverged;
        rec.any_divergence = rec.any_divergence || e.report.diverged;
        tab.rows.push_back({e.epsilon, e.sup_ut_half, e.report.cfl_margin});
        lo = std::min(lo, e.sup_ut_half);
        hi = std::max(hi, e.sup_ut_half);
    }
    rec.tables.push_back(std::move(tab));
    rec.verdicts["not_diverged"] = all_ok;
    rec.metrics["sup_ut_min"] = lo;
    rec.metrics["sup_ut_max"] = hi;
    const double spread = lo > 0.0 ? (hi - lo) / lo : 0.0;
    rec.metrics["pairwise_spread"] = spread;
    rec.verdicts["spread_within_bound"] =
        all_ok && spread <= cfg.tolerance("sweep_spread", 0.05);
    if (bp.exact) {
        const double c = bp.exact->time_slope();
        const double band = cfg.tolerance("sweep_band", 0.10);
        rec.metrics["predicted_center"] = c;
        rec.verdicts["within_band_of_exact_constant"] =
            all_ok && lo >= (1.0 - band) * c && hi <= (1.0 + band) * c;
    }
}

void run_exponents(const ExperimentConfig& cfg, ResultRecord& rec) {
    const ProblemConfig& pc = *cfg.problem;
    const BuiltProblem bp = build_problem(pc, *pc.epsilon);
    const double predicted = pc.family == "p-laplace" ? 1.0 / (pc.p - 1.0)
                                                       : 1.0 / (1.0 + pc.gamma);
    const std::vector<double> radii =
        radius_ladder(bp.grid.h(), 0.6 * bp.grid.extent());

    ExponentReport spatial, timefit;
    if (cfg.source == "analytic") {
        if (!bp.exact) throw ConfigError("exponents: analytic source needs exact data");
        std::vector<Field> grads;
        for (int k = 0; k < bp.grid.dim(); ++k)
            grads.push_back(sample(
                [&, k](const Vec& x, double t) { return bp.exact->gradient(x, t)[k]; },
                bp.grid, 0.0));
        spatial = fit_spatial_holder(grads, Vec::zero(bp.grid.dim()), radii, predicted);
        const SpaceTimeSolution u = sample_solution(bp.exact->as_function(), bp.grid);
        timefit = fit_time_lipschitz(u, 0.5 * bp.grid.extent(), 1.0);
    } else {
        const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
        const SolveReport rep = solve(spec);
        rec.verdicts["not_diverged"] = !rep.diverged;
        rec.any_divergence = rep.diverged;
        if (rep.diverged) {
            rec.failure_note = rep.divergence_note;
            return;
        }
        const SpaceTimeSolution& u = *rep.solution;
        const std::vector<Field> grads = gradient(u.level(u.level_count() - 1));
        spatial = fit_spatial_holder(grads, Vec::zero(bp.grid.dim()), radii, predicted);
        timefit = fit_time_lipschitz(u, 0.5 * bp.grid.extent(), 1.0);
    }
    const double spatial_tol =
        cfg.tolerance("spatial_fit", cfg.source == "analytic" ? 1e-6 : 0.1);
    rec.metrics["spatial_exponent"] = spatial.fitted_exponent;
    rec.metrics["spatial_r_squared"] = spatial.r_squared;
    rec.metrics["time_exponent"] = timefit.fitted_exponent;
    rec.metrics["time_constant"] = timefit.fitted_constant;
    rec.verdicts["spatial_exponent_matches"] =
        std::abs(spatial.fitted_exponent - predicted) <= spatial_tol;
    rec.verdicts["time_exponent_lipschitz"] =
        timefit.fitted_exponent >= cfg.tolerance("time_exponent_min", 0.95);
    rec.tables.push_back(
        {"exponents_spatial",
         {"fitted", "predicted", "r_squared", "constant", "pairs"},
         {{spatial.fitted_exponent, spatial.predicted_exponent, spatial.r_squared,
           spatial.fitted_constant, static_cast<double>(spatial.pair_count)}}});
    rec.tables.push_back(
        {"exponents_time",
         {"fitted", "predicted", "r_squared", "constant", "pairs"},
         {{timefit.fitted_exponent, timefit.predicted_exponent, timefit.r_squared,
           timefit.fitted_constant, static_cast<double>(timefit.pair_count)}}});
}

void run_bernstein_check(const ExperimentConfig& cfg, ResultRecord& rec) {
    const BuiltProblem bp = build_problem(*cfg.problem, *cfg.problem->epsilon);
    const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
    const SolveReport rep = solve(spec);
    rec.verdicts["not_diverged"] = !rep.diverged;
    rec.any_divergence = rep.diverged;
    if (rep.diverged) {
        rec.failure_note = rep.divergence_note;
        return;
    }
    // Normalize as in the approximation argument: rho = C_0 + 1 brings the
    // gradient below 1, then the auxiliary-function chain is checkable.
    const double c0 = rep.max_observed_gradient;
    const double rho = c0 + 1.0;
    const double span = 1.0;
    Grid target(bp.grid.dim(), 1.0, cfg.rescale_h, span / cfg.rescale_levels,
                {-1.0, 0.0});
    const SpaceTimeSolution resc =
        intrinsic_rescale(*rep.solution, bp.params, bp.grid.extent(), rho, target);
    const CoefficientParams scaled = bp.params.with_epsilon(bp.params.epsilon / rho);

    rec.metrics["c0"] = c0;
    rec.metrics["rho"] = rho;
    Table tab{"bernstein_sweep", {"delta", "verdict"}, {}};
    try {
        const DeltaSweepResult sweep = delta_sweep(resc, scaled, cfg.delta_ladder);
        for (const auto& [d, ok] : sweep.trace) tab.rows.push_back({d, ok ? 1.0 : 0.0});
        rec.verdicts["finite_delta"] = true;
        rec.verdicts["verdict_at_delta"] = sweep.report.verdict;
        rec.metrics["delta_min"] = sweep.delta_min;
        rec.metrics["A"] = sweep.report.A;
        rec.metrics["v_max"] = sweep.report.v_max;
        rec.metrics["max_defect"] = sweep.report.max_defect;
        rec.metrics["verdict_margin"] = sweep.report.verdict_margin;
        rec.metrics["dichotomy"] = sweep.report.dichotomy ? 1.0 : 0.0;
        const BernsteinConfig doubled =
            BernsteinConfig::for_run(resc, scaled, 2.0 * sweep.delta_min);
        rec.verdicts["verdict_at_doubled_delta"] =
            defect_report(resc, doubled, scaled).verdict;
    } catch (const Error& e) {
        rec.verdicts["finite_delta"] = false;
        rec.verdicts["verdict_at_delta"] = false;
        rec.verdicts["verdict_at_doubled_delta"] = false;
        rec.failure_note = e.what();
    }
    rec.tables.push_back(std::move(tab));
}

void run_jet_fuzz(const ExperimentConfig& cfg, ResultRecord& rec) {
    Table tab{"jet_fuzz",
              {"family", "param", "cs_violations", "ut_violations", "samples"},
              {}};
    long total_cs = 0, total_ut = 0;
    std::uint64_t tag = 0;
    auto fuzz_one = [&](const CoefficientParams& base, double family_code, double param) {
        SplitMix64 rng = SplitMix64::substream(cfg.seed, ++tag);
        long cs_bad = 0, ut_bad = 0;
        const long adversarial = std::max<long>(1, cfg.samples / 100);
        for (long s = 0; s < cfg.samples; ++s) {
            Jet jet(2);
            double eps;
            Vec xi(2);
            if (s < adversarial) {
                // Equality corners: rank-one Hessian aligned with the gradient.
                jet.q = Vec(rng.uniform(-1, 1), rng.uniform(-1, 1));
                jet.M = SymMat::outer(jet.q) * rng.uniform(-2, 2);
                xi = jet.q;
                eps = 0.0;
            } else {
                jet.q = Vec(rng.uniform(-1, 1), rng.uniform(-1, 1));
                jet.M.set(0, 0, rng.uniform(-1, 1));
                jet.M.set(1, 1, rng.uniform(-1, 1));
                jet.M.set(0, 1, rng.uniform(-1, 1));
                xi = Vec(rng.uniform(-1, 1), rng.uniform(-1, 1));
                eps = rng.next_double();
            }
            const CoefficientParams params = base.with_epsilon(eps);
            if (!jet_cauchy_schwarz(jet, eps, xi).ok) ++cs_bad;
            if (!jet_ut_bound(jet, params).ok) ++ut_bad;
        }
        total_cs += cs_bad;
        total_ut += ut_bad;
        tab.rows.push_back({family_code, param, static_cast<double>(cs_bad),
                            static_cast<double>(ut_bad),
                            static_cast<double>(cfg.samples)});
    };
    for (double p : cfg.p_values) fuzz_one(CoefficientParams::p_laplace(p, 1.0), 0, p);
    for (double gm : cfg.gamma_values)
        fuzz_one(CoefficientParams::fully_nonlinear(gm, SmoothOperatorF::trace(2), 1.0), 1,
                 gm);
    for (double gm : cfg.gamma_values)
        fuzz_one(CoefficientParams::general_quasilinear(gm, 3.0, 1.0), 2, gm);
    rec.tables.push_back(std::move(tab));
    rec.metrics["cs_violations"] = total_cs;
    rec.metrics["ut_violations"] = total_ut;
    rec.verdicts["zero_violations"] = total_cs == 0 && total_ut == 0;
}

void run_barrier_check(const ExperimentConfig& cfg, ResultRecord& rec) {
    const ProblemConfig& pc = *cfg.problem;
    const CoefficientParams params = make_params(pc, *pc.epsilon);
    const BoundaryDatum phi =
        cfg.phi == "x1" ? BoundaryDatum::coordinate(2, 0) : BoundaryDatum::zero(2);

    // Max-principle bound on the solution from the data.
    double bound_u;
    if (cfg.bound_u) {
        bound_u = *cfg.bound_u;
    } else {
        const std::optional<ExactSolution> no_exact;
        const SpaceTimeFn f = named_data(pc, no_exact);
        bound_u = 0.0;
        const int m = 32;
        for (int j = 0; j <= m; ++j)
            for (int i = -m; i <= m; ++i)
                bound_u = std::max(
                    bound_u, std::abs(f(Vec(i * 1.0 / m, j * 1.0 / m), 0.0)));
    }

    std::vector<BarrierSearchTrace> trace;
    const Barrier b = build_barrier(phi, params, bound_u, 1.0 / 64, &trace);
    const BarrierReport ver = verify_barrier(b, params, bound_u, 1.0 / 64);
    const double tol = cfg.tolerance("barrier_defect", 1e-8);
    rec.metrics["A"] = b.A;
    rec.metrics["beta"] = b.beta;
    rec.metrics["bound_u"] = bound_u;
    rec.metrics["supersolution_defect"] = ver.supersolution_defect;
    rec.metrics["flat_boundary_margin"] = ver.flat_boundary_margin;
    rec.metrics["outer_boundary_margin"] = ver.outer_boundary_margin;
    rec.verdicts["barrier_verified"] = ver.pass(tol);

    Table tab{"barrier_search", {"A", "beta", "defect", "outer_margin"}, {}};
    for (const auto& t : trace)
        tab.rows.push_back({t.A, t.beta, t.report.supersolution_defect,
                            t.report.outer_boundary_margin});
    tab.rows.push_back(
        {b.A, b.beta, ver.supersolution_defect, ver.outer_boundary_margin});
    rec.tables.push_back(std::move(tab));

    if (!cfg.with_solve) return;
    const double a_eff = b.boundary_lipschitz();
    rec.metrics["a_eff"] = a_eff;
    const BuiltProblem bp = build_problem(pc, *pc.epsilon);
    // The solve's data must restrict to phi on the flat boundary.
    for (int i = 0; i <= 64; ++i) {
        const Vec x(-1.0 + i / 32.0, 0.0);
        if (std::abs(bp.data.boundary(x, 0.0) - phi.value(x, 0.0)) > 1e-9)
            throw ConfigError("problem.data: must equal phi on the flat boundary");
    }
    const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
    const SolveReport rep = solve(spec);
    rec.verdicts["not_diverged"] = !rep.diverged;
    rec.any_divergence = rep.diverged;
    if (rep.diverged) {
        rec.failure_note = rep.divergence_note;
        return;
    }
    const SpaceTimeSolution& u = *rep.solution;
    const Grid& g = u.grid();
    double max_ratio = 0.0;
    for (int k = 0; k < u.level_count(); ++k)
        for (int j = 1; j < g.nodes(1) - 1; ++j)
            for (int i = 1; i < g.nodes(0) - 1; ++i) {
                const Vec x = g.node(i, j);
                const Vec flat = Vec(x[0], 0.0);
                const double dev =
                    std::abs(u.level(k)(i, j) - phi.value(flat, u.time(k)));
                max_ratio = std::max(max_ratio, dev / x[1]);
            }
    rec.metrics["flat_deviation_ratio"] = max_ratio;
    rec.verdicts["lipschitz_bound_holds"] = max_ratio <= a_eff;
}

void run_scaling_check(const ExperimentConfig& cfg, ResultRecord& rec) {
    const double tol = cfg.tolerance("exponent_identity", 1e-12);
    SplitMix64 rng_p = SplitMix64::substream(cfg.seed, 101);
    SplitMix64 rng_g = SplitMix64::substream(cfg.seed, 102);
    SplitMix64 rng_d = SplitMix64::substream(cfg.seed, 103);

    Table tnu{"scaling_nu", {"p", "nu_deviation"}, {}};
    double worst_nu = 0.0;
    for (int i = 0; i < cfg.p_samples; ++i) {
        const double p = rng_p.uniform(2.0 + 1e-9, 10.0);
        const auto [mu, nu] = scaling_exponents(1.0 / (p - 1.0), p);
        (void)mu;
        const double dev = std::abs(nu - 1.0);
        worst_nu = std::max(worst_nu, dev);
        tnu.rows.push_back({p, dev});
    }
    Table tmx{"scaling_mixed", {"gamma", "deviation"}, {}};
    double worst_mx = 0.0;
    for (int i = 0; i < cfg.gamma_samples; ++i) {
        const double gm = rng_g.uniform(1e-9, 5.0);
        const double dev =
            std::abs(mixed_time_exponent(1.0 / (1.0 + gm), 1.0) - 1.0 / (2.0 + gm));
        worst_mx = std::max(worst_mx, dev);
        tmx.rows.push_back({gm, dev});
    }
    Table tdm{"domination", {"family", "param", "beta", "margin"}, {}};
    double worst_margin = std::numeric_limits<double>::infinity();
    bool all_ok = true;
    for (int i = 0; i < cfg.domination_samples; ++i) {
        CoefficientParams params = CoefficientParams::p_laplace(3.0, 0.0);
        double code = 0.0, value = 0.0;
        switch (i % 3) {
            case 0:
                value = rng_d.uniform(2.0 + 1e-9, 10.0);
                params = CoefficientParams::p_laplace(value, 0.0);
                break;
            case 1:
                value = rng_d.uniform(1e-9, 5.0);
                params = CoefficientParams::fully_nonlinear(
                    value, SmoothOperatorF::trace(2), 0.0);
                code = 1.0;
                break;
            default:
                value = rng_d.uniform(1e-9, 5.0);
                params = CoefficientParams::general_quasilinear(
                    value, rng_d.uniform(1.0 + 1e-9, 10.0), 0.0);
                code = 2.0;
                break;
        }
        const double beta = select_beta(params);
        const DominationReport dom = check_domination(params, beta);
        all_ok = all_ok && dom.ok && dom.margin >= 0.0 && dom.min_identity_exact &&
                 beta >= 0.0 && beta < 1.0;
        worst_margin = std::min(worst_margin, dom.margin);
        tdm.rows.push_back({code, value, beta, dom.margin});
    }
    rec.metrics["max_nu_deviation"] = worst_nu;
    rec.metrics["max_mixed_deviation"] = worst_mx;
    rec.metrics["min_domination_margin"] = worst_margin;
    rec.verdicts["nu_identity"] = worst_nu <= tol;
    rec.verdicts["mixed_identity"] = worst_mx <= tol;
    rec.verdicts["domination_holds"] = all_ok;
    rec.tables.push_back(std::move(tnu));
    rec.tables.push_back(std::move(tmx));
    rec.tables.push_back(std::move(tdm));
}

void run_convergence(const ExperimentConfig& cfg, ResultRecord& rec) {
    const ProblemConfig& pc = *cfg.problem;
    Table tab{"convergence_errors", {"h", "sup_error"}, {}};
    std::vector<double> errs;
    bool all_ok = true;
    for (double h : cfg.h_values) {
        const BuiltProblem bp = build_problem(pc, *pc.epsilon, h);
        const ProblemSpec spec(bp.params, bp.grid, bp.data, bp.cap);
        const SolveReport rep = solve(spec);
        all_ok = all_ok && !rep.diverged;
        rec.any_divergence = rec.any_divergence || rep.diverged;
        if (rep.diverged) {
            rec.failure_note = rep.divergence_note;
            break;
        }
        const double err = final_sup_error(rep, *bp.exact);
        errs.push_back(err);
        tab.rows.push_back({h, err});
    }
    rec.tables.push_back(std::move(tab));
    rec.verdicts["not_diverged"] = all_ok;
    const double factor = cfg.tolerance("convergence_factor", 1.8);
    bool ok = all_ok && errs.size() == cfg.h_values.size();
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i - 1] / errs[i];
        rec.metrics["ratio_" + std::to_string(i)] = ratio;
        rec.metrics["observed_order_" + std::to_string(i)] =
            std::log(ratio) / std::log(cfg.h_values[i - 1] / cfg.h_values[i]);
        ok = ok && ratio >= factor;
    }
    rec.verdicts["refinement_factor"] = ok;
}

}  // namespace

ResultRecord run(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord rec;
    rec.command = command_name(cfg.command);
    rec.input_hash = fnv1a_hex(cfg.canonical_text() + "#" + std::to_string(cfg.seed));
    try {
        switch (cfg.command) {
            case Command::Solve: run_solve(cfg, rec); break;
            case Command::SweepEps: run_sweep_eps(cfg, rec); break;
            case Command::Exponents: run_exponents(cfg, rec); break;
            case Command::BernsteinCheck: run_bernstein_check(cfg, rec); break;
            case Command::JetFuzz: run_jet_fuzz(cfg, rec); break;
            case Command::BarrierCheck: run_barrier_check(cfg, rec); break;
            case Command::ScalingCheck: run_scaling_check(cfg, rec); break;
            case Command::Convergence: run_convergence(cfg, rec); break;
        }
    } catch (const DivergenceError& e) {
        rec.any_divergence = true;
        rec.verdicts["completed"] = false;
        rec.failure_note = e.what();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        rec.verdicts["completed"] = false;
        rec.failure_note = e.what();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return rec;
}

// --- emission -------------------------------------------------------------------

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void emit_tables(const ResultRecord& rec, const std::string& output_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    for (const Table& t : rec.tables) {
        std::ofstream out(fs::path(output_dir) / (t.name + ".csv"), std::ios::binary);
        if (!out) throw Error("emit_tables: cannot write " + t.name + ".csv");
        for (std::size_t c = 0; c < t.header.size(); ++c)
            out << (c ? "," : "") << t.header[c];
        out << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << format_number(row[c]);
            out << "\n";
        }
    }
    json doc;
    doc["command"] = rec.command;
    doc["input_hash"] = rec.input_hash;
    doc["metrics"] = rec.metrics;
    doc["verdicts"] = rec.verdicts;
    if (!rec.failure_note.empty()) doc["failure_note"] = rec.failure_note;
    json tables = json::object();
    for (const Table& t : rec.tables) tables[t.name] = static_cast<long>(t.rows.size());
    doc["tables"] = tables;
    std::ofstream out(fs::path(output_dir) / "summary.json", std::ios::binary);
    if (!out) throw Error("emit_tables: cannot write summary.json");
    out << doc.dump(2) << "\n";
}

int exit_code(const ResultRecord& rec) {
    if (rec.any_divergence) return 3;
    for (const auto& [name, ok] : rec.verdicts)
        if (!ok) return 1;
    return 0;
}

}  // namespace degenlab
