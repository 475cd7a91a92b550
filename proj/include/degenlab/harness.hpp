#ifndef DEGENLAB_HARNESS_HPP
#define DEGENLAB_HARNESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degenlab/solver.hpp"

namespace degenlab {

enum class Command {
    Solve,
    SweepEps,
    Exponents,
    BernsteinCheck,
    JetFuzz,
    BarrierCheck,
    ScalingCheck,
    Convergence,
};

std::string command_name(Command c);
Command command_from_name(const std::string& name);

struct GridConfig {
    int dim = 2;
    double extent = 0.0;
    double h = 0.0;
    std::optional<double> dt;       // default: CFL step, capped at 1024 levels
    std::optional<double> t_start;  // default: -extent^2
    bool half_space = false;
};

struct ProblemConfig {
    std::string family = "p-laplace";  // p-laplace | fully-nonlinear | general-quasilinear
    double p = 0.0;
    double gamma = 0.0;
    std::string op = "trace";  // fully nonlinear: trace | bellman
    std::optional<double> epsilon;
    GridConfig grid;
    std::string data = "exact";  // exact | cosine | constant | x1-sine
    double data_value = 1.0;     // constant data only
    std::optional<double> gradient_cap;
};

struct ExperimentConfig {
    Command command = Command::Solve;
    std::optional<ProblemConfig> problem;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;

    // command extras (defaults filled by the parser)
    std::vector<double> epsilons;                 // sweep-eps
    std::string source = "solver";                // exponents: analytic | solver
    std::vector<double> delta_ladder;             // bernstein-check
    double rescale_h = 1.0 / 16;                  // bernstein-check target grid
    int rescale_levels = 512;                     // bernstein-check target levels
    long samples = 100000;                        // jet-fuzz
    std::vector<double> p_values{2.5, 3.0, 4.0};  // jet-fuzz
    std::vector<double> gamma_values{0.5, 1.0, 2.0};
    std::string phi = "x1";                       // barrier-check: x1 | zero
    std::optional<double> bound_u;                // barrier-check; default from data
    bool with_solve = true;                       // barrier-check
    int p_samples = 100;                          // scaling-check
    int gamma_samples = 100;
    int domination_samples = 200;
    std::vector<double> h_values;                 // convergence

    double tolerance(const std::string& key, double fallback) const {
        auto it = tolerances.find(key);
        return it == tolerances.end() ? fallback : it->second;
    }

    // Canonical document with defaults filled, output_dir excluded (output
    // bytes must not depend on where they are written).
    std::string canonical_text() const;
};

// Parses and validates a JSON document; unknown keys, missing required keys
// and out-of-range values are rejected with their field path.
ExperimentConfig parse_config(const std::string& text);

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct ResultRecord {
    std::string command;
    std::string input_hash;  // FNV-1a of the canonical config and the seed
    std::map<std::string, double> metrics;
    std::map<std::string, bool> verdicts;
    std::vector<Table> tables;
    std::string failure_note;  // structured failure record for module errors
    bool any_divergence = false;
    double wall_ms = 0.0;  // console only; never serialized
};

ResultRecord run(const ExperimentConfig& config);

// One CSV per table (17 significant digits, LF endings) plus summary.json.
// Byte-stable for identical records.
void emit_tables(const ResultRecord& record, const std::string& output_dir);

// 0 all verdicts pass, 1 verdict failure, 3 numerical divergence.
int exit_code(const ResultRecord& record);

// Full CLI: degenlab <command> --config <path> [--seed N] [--out DIR].
// Returns the process exit code (2 on configuration errors).
int run_cli(int argc, char** argv);

}  // namespace degenlab

#endif
