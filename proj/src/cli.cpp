#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "degenlab/harness.hpp"

namespace degenlab {

int run_cli(int argc, char** argv) {
    CLI::App app{"degenlab - numerical laboratory for degenerate parabolic equations"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    long long seed_override = -1;
    for (Command c : {Command::Solve, Command::SweepEps, Command::Exponents,
                      Command::BernsteinCheck, Command::JetFuzz, Command::BarrierCheck,
                      Command::ScalingCheck, Command::Convergence}) {
        CLI::App* sub = app.add_subcommand(command_name(c), "");
        sub->add_option("--config", config_path, "experiment configuration document")
            ->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("config: cannot read " + config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        ExperimentConfig cfg = parse_config(buf.str());
        const std::string cli_command = app.get_subcommands().front()->get_name();
        if (command_name(cfg.command) != cli_command)
            throw ConfigError("command: config says '" + command_name(cfg.command) +
                              "' but the CLI asked for '" + cli_command + "'");
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (!out_override.empty()) cfg.output_dir = out_override;

        const ResultRecord rec = run(cfg);
        emit_tables(rec, cfg.output_dir);
        for (const auto& [name, ok] : rec.verdicts)
            std::printf("%-34s %s\n", name.c_str(), ok ? "pass" : "FAIL");
        if (!rec.failure_note.empty())
            std::printf("failure: %s\n", rec.failure_note.c_str());
        std::printf("wall: %.0f ms, outputs in %s\n", rec.wall_ms,
                    cfg.output_dir.c_str());
        return exit_code(rec);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace degenlab
