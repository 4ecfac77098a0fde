// qpkdv: configuration-driven runner for the solver pipeline.
#include <iostream>

#include <CLI11.hpp>

#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"

int main(int argc, char** argv) {
    using namespace qpkdv;

    CLI::App app{"Quasi-periodic solutions of forced KdV: solve, reduce, measure, stability, verify"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--workers", workers, "worker threads for parameter scans")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for probe fields and initial data");

    for (const char* name : {"solve", "reduce", "measure", "stability", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
    }
    app.get_subcommand("solve")->description("Nash-Moser iteration at each (epsilon, lambda)");
    app.get_subcommand("reduce")->description("regularize and reduce the linearized operator at the solution");
    app.get_subcommand("measure")->description("accepted fraction of the lambda grid for each epsilon");
    app.get_subcommand("stability")->description("integrate the linearized flow and compare with the reduced flow");
    app.get_subcommand("verify")->description("run the invariant checks and print a pass/fail table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cli::ExperimentConfig cfg = config_path.empty() ? cli::parse_config(cli::json::object())
                                                        : cli::load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (workers > 0) cfg.workers = workers;
        if (seed) cfg.seed = *seed;
        for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

        const auto cmd = cli::command_from_string(app.get_subcommands().front()->get_name());
        const auto result = cli::run(cfg, cmd);
        cli::write_artifacts(result, cfg.output_dir);

        if (cmd == cli::Command::verify) std::cout << cli::check_table(result.checks);
        std::cout << cli::to_string(cmd) << ": exit " << result.exit_code << ", artifacts in " << cfg.output_dir
                  << '\n';
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
