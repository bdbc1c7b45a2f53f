#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "segsolve/io.hpp"
#include "segsolve/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"segsolve: minimizes segregated multi-density energies on 2D grids and "
                 "verifies the qualitative properties of the minimizers"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int grid = 0;
    bool check_only = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to a run config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)");
        sub->add_option("--grid", grid, "nodes per axis (overrides the config)");
        sub->add_flag("--check-only", check_only, "validate data and gates, do not solve");
    };
    add_common(app.add_subcommand("solve", "minimize and write fields + manifest"));
    add_common(app.add_subcommand("verify", "run verifier checks on a stored solution"));
    add_common(app.add_subcommand("analyze", "extract free-boundary geometry and render"));
    add_common(app.add_subcommand("sweep", "refinement and perturbation tables"));

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        segsolve::RunConfig cfg = segsolve::parse_config_file(config_path);
        segsolve::RunOverrides ov;
        if (app.get_subcommands().front()->count("--seed")) ov.seed = seed;
        if (app.get_subcommands().front()->count("--grid")) ov.grid = grid;
        if (!out_dir.empty()) ov.out_dir = out_dir;
        ov.check_only = check_only;

        segsolve::RunResult res = segsolve::run(sub, cfg, ov);
        if (!res.failures.empty()) {
            std::printf("{\"failures\": [");
            for (size_t i = 0; i < res.failures.size(); ++i)
                std::printf("%s\"%s\"", i ? ", " : "", res.failures[i].c_str());
            std::printf("]}\n");
        }
        return res.exit_code;
    } catch (const segsolve::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return segsolve::exit_config_error;
    } catch (const segsolve::SolveRefused& e) {
        std::printf("{\"failures\": [\"%s\"]}\n", e.check.c_str());
        std::fprintf(stderr, "refused: %s\n", e.what());
        return segsolve::exit_check_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return segsolve::exit_runtime_error;
    }
}
