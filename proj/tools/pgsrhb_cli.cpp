#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pgsrhb/errors.hpp"
#include "pgsrhb/runner.hpp"

namespace {

using namespace pgsrhb;

std::pair<std::string, std::string> split_fix(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--fix expects name=value, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperparameter search over binary-encoded spaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string log_flag;
    std::uint64_t seed_flag = 0;
    int parallelism_flag = 0;
    bool resume_flag = false;

    auto* run = app.add_subcommand("run", "run a search and log every trial");
    run->add_option("--config", config_path, "experiment config (json)")->required();
    auto* run_log = run->add_option("--log", log_flag, "trial log path");
    auto* run_seed = run->add_option("--seed", seed_flag, "override the config seed");
    auto* run_par = run->add_option("--parallelism", parallelism_flag, "worker threads")
                        ->check(CLI::PositiveNumber);
    run->add_flag("--resume", resume_flag, "continue from an interrupted log");

    auto* resume = app.add_subcommand("resume", "continue an interrupted run");
    resume->add_option("--config", config_path, "experiment config (json)")->required();
    auto* resume_log = resume->add_option("--log", log_flag, "trial log path");
    auto* resume_par = resume->add_option("--parallelism", parallelism_flag, "worker threads")
                           ->check(CLI::PositiveNumber);

    std::vector<double> lambdas{0.5, 1.0, 2.0};
    auto* guidance = app.add_subcommand("guidance", "fit samplers to a log and compare ranges");
    guidance->add_option("--config", config_path, "experiment config (json)")->required();
    auto* guid_log = guidance->add_option("--log", log_flag, "trial log path");
    guidance->add_option("--lambdas", lambdas, "penalty weights to sweep")
        ->check(CLI::PositiveNumber);

    SurfaceRequest surf;
    std::vector<std::string> fix_args;
    auto* surface = app.add_subcommand("surface", "evaluate the objective on a log-scale grid");
    surface->add_option("--config", config_path, "experiment config (json)")->required();
    surface->add_option("--x", surf.x, "numeric category for the x axis")->required();
    surface->add_option("--y", surf.y, "numeric category for the y axis")->required();
    surface->add_option("--nx", surf.nx, "grid points along x")->check(CLI::PositiveNumber);
    surface->add_option("--ny", surf.ny, "grid points along y")->check(CLI::PositiveNumber);
    double surf_resource = 0.0;
    auto* surf_res = surface->add_option("--resource", surf_resource, "resource per evaluation")
                         ->check(CLI::PositiveNumber);
    surface->add_option("--fix", fix_args, "pin a category, name=value (repeatable)");
    surface->add_option("--out", surf.out_path, "output csv path, - for stdout");

    ReportRequest rep;
    auto* report = app.add_subcommand("report", "summarize a trial log or a directory of logs");
    report->add_option("--log", rep.path, "log file or directory")->required();
    report->add_option("--csv", rep.csv_path, "also export trials as csv");

    try {
        app.parse(argc, argv);

        if (run->parsed() || resume->parsed()) {
            bool resuming = resume->parsed() || resume_flag;
            ExperimentConfig cfg = load_config_file(config_path);
            RunFlags flags;
            if (run->parsed() && *run_log) flags.log = log_flag;
            if (resume->parsed() && *resume_log) flags.log = log_flag;
            if (run->parsed() && *run_seed) flags.seed = seed_flag;
            if ((run->parsed() && *run_par) || (resume->parsed() && *resume_par))
                flags.parallelism = parallelism_flag;
            return cmd_run(std::move(cfg), flags, resuming, std::cout, std::cerr);
        }
        if (guidance->parsed()) {
            ExperimentConfig cfg = load_config_file(config_path);
            std::optional<std::string> log;
            if (*guid_log) log = log_flag;
            return cmd_guidance(cfg, log, lambdas, std::cout, std::cerr);
        }
        if (surface->parsed()) {
            ExperimentConfig cfg = load_config_file(config_path);
            if (*surf_res) surf.resource = surf_resource;
            for (const auto& f : fix_args) surf.fixes.push_back(split_fix(f));
            return cmd_surface(cfg, surf, std::cout, std::cerr);
        }
        if (report->parsed()) return cmd_report(rep, std::cout, std::cerr);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const InsufficientHistoryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
