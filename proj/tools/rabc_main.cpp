#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "rabc/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Likelihood-free inference runner: ABC-SMC, regression-adjusted ABC-SMC, "
                 "two-step robust ABC, and (robust) Bayesian synthetic likelihood"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = -1;

    CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file or preset");
    run->add_option("--config", config_path, "Path to a JSON experiment config");
    run->add_option("--preset", preset, "Built-in preset name (see --list-presets)");
    run->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
        seed_given = true;
    });
    run->add_option("--out", out_dir, "Output directory for draws.csv and report.json");
    run->add_option("--workers", workers, "Worker thread count (default: all cores)");
    bool list_presets = false;
    run->add_flag("--list-presets", list_presets, "List preset names and exit");

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "Regenerate summary tables from a run directory");
    report->add_option("--in", report_dir, "Run directory holding draws.csv and report.json")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (list_presets) {
                for (const auto& name : rabc::preset_names()) std::cout << name << "\n";
                return 0;
            }
            if (config_path.empty() == preset.empty()) {
                std::cerr << "run: give exactly one of --config or --preset\n";
                return 2;
            }
            rabc::ExperimentConfig cfg = config_path.empty()
                                             ? rabc::parse_config(rabc::preset_config(preset))
                                             : rabc::load_config(config_path);
            if (seed_given) cfg.seed = seed;
            if (const char* env_seed = std::getenv("RABC_SEED")) cfg.seed = std::stoull(env_seed);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.experiment;
            if (workers >= 0) cfg.workers = workers;

            const rabc::RunReport result = rabc::run_experiment(cfg);
            std::size_t failed = 0;
            for (const auto& rep : result.replications)
                if (!rep.ok) ++failed;
            std::cout << "wrote " << cfg.out_dir << "/draws.csv and report.json ("
                      << result.replications.size() - failed << "/" << result.replications.size()
                      << " replications ok)\n";
            rabc::report_from_dir(cfg.out_dir, std::cout);
            return result.all_ok ? 0 : 1;
        }
        if (report->parsed()) {
            if (!rabc::report_from_dir(report_dir, std::cout)) {
                std::cerr << "report: '" << report_dir << "' does not hold a completed run\n";
                return 2;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
