#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabc/distributions.hpp"
#include "rabc/summaries.hpp"

namespace rabc {

/// Algorithm hyperparameters with the paper's defaults filled in.
struct AlgorithmParams {
    std::size_t N = 1000;
    std::size_t N1 = 25000;
    double retain_fraction = 0.05;
    std::size_t m = 50;
    std::size_t iters = 10000;
    std::size_t burnin = 5000;
    std::size_t thin = 5;
    double lambda = 0.125;           // R-ABC adjustment prior scale
    double p = 0.5;                  // spike probability
    double alpha = 0.5;              // SMC drop fraction
    double p_acc_min = 0.01;
    int R_init = 5;
    int max_moves = 100;
    double rbsl_gamma_scale = 0.5;   // La(0,0.5) for R-BSL-M, Exp(0.5) for R-BSL-V
    std::size_t predictive_draws = 200;
};

struct SyntheticDataSpec {
    std::string dgp_id;
    std::map<std::string, double> dgp_params;
    Eigen::Index n = 0;
};

struct CsvDataSpec {
    std::string path;
    std::string column;
};

struct ExperimentConfig {
    std::string experiment = "experiment";
    std::string model_id;
    std::map<std::string, double> model_fixed;
    std::vector<PriorSpec> priors;  // one per theta coordinate
    std::string summary_id;
    Partition partition;            // 0-based (config files use 1-based indices)
    std::string algorithm;
    AlgorithmParams params;
    std::size_t replications = 1;
    std::optional<SyntheticDataSpec> synthetic;
    std::optional<CsvDataSpec> csv;
    std::optional<Eigen::VectorXd> pseudo_true;
    std::uint64_t seed = 1;
    std::string out_dir;
    int workers = 0;  // 0: use all available cores

    nlohmann::json echo() const;  // fully defaulted, self-describing
};

/// Parses and validates a config document, filling defaults (priors,
/// summary, partition per model; hyperparameters per the paper). Throws
/// std::invalid_argument naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Loads a config file from disk (JSON).
ExperimentConfig load_config(const std::string& path);

/// Built-in experiment presets: normal-toy, ma2, gnk, stable-sv (plus
/// -laplace / -reg / -rbslv variants of the first three).
nlohmann::json preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace rabc
