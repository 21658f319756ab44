#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabc/config.hpp"
#include "rabc/rabc.hpp"

namespace rabc {

/// Assumed model resolved from a config: prior, simulator (closing over the
/// dataset length) and a summary-map factory (the GARCH score map is built
/// from the observed data).
struct ModelBundle {
    JointPrior prior;
    Simulator simulator;
    std::function<SummaryMap(const Dataset&)> summary_factory;
    std::vector<std::string> theta_labels;
};

ModelBundle build_model(const ExperimentConfig& cfg, Eigen::Index n);

/// Synthetic observed data for one replication.
Dataset generate_data(const SyntheticDataSpec& spec, RandomStream& rng);

/// Reads one numeric column from a headered CSV; blank or non-numeric cells
/// are rejected with their row number, a missing column with the list of
/// available columns.
Dataset ingest_returns_csv(const std::string& path, const std::string& column);

struct ReplicationResult {
    bool ok = false;
    std::string error;
    Eigen::MatrixXd draws;            // kept draws x labels.size()
    std::vector<std::string> labels;  // theta labels, then gamma labels
    SmcTrace trace;
    std::map<std::string, double> gamma_pvalues;
    std::map<std::string, bool> predictive_inside;
    bool warning = false;
    double seconds = 0.0;
};

struct RunReport {
    nlohmann::json document;
    bool all_ok = false;
    std::vector<ReplicationResult> replications;
    std::vector<std::string> labels;
};

/// Runs every replication of the configured experiment (replication r uses
/// the substream (seed, r)), computes metrics and diagnostics, and persists
/// draws.csv plus report.json under cfg.out_dir when set. Per-replication
/// failures are recorded and do not stop the run.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Rebuilds the summary table of a persisted run directory onto `out`;
/// returns false when the directory does not hold a run.
bool report_from_dir(const std::string& dir, std::ostream& out);

}  // namespace rabc
