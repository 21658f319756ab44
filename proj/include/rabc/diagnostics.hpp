#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "rabc/abc.hpp"

namespace rabc {

/// Two-sample randomization test for location between posterior draws and a
/// fresh prior sample (size n_prior, defaulting to the posterior size when
/// zero). The statistic is |mean difference|; the p-value carries the
/// add-one Monte Carlo correction.
double randomization_location_test(const Eigen::VectorXd& posterior_draws,
                                   const std::function<double(RandomStream&)>& prior_sampler,
                                   std::size_t n_prior, std::size_t n_perm, RandomStream& rng);

struct PredictiveCheck {
    Eigen::MatrixXd summaries;        // n_draws_used x d_eta
    std::vector<bool> observed_inside;  // per summary coordinate
    double lo_quantile = 0.005;
    double hi_quantile = 0.995;
};

/// Posterior predictive summaries: for randomly chosen posterior rows, one
/// fresh simulation and its summary; flags whether each observed summary
/// coordinate falls inside the predictive band.
PredictiveCheck posterior_predictive_summaries(const Eigen::MatrixXd& theta_draws,
                                               const Simulator& simulator,
                                               const SummaryMap& summary_map,
                                               const SummaryVector& observed,
                                               std::size_t n_draws_used, RandomStream& rng,
                                               double lo_quantile = 0.005,
                                               double hi_quantile = 0.995);

struct ProbeRow {
    Eigen::VectorXd theta;
    Eigen::VectorXd summary_mean;
    Eigen::VectorXd summary_std;
};

/// Prior-predictive partition probe: per prior draw, the mean and standard
/// deviation of each summary across n_reps replicate datasets.
std::vector<ProbeRow> partition_probe(const JointPrior& prior, const Simulator& simulator,
                                      const SummaryMap& summary_map, std::size_t n_param_draws,
                                      std::size_t n_reps, RandomStream& rng, int workers = 1);

struct McMetrics {
    double coverage_pct = 0.0;
    double bias = 0.0;
    double avg_posterior_std = 0.0;
    std::vector<std::pair<double, double>> intervals;  // per replication
};

/// Monte Carlo benchmark metrics per parameter coordinate: equal-tailed
/// credible-interval coverage of theta_star, posterior-mean bias, and the
/// average posterior standard deviation.
std::vector<McMetrics> mc_metrics(const std::vector<Eigen::MatrixXd>& replication_posteriors,
                                  const Eigen::VectorXd& theta_star, double level);

}  // namespace rabc
