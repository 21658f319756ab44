#pragma once

#include <Eigen/Core>

#include "rabc/abc.hpp"

namespace rabc {

struct SyntheticMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // 1/m normalization
    std::size_t m = 0;
};

/// Sample mean and 1/m covariance of the summaries of m fresh simulations at
/// theta. Requires m >= d_eta + 2.
SyntheticMoments estimate_moments(const Eigen::VectorXd& theta, const Simulator& simulator,
                                  const SummaryMap& summary_map, std::size_t m, RandomStream& rng);

enum class BslVariant { Plain, MeanAdjust, VarianceAdjust };

/// Gaussian synthetic log-likelihood of the observed summary. MeanAdjust
/// shifts the mean by componentwise-std-scaled gamma; VarianceAdjust
/// inflates the covariance diagonally by std-scaled gamma (gamma >= 0
/// elementwise). Singular covariance (after a 1e-8 jitter) yields -infinity.
double rbsl_loglik(const SummaryVector& y_summary, const SyntheticMoments& moments,
                   const Eigen::VectorXd& gamma, BslVariant variant);

struct RbslOptions {
    BslVariant variant = BslVariant::Plain;
    std::size_t m = 50;
    std::size_t iters = 10000;
    std::size_t burnin = 5000;
    std::size_t thin = 5;
    Eigen::VectorXd init_theta;  // empty: drawn from the prior
};

struct RbslResult {
    Eigen::MatrixXd draws;  // kept draws over (theta, gamma)
    double acceptance_rate = 0.0;
    bool warning = false;  // burn-in acceptance below 0.1%
};

/// Random-walk Metropolis-Hastings on (theta, Gamma) against the synthetic
/// likelihood, with the proposal covariance adapted during burn-in and the
/// moments re-estimated at every proposed theta (fresh substream). Gamma
/// moves are Gaussian for MeanAdjust and Gaussian on log-Gamma (with the
/// Jacobian in the ratio) for VarianceAdjust. gamma_prior is ignored for the
/// Plain variant.
RbslResult rbsl_mh(const RbslOptions& options, const JointPrior& theta_prior,
                   const JointPrior& gamma_prior, const Simulator& simulator,
                   const SummaryMap& summary_map, const SummaryVector& y_summary,
                   RandomStream& rng);

}  // namespace rabc
