#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "rabc/models.hpp"

namespace rabc {

struct SummaryVector {
    Eigen::VectorXd values;
    std::vector<std::string> labels;

    SummaryVector() = default;
    SummaryVector(Eigen::VectorXd v, std::vector<std::string> l)
        : values(std::move(v)), labels(std::move(l)) {}

    Eigen::Index size() const { return values.size(); }
};

/// Index partition of a summary vector into matchable (psi) and adjustable
/// (phi) blocks. Indices are 0-based, disjoint, and must jointly cover the
/// summary; psi is never empty (phi may be).
struct Partition {
    std::vector<Eigen::Index> psi;
    std::vector<Eigen::Index> phi;

    void validate(Eigen::Index d) const;
};

std::pair<SummaryVector, SummaryVector> apply_partition(const SummaryVector& eta,
                                                        const Partition& part);

/// (sample mean, unbiased sample variance); n >= 2.
SummaryVector mean_variance_summary(const Dataset& z);

/// Uncentered autocovariances (1/T) sum z_t z_{t-j} for j = 0,1,2; n >= 3.
SummaryVector autocovariance_summary(const Dataset& z);

/// Robust location/scale/skewness/kurtosis from sample quartiles and octiles
/// (linear order-statistic interpolation at 1+(n-1)q); n >= 8.
SummaryVector robust_gk_summary(const Dataset& z);

/// Linear-interpolation sample quantile of an ascending-sorted range.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct AuxGarchParams {
    double beta1 = 0.05;  // > 0
    double beta2 = 0.10;  // >= 0
    double beta3 = 0.85;  // >= 0, beta2 + beta3 < 1
    double beta4 = 8.0;   // degrees of freedom, > 2
    void validate() const;
};

/// Log-likelihood of the GARCH(1,1) scale recursion with standardized-t
/// errors: x_t = b1 + b2 x_{t-1}|eps_{t-1}| + b3 x_{t-1}, eps_t = r_t / x_t,
/// x_1 initialized to mean |r|. Returns -infinity when the recursion leaves
/// the valid region.
double garch_loglik(const AuxGarchParams& beta, const Dataset& y);

/// Maximum-likelihood fit of the auxiliary model by simplex search on
/// log/logit-transformed coordinates (5 deterministic restarts) followed by a
/// Newton polish of the score; deterministic for fixed data. n >= 50.
AuxGarchParams fit_garch_aux(const Dataset& y);

/// Score summary (9): central finite-difference gradient of the auxiliary
/// log-likelihood at beta_hat, step 1e-4 * max(1,|beta_i|), divided by T.
SummaryVector garch_score_summary(const Dataset& z, const AuxGarchParams& beta_hat);

/// Simulate from the auxiliary GARCH(1,1)-t model itself (burn-in discarded);
/// used for validation.
Dataset simulate_garch_aux(const AuxGarchParams& beta, Eigen::Index n, RandomStream& rng);

}  // namespace rabc
