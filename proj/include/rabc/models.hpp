#pragma once

#include <Eigen/Core>

#include "rabc/distributions.hpp"
#include "rabc/random.hpp"

namespace rabc {

/// A univariate dataset, ordered as observed.
using Dataset = Eigen::VectorXd;

struct GkParams {
    double a = 0.0;  // location
    double b = 1.0;  // scale, > 0
    double g = 0.0;  // skewness
    double k = 0.0;  // kurtosis, > -0.5
    void validate() const;
};

struct MixtureParams {
    double w = 0.5;
    double mu1 = 0.0, mu2 = 0.0;
    double var1 = 1.0, var2 = 1.0;
    void validate() const;
};

struct SvParams {
    double omega = 0.0;
    double rho = 0.5;      // in (0,1)
    double sigma_v = 0.1;  // in (0,1)
    void validate() const;
};

struct StableSvParams {
    double theta2 = 0.9;   // persistence, in (0.7,1)
    double theta3 = 0.3;   // vol-of-vol, in (0.01,1)
    double theta4 = 1.5;   // tail index, in (1,2)
    void validate() const;
};

Dataset simulate_normal_location(double theta, double sigma, Eigen::Index n, RandomStream& rng);
Dataset simulate_gaussian_mixture(const MixtureParams& p, Eigen::Index n, RandomStream& rng);

/// g-and-k quantile function (0.8 skewness constant).
double gk_quantile(double q, const GkParams& p);
Dataset simulate_gk(const GkParams& p, Eigen::Index n, RandomStream& rng);

bool ma2_invertible(double theta1, double theta2);
Dataset simulate_ma2(double theta1, double theta2, Eigen::Index n, RandomStream& rng);

Dataset simulate_sv(const SvParams& p, Eigen::Index n, RandomStream& rng);
Dataset simulate_stable_sv(const StableSvParams& p, Eigen::Index n, RandomStream& rng);

/// Probability limits of the three uncentered autocovariance summaries under
/// the MA(2): (1 + t1^2 + t2^2, t1 (1 + t2), t2).
Eigen::Vector3d ma2_limit_summaries(double theta1, double theta2);

/// Probability limits of the same summaries under the SV model:
/// (exp(omega/(1-rho) + sigma_v^2 / (2 (1-rho^2))), 0, 0).
Eigen::Vector3d sv_limit_summary(const SvParams& p);

double gaussian_mixture_cdf(const MixtureParams& p, double x);

/// Mixture quantile by bisection on the CDF, tolerance 1e-10, bracket
/// [min(mu) - 10 max(sigma), max(mu) + 10 max(sigma)].
double gaussian_mixture_quantile(const MixtureParams& p, double q);

/// Population robust summary vector (S1..S4) from a quantile function.
Eigen::Vector4d gk_population_summary(const GkParams& p);
Eigen::Vector4d mixture_population_summary(const MixtureParams& p);

/// Pseudo-true g-and-k parameter: minimizer of the Euclidean distance
/// between the population robust summaries of the g-and-k and those of the
/// mixture, over the box [0,10]^4. Multi-start Nelder-Mead on a
/// deterministic Latin-hypercube schedule; throws std::runtime_error
/// (carrying the best point found) if no restart converges.
GkParams gk_pseudo_true(const MixtureParams& mix);

}  // namespace rabc
