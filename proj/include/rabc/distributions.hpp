#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "rabc/random.hpp"

namespace rabc {

/// Standard normal quantile, accurate to full double precision (AS 241).
/// Throws std::domain_error outside (0,1).
double normal_quantile(double q);

/// Standard normal CDF.
double normal_cdf(double x);

/// One-dimensional prior over a scalar parameter. spike_slab places an atom
/// of mass p at exactly 0.0 and a Laplace(0, scale) slab elsewhere, so its
/// log-density lives on a mixed (atom + Lebesgue) measure.
struct PriorSpec {
    enum class Kind { Uniform, Gaussian, Laplace, Exponential, SpikeSlab };

    Kind kind = Kind::Uniform;
    double a = 0.0;  // uniform: lo, gaussian: mean, laplace: location, exponential: scale, spike_slab: p
    double b = 1.0;  // uniform: hi, gaussian: variance, laplace/spike_slab: scale

    static PriorSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static PriorSpec gaussian(double mean, double variance) { return {Kind::Gaussian, mean, variance}; }
    static PriorSpec laplace(double location, double scale) { return {Kind::Laplace, location, scale}; }
    static PriorSpec exponential(double scale) { return {Kind::Exponential, scale, 0.0}; }
    static PriorSpec spike_slab(double p, double scale) { return {Kind::SpikeSlab, p, scale}; }

    /// Throws std::invalid_argument when hyperparameters violate the kind's
    /// constraints (e.g. uniform lo >= hi, spike probability outside (0,1)).
    void validate() const;

    double mean() const;
    double variance() const;
};

double sample(const PriorSpec& prior, RandomStream& rng);

struct LogDensity {
    double value = 0.0;
    bool is_atom = false;
};

/// Log-density of `prior` at x. For spike_slab at exactly 0.0 this is the
/// atom mass log(p) with is_atom set; points outside a prior's support give
/// -infinity rather than an error.
LogDensity log_density(const PriorSpec& prior, double x);

/// Factorized prior over a parameter vector, with an optional extra support
/// predicate for non-rectangular regions (e.g. the MA(2) invertibility
/// triangle). With a predicate present, log_density is unnormalized; MH
/// ratios and rejection sampling are unaffected.
struct JointPrior {
    std::vector<PriorSpec> components;
    std::function<bool(const Eigen::VectorXd&)> support;

    JointPrior() = default;
    explicit JointPrior(std::vector<PriorSpec> comps,
                        std::function<bool(const Eigen::VectorXd&)> sup = nullptr)
        : components(std::move(comps)), support(std::move(sup)) {}

    Eigen::Index dim() const { return static_cast<Eigen::Index>(components.size()); }
    void validate() const;
    bool in_support(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(RandomStream& rng) const;
    double log_density(const Eigen::VectorXd& x) const;
};

/// One draw from the alpha-stable law S(alpha, beta, 0, 1), alpha in (1,2],
/// via the Chambers-Mallows-Stuck transform; S(2, .) is N(0, 2).
double sample_alpha_stable(double alpha, double beta, RandomStream& rng);

/// Student-t draw rescaled to unit variance; nu > 2.
double sample_standardized_t(double nu, RandomStream& rng);

/// Log-density of the unit-variance standardized t with nu > 2 df.
double standardized_t_logpdf(double x, double nu);

}  // namespace rabc
