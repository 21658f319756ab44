#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <vector>

#include "rabc/distributions.hpp"
#include "rabc/summaries.hpp"

namespace rabc {

/// One joint draw. d2 is the selection distance; d1 caches the psi-block
/// distance in two-step runs (NaN when unused). gamma is empty unless the
/// particle carries adjustment components.
struct Particle {
    Eigen::VectorXd theta;
    Eigen::VectorXd gamma;
    double d1 = std::numeric_limits<double>::quiet_NaN();
    double d2 = 0.0;
    SummaryVector summary;
};

struct ParticleSet {
    std::vector<Particle> particles;
    double epsilon = std::numeric_limits<double>::infinity();
    bool sorted = false;   // ascending by d2
    bool warning = false;  // degenerate termination (e.g. move kernel stalled)

    std::size_t size() const { return particles.size(); }
};

using Simulator = std::function<Dataset(const Eigen::VectorXd& theta, RandomStream& rng)>;
using SummaryMap = std::function<SummaryVector(const Dataset&)>;

/// Weighted Euclidean distance; unit weights when `weights` is empty.
double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                const Eigen::VectorXd& weights = {});
double distance(const SummaryVector& a, const SummaryVector& b,
                const Eigen::VectorXd& weights = {});

/// Distance restricted to the given coordinates (all when empty).
double masked_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const std::vector<Eigen::Index>& indices);

/// Reference-table rejection ABC: N prior draws, one simulation each, keep
/// the floor(retain_fraction * N) smallest distances (ties broken by draw
/// index); epsilon is set to the largest retained distance. Distances are
/// computed on `distance_indices` of the summary (all coordinates when
/// empty). Failed simulations are discarded; more than 10% failures aborts
/// the run.
ParticleSet rejection_abc(const JointPrior& prior, const Simulator& simulator,
                          const SummaryMap& summary_map, const SummaryVector& y_summary,
                          std::size_t N, double retain_fraction, RandomStream& rng,
                          const std::vector<Eigen::Index>& distance_indices = {},
                          int workers = 1);

/// Epanechnikov kernel weight with the normalizing constant dropped:
/// (1 - (t/eps)^2) / eps for t <= eps, else 0.
double epanechnikov_weight(double t, double epsilon);

/// Local-linear regression adjustment: per theta coordinate, weighted least
/// squares of theta on the cached summaries with Epanechnikov weights in
/// d2, then theta_i <- b1' eta(y) + (theta_i - b1' eta(z_i)). Distances and
/// summaries are left untouched. Throws std::runtime_error on a
/// rank-deficient weighted design.
ParticleSet regression_adjust(const ParticleSet& particles, const SummaryVector& y_summary);

}  // namespace rabc
