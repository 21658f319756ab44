#pragma once

#include <Eigen/Core>

#include "rabc/smc.hpp"

namespace rabc {

struct StepOneResult {
    ParticleSet set;
    double eps1 = 0.0;
};

/// Step one of R-ABC: rejection ABC restricted to the psi coordinates of the
/// summary; eps1 is the largest retained distance.
StepOneResult run_step_one(const JointPrior& prior, const Simulator& simulator,
                           const SummaryMap& summary_map, const Partition& partition,
                           const SummaryVector& y_summary, std::size_t N1,
                           double retain_fraction, RandomStream& rng, int workers = 1);

enum class GammaPriorKind { Laplace, SpikeSlab };

struct RabcOptions {
    GammaPriorKind gamma_prior = GammaPriorKind::SpikeSlab;
    double lambda = 0.125;         // adjustment prior scale
    double spike_probability = 0.5;
    std::size_t N1 = 25000;        // step-one prior draws
    double retain_fraction = 0.05;
    SmcConfig smc;
};

struct RabcResult {
    Eigen::MatrixXd theta_draws;  // N x d_theta
    Eigen::MatrixXd gamma_draws;  // N x d_phi
    Eigen::VectorXd d1;           // cached psi distances
    Eigen::VectorXd d2;           // cached adjusted phi distances
    double eps1 = 0.0;
    double eps2_final = 0.0;
    SmcTrace trace;
    Partition partition;
    bool warning = false;
};

/// Full two-step Robust ABC: step-one localization on psi, then the
/// robustified replenishment sampler on the adjusted phi block under the
/// joint selection condition. With an empty phi block the result degenerates
/// to step one exactly.
RabcResult run_rabc(const JointPrior& theta_prior, const Simulator& simulator,
                    const SummaryMap& summary_map, const Partition& partition,
                    const SummaryVector& y_summary, const RabcOptions& options,
                    RandomStream& rng);

}  // namespace rabc
