#pragma once

#include <Eigen/Core>
#include <vector>

#include "rabc/abc.hpp"

namespace rabc {

struct SmcConfig {
    std::size_t N = 1000;     // particle count
    double alpha = 0.5;       // fraction dropped per iteration
    double p_acc_min = 0.01;  // stopping acceptance probability
    int R_init = 5;           // move count of the first iteration
    double c_moves = 0.01;    // move-adaptation constant
    int max_moves = 100;      // cap on adapted move count
    int workers = 1;
    long max_iterations = 10000;

    void validate() const;
};

struct SmcIterationRecord {
    int iteration = 0;
    double epsilon = 0.0;
    double p_acc = 0.0;
    int moves = 0;
};
using SmcTrace = std::vector<SmcIterationRecord>;

/// Move count for the next rejuvenation pass: ceil(ln c / ln(1 - p_acc)),
/// capped; returns r_init when the previous acceptance probability was 1.
int adapt_moves(double p_acc_prev, double c, int r_init = 5, int cap = 100);

/// Empirical covariance of the stacked (theta, gamma) particle matrix with
/// 1e-8 diagonal jitter. Throws std::runtime_error with fewer than dim + 2
/// particles.
Eigen::MatrixXd tune_joint_proposal(const ParticleSet& particles);

/// Standard (non-robust) ABC-SMC replenishment sampler with a Gaussian
/// random-walk MCMC-ABC move kernel. Stops once the pass acceptance
/// probability drops below p_acc_min.
ParticleSet smc_abc(const JointPrior& prior, const Simulator& simulator,
                    const SummaryMap& summary_map, const SummaryVector& y_summary,
                    const SmcConfig& cfg, RandomStream& rng, SmcTrace* trace = nullptr);

/// Adaptive proposal state for spike-and-slab adjustment components.
struct GammaProposalState {
    Eigen::VectorXd zero_prob;  // clipped to [0.05, 0.95]
    Eigen::VectorXd slab_std;
};

/// Mixed-measure log prior of one spike-and-slab component: atom log(p) at
/// exactly 0, log(1-p) + Laplace(0, lambda) log-density elsewhere.
double spike_slab_log_prior(double gamma, double p, double lambda);

/// Mixed-measure log proposal density q(to | from): atom zero_prob at 0,
/// (1 - zero_prob) * Normal(from, slab_std^2) elsewhere.
double spike_slab_log_proposal(double to, double from, double zero_prob, double slab_std);

double propose_spike_slab_component(double from, double zero_prob, double slab_std,
                                    RandomStream& rng);

/// Log MH ratio of the Gamma block (prior x reverse-proposal over forward),
/// component-wise over the mixed measure; exactly 0 for atom-to-atom moves.
double spike_slab_log_move_ratio(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                 const GammaProposalState& state, double p, double lambda);

/// Step two of R-ABC with a Laplace prior on the adjustment components:
/// joint Gaussian random-walk proposals on (theta, Gamma) with covariance
/// tuned from the particle population, accepting only moves that satisfy
/// both the step-one (d1 <= eps1) and current (d2 <= eps_next) indicator
/// conditions together with the prior ratio.
ParticleSet rabc_smc_laplace(const ParticleSet& step1, double eps1, const JointPrior& gamma_prior,
                             const JointPrior& theta_prior, const Simulator& simulator,
                             const SummaryMap& summary_map, const Partition& partition,
                             const SummaryVector& y_summary, const SmcConfig& cfg,
                             RandomStream& rng, SmcTrace* trace = nullptr);

/// Step two of R-ABC with a spike-and-slab prior on the adjustment
/// components: theta moves via a Gaussian random walk tuned on the theta
/// particles alone, each gamma component via an adaptive atom/slab mixture
/// proposal; the MH ratio is taken on the mixed measure so exact zeros are
/// preserved with positive probability.
ParticleSet rabc_smc_spike_slab(const ParticleSet& step1, double eps1, double p, double lambda,
                                const JointPrior& theta_prior, const Simulator& simulator,
                                const SummaryMap& summary_map, const Partition& partition,
                                const SummaryVector& y_summary, const SmcConfig& cfg,
                                RandomStream& rng, SmcTrace* trace = nullptr);

}  // namespace rabc
