#include "rabc/rabc.hpp"

#include <stdexcept>

namespace rabc {

StepOneResult run_step_one(const JointPrior& prior, const Simulator& simulator,
                           const SummaryMap& summary_map, const Partition& partition,
                           const SummaryVector& y_summary, std::size_t N1,
                           double retain_fraction, RandomStream& rng, int workers) {
    if (N1 < 1000) throw std::invalid_argument("run_step_one: N1 must be >= 1000");
    partition.validate(y_summary.size());
    StepOneResult result;
    result.set = rejection_abc(prior, simulator, summary_map, y_summary, N1, retain_fraction, rng,
                               partition.psi, workers);
    for (auto& p : result.set.particles) p.d1 = p.d2;  // step-one distance is the psi distance
    result.eps1 = result.set.epsilon;
    return result;
}

RabcResult run_rabc(const JointPrior& theta_prior, const Simulator& simulator,
                    const SummaryMap& summary_map, const Partition& partition,
                    const SummaryVector& y_summary, const RabcOptions& options,
                    RandomStream& rng) {
    partition.validate(y_summary.size());
    RandomStream rng_step1 = rng.derive({1});
    RandomStream rng_step2 = rng.derive({2});

    const StepOneResult step1 =
        run_step_one(theta_prior, simulator, summary_map, partition, y_summary, options.N1,
                     options.retain_fraction, rng_step1, options.smc.workers);

    RabcResult result;
    result.partition = partition;
    result.eps1 = step1.eps1;

    const Eigen::Index d_theta = theta_prior.dim();
    const Eigen::Index d_phi = static_cast<Eigen::Index>(partition.phi.size());

    if (d_phi == 0) {
        // Degenerate two-step run: nothing to adjust, step one is the answer.
        const auto& particles = step1.set.particles;
        result.theta_draws.resize(static_cast<Eigen::Index>(particles.size()), d_theta);
        result.gamma_draws.resize(static_cast<Eigen::Index>(particles.size()), 0);
        result.d1.resize(static_cast<Eigen::Index>(particles.size()));
        result.d2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(particles.size()));
        for (std::size_t i = 0; i < particles.size(); ++i) {
            result.theta_draws.row(static_cast<Eigen::Index>(i)) = particles[i].theta.transpose();
            result.d1[static_cast<Eigen::Index>(i)] = particles[i].d1;
        }
        result.eps2_final = 0.0;
        return result;
    }

    ParticleSet final_set;
    if (options.gamma_prior == GammaPriorKind::Laplace) {
        JointPrior gamma_prior(std::vector<PriorSpec>(
            static_cast<std::size_t>(d_phi), PriorSpec::laplace(0.0, options.lambda)));
        final_set = rabc_smc_laplace(step1.set, step1.eps1, gamma_prior, theta_prior, simulator,
                                     summary_map, partition, y_summary, options.smc, rng_step2,
                                     &result.trace);
    } else {
        final_set = rabc_smc_spike_slab(step1.set, step1.eps1, options.spike_probability,
                                        options.lambda, theta_prior, simulator, summary_map,
                                        partition, y_summary, options.smc, rng_step2,
                                        &result.trace);
    }

    const Eigen::Index n = static_cast<Eigen::Index>(final_set.particles.size());
    result.theta_draws.resize(n, d_theta);
    result.gamma_draws.resize(n, d_phi);
    result.d1.resize(n);
    result.d2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Particle& p = final_set.particles[static_cast<std::size_t>(i)];
        result.theta_draws.row(i) = p.theta.transpose();
        result.gamma_draws.row(i) = p.gamma.transpose();
        result.d1[i] = p.d1;
        result.d2[i] = p.d2;
    }
    result.eps2_final = final_set.epsilon;
    result.warning = final_set.warning;
    return result;
}

}  // namespace rabc
