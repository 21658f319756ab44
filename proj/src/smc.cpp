#include "rabc/smc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rabc/parallel.hpp"

namespace rabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd stacked_state(const Particle& p) {
    Eigen::VectorXd x(p.theta.size() + p.gamma.size());
    x.head(p.theta.size()) = p.theta;
    x.tail(p.gamma.size()) = p.gamma;
    return x;
}

Eigen::MatrixXd covariance_with_jitter(const std::vector<Eigen::VectorXd>& rows) {
    const Eigen::Index d = rows.front().size();
    if (rows.size() < 2) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        cov.diagonal().array() += 1e-8;
        return cov;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& r : rows) mean += r;
    mean /= static_cast<double>(rows.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& r : rows) {
        const Eigen::VectorXd c = r - mean;
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(rows.size() - 1);
    cov.diagonal().array() += 1e-8;
    return cov;
}

/// Cholesky factor of the proposal covariance; falls back to the diagonal of
/// per-coordinate variances when the factorization fails.
Eigen::MatrixXd proposal_root(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    return cov.diagonal().array().sqrt().matrix().asDiagonal();
}

Eigen::VectorXd gaussian_step(const Eigen::MatrixXd& root, RandomStream& rng) {
    Eigen::VectorXd z(root.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return root * z;
}

struct ReplenishmentHooks {
    std::function<void(const std::vector<Particle>&, std::size_t)> tune;
    std::function<bool(Particle&, double, RandomStream&)> move;
};

ParticleSet replenishment_loop(std::vector<Particle> particles, const SmcConfig& cfg,
                               RandomStream& rng, SmcTrace* trace,
                               const ReplenishmentHooks& hooks, bool warn_init = false) {
    const std::size_t N = particles.size();
    auto sort_by_d2 = [&] {
        std::stable_sort(particles.begin(), particles.end(),
                         [](const Particle& a, const Particle& b) { return a.d2 < b.d2; });
    };
    sort_by_d2();

    const std::size_t n_drop = std::min<std::size_t>(
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.alpha * static_cast<double>(N))),
        N - 1);
    const std::size_t n_keep = N - n_drop;

    ParticleSet out;
    out.warning = warn_init;
    double p_acc = 1.0;
    double eps = particles.back().d2;
    std::vector<int> acc_counts(n_drop, 0);

    for (long t = 1; t <= cfg.max_iterations && p_acc > cfg.p_acc_min; ++t) {
        const int R = adapt_moves(p_acc, cfg.c_moves, cfg.R_init, cfg.max_moves);
        const double eps_next = particles[n_keep - 1].d2;
        hooks.tune(particles, n_keep);

        parallel_for(n_drop, cfg.workers, [&](std::size_t j) {
            RandomStream sub = rng.derive({static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j)});
            Particle p = particles[sub.uniform_index(n_keep)];
            int acc = 0;
            for (int k = 0; k < R; ++k)
                if (hooks.move(p, eps_next, sub)) ++acc;
            particles[n_keep + j] = std::move(p);
            acc_counts[j] = acc;
        });

        const long i_acc = std::accumulate(acc_counts.begin(), acc_counts.end(), 0L);
        p_acc = static_cast<double>(i_acc) / (static_cast<double>(R) * static_cast<double>(n_drop));
        eps = eps_next;
        sort_by_d2();
        if (trace) trace->push_back({static_cast<int>(t), eps_next, p_acc, R});
        // flag degenerate terminations: the move kernel stalled at its move
        // cap, or acceptance collapsed on the very first pass
        if (i_acc == 0 && (R >= cfg.max_moves || t == 1)) {
            out.warning = true;
            break;
        }
    }

    out.particles = std::move(particles);
    out.epsilon = eps;
    out.sorted = true;
    return out;
}

}  // namespace

void SmcConfig::validate() const {
    if (N < 4) throw std::invalid_argument("SmcConfig: N must be >= 4");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SmcConfig: alpha must lie in (0,1)");
    if (!(p_acc_min > 0.0 && p_acc_min < 1.0))
        throw std::invalid_argument("SmcConfig: p_acc_min must lie in (0,1)");
    if (R_init < 1) throw std::invalid_argument("SmcConfig: R_init must be >= 1");
    if (!(c_moves > 0.0 && c_moves < 1.0))
        throw std::invalid_argument("SmcConfig: c_moves must lie in (0,1)");
}

int adapt_moves(double p_acc_prev, double c, int r_init, int cap) {
    if (!(p_acc_prev > 0.0 && p_acc_prev <= 1.0))
        return cap;  // a pass with zero acceptances saturates the cap
    if (p_acc_prev >= 1.0) return r_init;
    // guard the ceiling against last-ulp noise in the log ratio
    const double r = std::ceil(std::log(c) / std::log1p(-p_acc_prev) - 1e-9);
    if (!(r >= 1.0)) return 1;
    return static_cast<int>(std::min(r, static_cast<double>(cap)));
}

Eigen::MatrixXd tune_joint_proposal(const ParticleSet& set) {
    if (set.particles.empty()) throw std::runtime_error("tune_joint_proposal: empty particle set");
    const Eigen::Index d = stacked_state(set.particles.front()).size();
    if (set.particles.size() < static_cast<std::size_t>(d) + 2)
        throw std::runtime_error("tune_joint_proposal: need at least dim + 2 particles");
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(set.particles.size());
    for (const auto& p : set.particles) rows.push_back(stacked_state(p));
    return covariance_with_jitter(rows);
}

ParticleSet smc_abc(const JointPrior& prior, const Simulator& simulator,
                    const SummaryMap& summary_map, const SummaryVector& y_summary,
                    const SmcConfig& cfg, RandomStream& rng, SmcTrace* trace) {
    cfg.validate();
    prior.validate();

    std::vector<Particle> particles(cfg.N);
    parallel_for(cfg.N, cfg.workers, [&](std::size_t i) {
        RandomStream sub = rng.derive({0, static_cast<std::uint64_t>(i)});
        Particle& p = particles[i];
        p.theta = prior.sample(sub);
        const Dataset z = simulator(p.theta, sub);
        p.summary = summary_map(z);
        p.d2 = distance(p.summary, y_summary);
    });

    Eigen::MatrixXd root;
    ReplenishmentHooks hooks;
    hooks.tune = [&](const std::vector<Particle>& pop, std::size_t n_keep) {
        std::vector<Eigen::VectorXd> rows;
        rows.reserve(n_keep);
        for (std::size_t i = 0; i < n_keep; ++i) rows.push_back(pop[i].theta);
        root = proposal_root(covariance_with_jitter(rows));
    };
    hooks.move = [&](Particle& p, double eps_next, RandomStream& sub) {
        const Eigen::VectorXd proposal = p.theta + gaussian_step(root, sub);
        if (!prior.in_support(proposal)) return false;
        const Dataset z = simulator(proposal, sub);
        SummaryVector s = summary_map(z);
        const double d = distance(s, y_summary);
        if (d > eps_next) return false;
        const double log_ratio = prior.log_density(proposal) - prior.log_density(p.theta);
        if (log_ratio < 0.0 && std::log(sub.uniform()) >= log_ratio) return false;
        p.theta = proposal;
        p.summary = std::move(s);
        p.d2 = d;
        return true;
    };

    return replenishment_loop(std::move(particles), cfg, rng, trace, hooks);
}

double spike_slab_log_prior(double gamma, double p, double lambda) {
    if (gamma == 0.0) return std::log(p);
    return std::log(1.0 - p) - std::log(2.0 * lambda) - std::abs(gamma) / lambda;
}

double spike_slab_log_proposal(double to, double from, double zero_prob, double slab_std) {
    if (to == 0.0) return std::log(zero_prob);
    const double z = (to - from) / slab_std;
    return std::log(1.0 - zero_prob) - 0.5 * std::log(2.0 * M_PI) - std::log(slab_std) -
           0.5 * z * z;
}

double propose_spike_slab_component(double from, double zero_prob, double slab_std,
                                    RandomStream& rng) {
    if (rng.uniform() < zero_prob) return 0.0;
    return rng.normal(from, slab_std);
}

double spike_slab_log_move_ratio(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                 const GammaProposalState& state, double p, double lambda) {
    double log_ratio = 0.0;
    for (Eigen::Index j = 0; j < from.size(); ++j) {
        log_ratio += spike_slab_log_prior(to[j], p, lambda) -
                     spike_slab_log_prior(from[j], p, lambda) +
                     spike_slab_log_proposal(from[j], to[j], state.zero_prob[j], state.slab_std[j]) -
                     spike_slab_log_proposal(to[j], from[j], state.zero_prob[j], state.slab_std[j]);
    }
    return log_ratio;
}

namespace {

/// Shared two-step initialization: pair a step-one theta with a fresh Gamma
/// draw and one fresh simulation. The phi-side threshold is +infinity
/// (first simulation accepted), while d1 <= eps1 is enforced by retrying so
/// the joint selection condition holds for every particle from the start.
std::vector<Particle> init_step_two(const ParticleSet& step1, double eps1,
                                    const std::function<Eigen::VectorXd(RandomStream&)>& draw_gamma,
                                    const Simulator& simulator, const SummaryMap& summary_map,
                                    const Partition& partition, const SummaryVector& y_summary,
                                    const SmcConfig& cfg, RandomStream& rng, bool* warn) {
    if (step1.particles.empty()) throw std::invalid_argument("init_step_two: empty step-one set");
    const Eigen::VectorXd y_full = y_summary.values;
    std::vector<Particle> particles(cfg.N);
    std::vector<char> warn_flags(cfg.N, 0);
    parallel_for(cfg.N, cfg.workers, [&](std::size_t i) {
        RandomStream sub = rng.derive({0, static_cast<std::uint64_t>(i)});
        Particle best;
        best.d1 = std::numeric_limits<double>::infinity();
        const int cap = 1000;
        for (int attempt = 0; attempt < cap; ++attempt) {
            Particle cand;
            const std::size_t src = sub.uniform_index(step1.particles.size());
            cand.theta = step1.particles[src].theta;
            cand.gamma = draw_gamma(sub);
            const Dataset z = simulator(cand.theta, sub);
            cand.summary = summary_map(z);
            cand.d1 = masked_distance(cand.summary.values, y_full, partition.psi);
            Eigen::VectorXd phi_adj(partition.phi.size());
            for (std::size_t k = 0; k < partition.phi.size(); ++k)
                phi_adj[static_cast<Eigen::Index>(k)] =
                    cand.summary.values[partition.phi[k]] + cand.gamma[static_cast<Eigen::Index>(k)];
            double d2 = 0.0;
            for (std::size_t k = 0; k < partition.phi.size(); ++k) {
                const double diff = phi_adj[static_cast<Eigen::Index>(k)] - y_full[partition.phi[k]];
                d2 += diff * diff;
            }
            cand.d2 = std::sqrt(d2);
            if (cand.d1 < best.d1) best = cand;
            if (cand.d1 <= eps1) break;
        }
        if (best.d1 > eps1) warn_flags[i] = 1;
        particles[i] = std::move(best);
    });
    for (char w : warn_flags)
        if (w) *warn = true;
    return particles;
}

double adjusted_phi_distance(const SummaryVector& summary, const Eigen::VectorXd& gamma,
                             const Partition& partition, const Eigen::VectorXd& y_full) {
    double s = 0.0;
    for (std::size_t k = 0; k < partition.phi.size(); ++k) {
        const double diff = summary.values[partition.phi[k]] +
                            gamma[static_cast<Eigen::Index>(k)] - y_full[partition.phi[k]];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

ParticleSet rabc_smc_laplace(const ParticleSet& step1, double eps1, const JointPrior& gamma_prior,
                             const JointPrior& theta_prior, const Simulator& simulator,
                             const SummaryMap& summary_map, const Partition& partition,
                             const SummaryVector& y_summary, const SmcConfig& cfg,
                             RandomStream& rng, SmcTrace* trace) {
    cfg.validate();
    gamma_prior.validate();
    theta_prior.validate();
    partition.validate(y_summary.size());
    const Eigen::VectorXd y_full = y_summary.values;

    bool warn = false;
    auto draw_gamma = [&](RandomStream& sub) { return gamma_prior.sample(sub); };
    std::vector<Particle> particles = init_step_two(step1, eps1, draw_gamma, simulator,
                                                    summary_map, partition, y_summary, cfg, rng,
                                                    &warn);

    Eigen::MatrixXd root;
    ReplenishmentHooks hooks;
    hooks.tune = [&](const std::vector<Particle>& pop, std::size_t n_keep) {
        std::vector<Eigen::VectorXd> rows;
        rows.reserve(n_keep);
        for (std::size_t i = 0; i < n_keep; ++i) rows.push_back(stacked_state(pop[i]));
        root = proposal_root(covariance_with_jitter(rows));
    };
    hooks.move = [&](Particle& p, double eps_next, RandomStream& sub) {
        const Eigen::Index d_theta = p.theta.size(), d_gamma = p.gamma.size();
        const Eigen::VectorXd step = gaussian_step(root, sub);
        const Eigen::VectorXd theta_new = p.theta + step.head(d_theta);
        const Eigen::VectorXd gamma_new = p.gamma + step.tail(d_gamma);
        if (!theta_prior.in_support(theta_new)) return false;
        const Dataset z = simulator(theta_new, sub);
        SummaryVector s = summary_map(z);
        const double d2 = adjusted_phi_distance(s, gamma_new, partition, y_full);
        if (d2 > eps_next) return false;
        const double d1 = masked_distance(s.values, y_full, partition.psi);
        if (d1 > eps1) return false;
        const double log_ratio = theta_prior.log_density(theta_new) -
                                 theta_prior.log_density(p.theta) +
                                 gamma_prior.log_density(gamma_new) -
                                 gamma_prior.log_density(p.gamma);
        if (log_ratio < 0.0 && std::log(sub.uniform()) >= log_ratio) return false;
        p.theta = theta_new;
        p.gamma = gamma_new;
        p.summary = std::move(s);
        p.d1 = d1;
        p.d2 = d2;
        return true;
    };

    return replenishment_loop(std::move(particles), cfg, rng, trace, hooks, warn);
}

ParticleSet rabc_smc_spike_slab(const ParticleSet& step1, double eps1, double p, double lambda,
                                const JointPrior& theta_prior, const Simulator& simulator,
                                const SummaryMap& summary_map, const Partition& partition,
                                const SummaryVector& y_summary, const SmcConfig& cfg,
                                RandomStream& rng, SmcTrace* trace) {
    cfg.validate();
    theta_prior.validate();
    partition.validate(y_summary.size());
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("rabc_smc_spike_slab: p must lie in (0,1)");
    if (!(lambda > 0.0)) throw std::invalid_argument("rabc_smc_spike_slab: lambda must be > 0");
    const Eigen::VectorXd y_full = y_summary.values;
    const Eigen::Index d_gamma = static_cast<Eigen::Index>(partition.phi.size());

    bool warn = false;
    auto draw_gamma = [&](RandomStream& sub) {
        Eigen::VectorXd g(d_gamma);
        for (Eigen::Index j = 0; j < d_gamma; ++j)
            g[j] = sub.uniform() < p ? 0.0 : sub.laplace(0.0, lambda);
        return g;
    };
    std::vector<Particle> particles = init_step_two(step1, eps1, draw_gamma, simulator,
                                                    summary_map, partition, y_summary, cfg, rng,
                                                    &warn);

    Eigen::MatrixXd theta_root;
    GammaProposalState state{Eigen::VectorXd::Constant(d_gamma, 0.5),
                             Eigen::VectorXd::Constant(d_gamma, lambda)};
    ReplenishmentHooks hooks;
    hooks.tune = [&](const std::vector<Particle>& pop, std::size_t n_keep) {
        std::vector<Eigen::VectorXd> rows;
        rows.reserve(n_keep);
        for (std::size_t i = 0; i < n_keep; ++i) rows.push_back(pop[i].theta);
        theta_root = proposal_root(covariance_with_jitter(rows));

        for (Eigen::Index j = 0; j < d_gamma; ++j) {
            std::size_t zeros = 0;
            double sum = 0.0, sum2 = 0.0;
            std::size_t nz = 0;
            for (std::size_t i = 0; i < n_keep; ++i) {
                const double g = pop[i].gamma[j];
                if (g == 0.0) {
                    ++zeros;
                } else {
                    ++nz;
                    sum += g;
                    sum2 += g * g;
                }
            }
            state.zero_prob[j] =
                std::clamp(static_cast<double>(zeros) / static_cast<double>(n_keep), 0.05, 0.95);
            if (nz >= 2) {
                const double mean = sum / static_cast<double>(nz);
                const double var =
                    std::max(0.0, (sum2 - static_cast<double>(nz) * mean * mean) /
                                      static_cast<double>(nz - 1));
                state.slab_std[j] = var > 0.0 ? std::sqrt(var) : lambda;
            } else {
                state.slab_std[j] = lambda;
            }
        }
    };
    hooks.move = [&](Particle& part, double eps_next, RandomStream& sub) {
        const Eigen::VectorXd theta_new = part.theta + gaussian_step(theta_root, sub);
        Eigen::VectorXd gamma_new(d_gamma);
        for (Eigen::Index j = 0; j < d_gamma; ++j)
            gamma_new[j] = propose_spike_slab_component(part.gamma[j], state.zero_prob[j],
                                                        state.slab_std[j], sub);
        if (!theta_prior.in_support(theta_new)) return false;
        const Dataset z = simulator(theta_new, sub);
        SummaryVector s = summary_map(z);
        const double d2 = adjusted_phi_distance(s, gamma_new, partition, y_full);
        if (d2 > eps_next) return false;
        const double d1 = masked_distance(s.values, y_full, partition.psi);
        if (d1 > eps1) return false;
        const double log_ratio = theta_prior.log_density(theta_new) -
                                 theta_prior.log_density(part.theta) +
                                 spike_slab_log_move_ratio(part.gamma, gamma_new, state, p, lambda);
        if (log_ratio < 0.0 && std::log(sub.uniform()) >= log_ratio) return false;
        part.theta = theta_new;
        part.gamma = gamma_new;
        part.summary = std::move(s);
        part.d1 = d1;
        part.d2 = d2;
        return true;
    };

    return replenishment_loop(std::move(particles), cfg, rng, trace, hooks, warn);
}

}  // namespace rabc
