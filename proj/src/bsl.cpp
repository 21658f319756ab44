#include "rabc/bsl.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
    // a rank-deficient raw covariance (e.g. constant summaries) is the
    // degenerate -inf path; the jitter only conditions full-rank matrices
    if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success) return kNegInf;
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += 1e-8;
    const Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::VectorXd diff = x - mean;
    const Eigen::VectorXd half = llt.matrixL().solve(diff);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < jittered.rows(); ++i)
        logdet += std::log(llt.matrixL()(i, i));
    const double d = static_cast<double>(x.size());
    return -0.5 * d * std::log(2.0 * M_PI) - logdet - 0.5 * half.squaredNorm();
}

}  // namespace

SyntheticMoments estimate_moments(const Eigen::VectorXd& theta, const Simulator& simulator,
                                  const SummaryMap& summary_map, std::size_t m,
                                  RandomStream& rng) {
    if (m < 3) throw std::invalid_argument("estimate_moments: m too small");
    std::vector<Eigen::VectorXd> etas;
    etas.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        RandomStream sub = rng.derive({static_cast<std::uint64_t>(i)});
        etas.push_back(summary_map(simulator(theta, sub)).values);
    }
    const Eigen::Index d = etas.front().size();
    if (m < static_cast<std::size_t>(d) + 2)
        throw std::invalid_argument("estimate_moments: need m >= d_eta + 2");
    SyntheticMoments out;
    out.m = m;
    out.mean = Eigen::VectorXd::Zero(d);
    for (const auto& e : etas) out.mean += e;
    out.mean /= static_cast<double>(m);
    out.cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& e : etas) {
        const Eigen::VectorXd c = e - out.mean;
        out.cov += c * c.transpose();
    }
    out.cov /= static_cast<double>(m);
    return out;
}

double rbsl_loglik(const SummaryVector& y_summary, const SyntheticMoments& moments,
                   const Eigen::VectorXd& gamma, BslVariant variant) {
    const Eigen::Index d = moments.mean.size();
    if (y_summary.size() != d) throw std::invalid_argument("rbsl_loglik: summary length mismatch");
    switch (variant) {
        case BslVariant::Plain:
            return mvn_logpdf(y_summary.values, moments.mean, moments.cov);
        case BslVariant::MeanAdjust: {
            if (gamma.size() != d) throw std::invalid_argument("rbsl_loglik: gamma length mismatch");
            const Eigen::VectorXd stds = moments.cov.diagonal().array().sqrt();
            return mvn_logpdf(y_summary.values, moments.mean + (stds.array() * gamma.array()).matrix(),
                              moments.cov);
        }
        case BslVariant::VarianceAdjust: {
            if (gamma.size() != d) throw std::invalid_argument("rbsl_loglik: gamma length mismatch");
            if ((gamma.array() < 0.0).any())
                throw std::invalid_argument("rbsl_loglik: variance adjustment requires gamma >= 0");
            Eigen::MatrixXd cov = moments.cov;
            cov.diagonal().array() += moments.cov.diagonal().array() * gamma.array();
            return mvn_logpdf(y_summary.values, moments.mean, cov);
        }
    }
    return kNegInf;
}

RbslResult rbsl_mh(const RbslOptions& options, const JointPrior& theta_prior,
                   const JointPrior& gamma_prior, const Simulator& simulator,
                   const SummaryMap& summary_map, const SummaryVector& y_summary,
                   RandomStream& rng) {
    theta_prior.validate();
    if (options.iters <= options.burnin)
        throw std::invalid_argument("rbsl_mh: iters must exceed burnin");
    const bool adjust = options.variant != BslVariant::Plain;
    if (adjust) gamma_prior.validate();
    const Eigen::Index d_theta = theta_prior.dim();
    const Eigen::Index d_gamma = adjust ? gamma_prior.dim() : 0;
    const bool log_scale_gamma = options.variant == BslVariant::VarianceAdjust;

    // Chain state x = (theta, gamma'), gamma' on log scale for the variance
    // variant so positivity is structural.
    const Eigen::Index dim = d_theta + d_gamma;
    Eigen::VectorXd x(dim);
    {
        RandomStream init_rng = rng.derive({0});
        if (options.init_theta.size() == d_theta) {
            x.head(d_theta) = options.init_theta;
        } else {
            x.head(d_theta) = theta_prior.sample(init_rng);
        }
        for (Eigen::Index j = 0; j < d_gamma; ++j) {
            const double mean_j = gamma_prior.components[static_cast<std::size_t>(j)].mean();
            x[d_theta + j] = log_scale_gamma ? std::log(std::max(mean_j, 1e-3)) : mean_j;
        }
    }

    auto gamma_of = [&](const Eigen::VectorXd& state) -> Eigen::VectorXd {
        if (d_gamma == 0) return Eigen::VectorXd();
        Eigen::VectorXd g = state.tail(d_gamma);
        if (log_scale_gamma) g = g.array().exp();
        return g;
    };

    // Log target in chain coordinates (synthetic likelihood x prior, plus
    // the log-scale Jacobian for the variance variant).
    auto log_prior = [&](const Eigen::VectorXd& state) {
        double lp = theta_prior.log_density(state.head(d_theta));
        if (!std::isfinite(lp)) return kNegInf;
        if (d_gamma > 0) {
            const Eigen::VectorXd g = gamma_of(state);
            lp += gamma_prior.log_density(g);
            if (log_scale_gamma) lp += state.tail(d_gamma).sum();  // Jacobian d gamma / d log gamma
        }
        return lp;
    };

    Eigen::VectorXd prop_std(dim);
    for (Eigen::Index j = 0; j < d_theta; ++j)
        prop_std[j] = 0.1 * std::sqrt(theta_prior.components[static_cast<std::size_t>(j)].variance());
    for (Eigen::Index j = 0; j < d_gamma; ++j)
        prop_std[d_theta + j] =
            log_scale_gamma
                ? 0.5
                : 0.5 * std::sqrt(gamma_prior.components[static_cast<std::size_t>(j)].variance());
    Eigen::MatrixXd prop_root = prop_std.asDiagonal();

    double current_ll;
    {
        RandomStream mom_rng = rng.derive({1, 0});
        const SyntheticMoments mom =
            estimate_moments(x.head(d_theta), simulator, summary_map, options.m, mom_rng);
        current_ll = rbsl_loglik(y_summary, mom, gamma_of(x), options.variant);
    }
    double current_lp = log_prior(x);

    const std::size_t kept =
        (options.iters - options.burnin + options.thin - 1) / options.thin;
    RbslResult result;
    result.draws.resize(static_cast<Eigen::Index>(kept), dim);
    Eigen::Index kept_rows = 0;

    std::vector<Eigen::VectorXd> history;
    history.reserve(options.burnin);
    std::size_t accepted = 0, accepted_burnin = 0;

    for (std::size_t it = 0; it < options.iters; ++it) {
        RandomStream it_rng = rng.derive({1, static_cast<std::uint64_t>(it + 1)});
        Eigen::VectorXd z(dim);
        for (Eigen::Index j = 0; j < dim; ++j) z[j] = it_rng.normal();
        const Eigen::VectorXd proposal = x + prop_root * z;

        const double lp_prop = log_prior(proposal);
        if (std::isfinite(lp_prop)) {
            RandomStream mom_rng = it_rng.derive({0});
            const SyntheticMoments mom = estimate_moments(proposal.head(d_theta), simulator,
                                                          summary_map, options.m, mom_rng);
            const double ll_prop = rbsl_loglik(y_summary, mom, gamma_of(proposal), options.variant);
            const double log_ratio = ll_prop + lp_prop - current_ll - current_lp;
            if (std::isfinite(ll_prop) &&
                (log_ratio >= 0.0 || std::log(it_rng.uniform()) < log_ratio)) {
                x = proposal;
                current_ll = ll_prop;
                current_lp = lp_prop;
                ++accepted;
                if (it < options.burnin) ++accepted_burnin;
            }
        }

        if (it < options.burnin) {
            history.push_back(x);
            // Refresh the proposal from the chain so far, scaled by 2.38^2/d.
            if ((it + 1) % 250 == 0 && history.size() >= 100) {
                Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
                for (const auto& h : history) mean += h;
                mean /= static_cast<double>(history.size());
                Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
                for (const auto& h : history) {
                    const Eigen::VectorXd c = h - mean;
                    cov += c * c.transpose();
                }
                cov /= static_cast<double>(history.size() - 1);
                cov *= 2.38 * 2.38 / static_cast<double>(dim);
                cov.diagonal().array() += 1e-10;
                const Eigen::LLT<Eigen::MatrixXd> llt(cov);
                if (llt.info() == Eigen::Success) prop_root = llt.matrixL();
            }
        } else if ((it - options.burnin) % options.thin == 0 && kept_rows < result.draws.rows()) {
            Eigen::VectorXd row(dim);
            row.head(d_theta) = x.head(d_theta);
            if (d_gamma > 0) row.tail(d_gamma) = gamma_of(x);
            result.draws.row(kept_rows++) = row.transpose();
        }
    }

    result.draws.conservativeResize(kept_rows, dim);
    result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(options.iters);
    result.warning =
        static_cast<double>(accepted_burnin) / static_cast<double>(options.burnin) < 0.001;
    return result;
}

}  // namespace rabc
