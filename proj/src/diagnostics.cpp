#include "rabc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rabc/parallel.hpp"
#include "rabc/summaries.hpp"

namespace rabc {

double randomization_location_test(const Eigen::VectorXd& posterior_draws,
                                   const std::function<double(RandomStream&)>& prior_sampler,
                                   std::size_t n_prior, std::size_t n_perm, RandomStream& rng) {
    const std::size_t n_post = static_cast<std::size_t>(posterior_draws.size());
    if (n_post == 0) throw std::domain_error("randomization_location_test: empty posterior sample");
    if (n_perm < 1) throw std::domain_error("randomization_location_test: need n_perm >= 1");
    if (n_prior == 0) n_prior = n_post;

    std::vector<double> pool(n_post + n_prior);
    double sum_post = 0.0, sum_prior = 0.0;
    for (std::size_t i = 0; i < n_post; ++i) {
        pool[i] = posterior_draws[static_cast<Eigen::Index>(i)];
        sum_post += pool[i];
    }
    for (std::size_t i = 0; i < n_prior; ++i) {
        pool[n_post + i] = prior_sampler(rng);
        sum_prior += pool[n_post + i];
    }
    const double observed =
        std::abs(sum_post / static_cast<double>(n_post) - sum_prior / static_cast<double>(n_prior));

    std::size_t at_least = 0;
    for (std::size_t perm = 0; perm < n_perm; ++perm) {
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
        double sa = 0.0;
        for (std::size_t i = 0; i < n_post; ++i) sa += pool[i];
        double sb = 0.0;
        for (std::size_t i = n_post; i < pool.size(); ++i) sb += pool[i];
        const double stat =
            std::abs(sa / static_cast<double>(n_post) - sb / static_cast<double>(n_prior));
        if (stat >= observed) ++at_least;
    }
    return static_cast<double>(1 + at_least) / static_cast<double>(n_perm + 1);
}

PredictiveCheck posterior_predictive_summaries(const Eigen::MatrixXd& theta_draws,
                                               const Simulator& simulator,
                                               const SummaryMap& summary_map,
                                               const SummaryVector& observed,
                                               std::size_t n_draws_used, RandomStream& rng,
                                               double lo_quantile, double hi_quantile) {
    if (theta_draws.rows() == 0)
        throw std::domain_error("posterior_predictive_summaries: empty posterior");
    if (n_draws_used == 0)
        throw std::domain_error("posterior_predictive_summaries: n_draws_used must be positive");

    const Eigen::Index d = observed.size();
    PredictiveCheck check;
    check.lo_quantile = lo_quantile;
    check.hi_quantile = hi_quantile;
    check.summaries.resize(static_cast<Eigen::Index>(n_draws_used), d);
    for (std::size_t i = 0; i < n_draws_used; ++i) {
        RandomStream sub = rng.derive({static_cast<std::uint64_t>(i)});
        const Eigen::Index row = static_cast<Eigen::Index>(
            sub.uniform_index(static_cast<std::size_t>(theta_draws.rows())));
        const Dataset z = simulator(theta_draws.row(row).transpose(), sub);
        check.summaries.row(static_cast<Eigen::Index>(i)) = summary_map(z).values.transpose();
    }

    check.observed_inside.resize(static_cast<std::size_t>(d));
    std::vector<double> column(n_draws_used);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n_draws_used; ++i)
            column[i] = check.summaries(static_cast<Eigen::Index>(i), j);
        std::sort(column.begin(), column.end());
        const double lo = quantile_sorted(column, lo_quantile);
        const double hi = quantile_sorted(column, hi_quantile);
        const double obs = observed.values[j];
        check.observed_inside[static_cast<std::size_t>(j)] = obs >= lo && obs <= hi;
    }
    return check;
}

std::vector<ProbeRow> partition_probe(const JointPrior& prior, const Simulator& simulator,
                                      const SummaryMap& summary_map, std::size_t n_param_draws,
                                      std::size_t n_reps, RandomStream& rng, int workers) {
    if (n_reps < 2) throw std::domain_error("partition_probe: need n_reps >= 2");
    prior.validate();
    std::vector<ProbeRow> rows(n_param_draws);
    parallel_for(n_param_draws, workers, [&](std::size_t i) {
        RandomStream sub = rng.derive({static_cast<std::uint64_t>(i)});
        ProbeRow& row = rows[i];
        row.theta = prior.sample(sub);
        Eigen::MatrixXd reps;
        for (std::size_t r = 0; r < n_reps; ++r) {
            RandomStream rep_rng = sub.derive({static_cast<std::uint64_t>(r)});
            const Eigen::VectorXd s = summary_map(simulator(row.theta, rep_rng)).values;
            if (r == 0) reps.resize(static_cast<Eigen::Index>(n_reps), s.size());
            reps.row(static_cast<Eigen::Index>(r)) = s.transpose();
        }
        row.summary_mean = reps.colwise().mean();
        const Eigen::MatrixXd centered = reps.rowwise() - row.summary_mean.transpose();
        row.summary_std = (centered.array().square().colwise().sum() /
                           static_cast<double>(n_reps - 1))
                              .sqrt();
    });
    return rows;
}

std::vector<McMetrics> mc_metrics(const std::vector<Eigen::MatrixXd>& replication_posteriors,
                                  const Eigen::VectorXd& theta_star, double level) {
    if (replication_posteriors.size() < 2)
        throw std::domain_error("mc_metrics: need at least 2 replications");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("mc_metrics: level must lie in (0,1)");
    const Eigen::Index d = theta_star.size();
    const double lo_q = 0.5 * (1.0 - level);
    const double hi_q = 1.0 - lo_q;

    std::vector<McMetrics> out(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        McMetrics& m = out[static_cast<std::size_t>(j)];
        std::size_t covered = 0;
        double bias_sum = 0.0, std_sum = 0.0;
        for (const auto& draws : replication_posteriors) {
            if (draws.cols() <= j) throw std::invalid_argument("mc_metrics: draw matrix too narrow");
            std::vector<double> col(static_cast<std::size_t>(draws.rows()));
            for (Eigen::Index i = 0; i < draws.rows(); ++i)
                col[static_cast<std::size_t>(i)] = draws(i, j);
            std::sort(col.begin(), col.end());
            const double lo = quantile_sorted(col, lo_q);
            const double hi = quantile_sorted(col, hi_q);
            m.intervals.emplace_back(lo, hi);
            if (theta_star[j] >= lo && theta_star[j] <= hi) ++covered;
            double mean = 0.0;
            for (double v : col) mean += v;
            mean /= static_cast<double>(col.size());
            double var = 0.0;
            for (double v : col) var += (v - mean) * (v - mean);
            var = col.size() > 1 ? var / static_cast<double>(col.size() - 1) : 0.0;
            bias_sum += mean - theta_star[j];
            std_sum += std::sqrt(var);
        }
        const double n_rep = static_cast<double>(replication_posteriors.size());
        m.coverage_pct = 100.0 * static_cast<double>(covered) / n_rep;
        m.bias = bias_sum / n_rep;
        m.avg_posterior_std = std_sum / n_rep;
    }
    return out;
}

}  // namespace rabc
