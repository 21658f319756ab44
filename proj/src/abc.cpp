#include "rabc/abc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rabc/parallel.hpp"

namespace rabc {

double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                const Eigen::VectorXd& weights) {
    if (a.size() != b.size()) throw std::invalid_argument("distance: length mismatch");
    if (weights.size() == 0) return (a - b).norm();
    if (weights.size() != a.size()) throw std::invalid_argument("distance: weight length mismatch");
    return std::sqrt((weights.array() * (a - b).array().square()).sum());
}

double distance(const SummaryVector& a, const SummaryVector& b, const Eigen::VectorXd& weights) {
    return distance(a.values, b.values, weights);
}

double masked_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const std::vector<Eigen::Index>& indices) {
    if (a.size() != b.size()) throw std::invalid_argument("masked_distance: length mismatch");
    if (indices.empty()) return (a - b).norm();
    double s = 0.0;
    for (Eigen::Index i : indices) {
        if (i < 0 || i >= a.size()) throw std::invalid_argument("masked_distance: index out of range");
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

ParticleSet rejection_abc(const JointPrior& prior, const Simulator& simulator,
                          const SummaryMap& summary_map, const SummaryVector& y_summary,
                          std::size_t N, double retain_fraction, RandomStream& rng,
                          const std::vector<Eigen::Index>& distance_indices, int workers) {
    prior.validate();
    if (N < 100) throw std::invalid_argument("rejection_abc: N must be >= 100");
    if (!(retain_fraction > 0.0 && retain_fraction <= 1.0))
        throw std::invalid_argument("rejection_abc: retain_fraction must lie in (0,1]");

    std::vector<Particle> draws(N);
    std::vector<char> failed(N, 0);
    parallel_for(N, workers, [&](std::size_t i) {
        RandomStream sub = rng.derive({static_cast<std::uint64_t>(i)});
        Particle& p = draws[i];
        p.theta = prior.sample(sub);
        try {
            const Dataset z = simulator(p.theta, sub);
            p.summary = summary_map(z);
            p.d2 = masked_distance(p.summary.values, y_summary.values, distance_indices);
            if (!std::isfinite(p.d2)) failed[i] = 1;
        } catch (const std::exception&) {
            failed[i] = 1;
        }
    });

    std::vector<std::size_t> ok;
    ok.reserve(N);
    for (std::size_t i = 0; i < N; ++i)
        if (!failed[i]) ok.push_back(i);
    if (N - ok.size() > N / 10)
        throw std::runtime_error("rejection_abc: more than 10% of simulations failed");

    std::sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
        if (draws[a].d2 != draws[b].d2) return draws[a].d2 < draws[b].d2;
        return a < b;  // deterministic tie-break by draw index
    });

    std::size_t keep = static_cast<std::size_t>(retain_fraction * static_cast<double>(N));
    keep = std::max<std::size_t>(1, std::min(keep, ok.size()));

    ParticleSet out;
    out.particles.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) out.particles.push_back(std::move(draws[ok[k]]));
    out.epsilon = out.particles.back().d2;
    out.sorted = true;
    return out;
}

double epanechnikov_weight(double t, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epanechnikov_weight: epsilon must be > 0");
    if (t < 0.0) throw std::invalid_argument("epanechnikov_weight: t must be >= 0");
    if (t > epsilon) return 0.0;
    const double r = t / epsilon;
    return (1.0 - r * r) / epsilon;
}

ParticleSet regression_adjust(const ParticleSet& set, const SummaryVector& y_summary) {
    const std::size_t n = set.size();
    if (n == 0) throw std::invalid_argument("regression_adjust: empty particle set");
    const Eigen::Index d_eta = y_summary.size();
    const Eigen::Index d_theta = set.particles.front().theta.size();

    Eigen::VectorXd w(n);
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w[static_cast<Eigen::Index>(i)] = epanechnikov_weight(set.particles[i].d2, set.epsilon);
        if (w[static_cast<Eigen::Index>(i)] > 0.0) ++nonzero;
    }
    if (nonzero < static_cast<std::size_t>(d_eta) + 2)
        throw std::runtime_error("regression_adjust: fewer than d_eta + 2 positively weighted particles");

    Eigen::MatrixXd X(n, d_eta + 1);
    Eigen::MatrixXd T(n, d_theta);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (set.particles[i].summary.size() != d_eta)
            throw std::invalid_argument("regression_adjust: summary length mismatch");
        X(row, 0) = 1.0;
        X.row(row).tail(d_eta) = set.particles[i].summary.values.transpose();
        T.row(row) = set.particles[i].theta.transpose();
    }

    const Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::MatrixXd gram = X.transpose() * Xw;
    gram.diagonal().array() += 1e-10;  // conditioning ridge, below test tolerances
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("regression_adjust: rank-deficient weighted design");
    const Eigen::MatrixXd coef = ldlt.solve(X.transpose() * (w.asDiagonal() * T));
    if (!coef.allFinite())
        throw std::runtime_error("regression_adjust: non-finite regression coefficients");
    const Eigen::MatrixXd slope = coef.bottomRows(d_eta);  // d_eta x d_theta

    ParticleSet out = set;
    const Eigen::VectorXd shift_y = slope.transpose() * y_summary.values;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd fitted = slope.transpose() * set.particles[i].summary.values;
        out.particles[i].theta = shift_y + (set.particles[i].theta - fitted);
    }
    return out;
}

}  // namespace rabc
