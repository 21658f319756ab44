#include "rabc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rabc {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& initial_step,
                             double ftol, long max_evaluations) {
    const Eigen::Index n = x0.size();
    if (initial_step.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
    std::vector<double> vals(static_cast<std::size_t>(n) + 1);
    long evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = fn(x);
        return std::isfinite(v) ? v : 1e300;
    };
    vals[0] = eval(pts[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i) + 1][i] += initial_step[i];
        vals[static_cast<std::size_t>(i) + 1] = eval(pts[static_cast<std::size_t>(i) + 1]);
    }

    std::vector<std::size_t> order(pts.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    NelderMeadResult result;
    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(vals[worst] - vals[best]) <= ftol * (std::abs(vals[best]) + ftol)) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + alpha * (centroid - pts[worst]);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const Eigen::VectorXd contracted = centroid + rho * (pts[worst] - centroid);
        const double fc = eval(contracted);
        if (fc < vals[worst]) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 1; k < order.size(); ++k) {
            pts[order[k]] = pts[order.front()] + sigma * (pts[order[k]] - pts[order.front()]);
            vals[order[k]] = eval(pts[order[k]]);
        }
    }

    const std::size_t argmin = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    result.x = pts[argmin];
    result.value = vals[argmin];
    result.evaluations = evals;
    return result;
}

std::vector<Eigen::VectorXd> latin_hypercube(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                             int count) {
    if (lo.size() != hi.size()) throw std::invalid_argument("latin_hypercube: bound size mismatch");
    if (count < 1) throw std::invalid_argument("latin_hypercube: count must be positive");
    const Eigen::Index d = lo.size();
    // Fixed-key stream so the design is a pure function of (count, d).
    RandomStream rng(0x4c48431u, {static_cast<std::uint64_t>(count), static_cast<std::uint64_t>(d)});

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(count), Eigen::VectorXd(d));
    std::vector<int> perm(static_cast<std::size_t>(count));
    for (Eigen::Index j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        for (int i = 0; i < count; ++i) {
            const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / count;
            pts[static_cast<std::size_t>(i)][j] = lo[j] + (hi[j] - lo[j]) * u;
        }
    }
    return pts;
}

}  // namespace rabc
