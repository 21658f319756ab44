#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "rabc/random.hpp"

namespace rabc {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    long evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization. Converges when the simplex's
/// best-worst objective spread falls below ftol.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& initial_step,
                             double ftol, long max_evaluations);

/// Deterministic Latin-hypercube points in the box [lo, hi]; the layout
/// depends only on (count, dim), never on external state.
std::vector<Eigen::VectorXd> latin_hypercube(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                             int count);

}  // namespace rabc
