#include "rabc/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rabc/optimize.hpp"

namespace rabc {

void GkParams::validate() const {
    if (!(b > 0.0)) throw std::invalid_argument("GkParams: b must be > 0");
    if (!(k > -0.5)) throw std::invalid_argument("GkParams: k must be > -0.5");
}

void MixtureParams::validate() const {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("MixtureParams: w must lie in [0,1]");
    if (!(var1 > 0.0 && var2 > 0.0)) throw std::invalid_argument("MixtureParams: variances must be > 0");
}

void SvParams::validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("SvParams: rho must lie in (0,1)");
    if (!(sigma_v > 0.0 && sigma_v < 1.0))
        throw std::invalid_argument("SvParams: sigma_v must lie in (0,1)");
}

void StableSvParams::validate() const {
    // closed at the prior-box edges so boundary probes stay simulable
    if (!(theta2 >= 0.7 && theta2 < 1.0))
        throw std::invalid_argument("StableSvParams: theta2 must lie in [0.7,1)");
    if (!(theta3 >= 0.01 && theta3 < 1.0))
        throw std::invalid_argument("StableSvParams: theta3 must lie in [0.01,1)");
    if (!(theta4 > 1.0 && theta4 <= 2.0))
        throw std::invalid_argument("StableSvParams: theta4 must lie in (1,2]");
}

Dataset simulate_normal_location(double theta, double sigma, Eigen::Index n, RandomStream& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("simulate_normal_location: sigma must be > 0");
    if (n < 1) throw std::invalid_argument("simulate_normal_location: n must be >= 1");
    Dataset y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.normal(theta, sigma);
    return y;
}

Dataset simulate_gaussian_mixture(const MixtureParams& p, Eigen::Index n, RandomStream& rng) {
    p.validate();
    const double sd1 = std::sqrt(p.var1), sd2 = std::sqrt(p.var2);
    Dataset y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = rng.uniform() < p.w ? rng.normal(p.mu1, sd1) : rng.normal(p.mu2, sd2);
    }
    return y;
}

double gk_quantile(double q, const GkParams& p) {
    p.validate();
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("gk_quantile: q must lie in (0,1)");
    const double z = normal_quantile(q);
    const double e = std::exp(-p.g * z);
    return p.a + p.b * (1.0 + 0.8 * (1.0 - e) / (1.0 + e)) * std::pow(1.0 + z * z, p.k) * z;
}

Dataset simulate_gk(const GkParams& p, Eigen::Index n, RandomStream& rng) {
    p.validate();
    Dataset y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = gk_quantile(rng.uniform(), p);
    return y;
}

bool ma2_invertible(double theta1, double theta2) {
    return theta1 > -2.0 && theta1 < 2.0 && theta1 + theta2 > -1.0 && theta1 - theta2 < 1.0 &&
           theta2 < 1.0;
}

Dataset simulate_ma2(double theta1, double theta2, Eigen::Index n, RandomStream& rng) {
    if (!ma2_invertible(theta1, theta2))
        throw std::invalid_argument("simulate_ma2: parameters outside the invertibility triangle");
    // Exact initialization: the two pre-sample errors are drawn fresh.
    double em2 = rng.normal();
    double em1 = rng.normal();
    Dataset z(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double e = rng.normal();
        z[t] = e + theta1 * em1 + theta2 * em2;
        em2 = em1;
        em1 = e;
    }
    return z;
}

Dataset simulate_sv(const SvParams& p, Eigen::Index n, RandomStream& rng) {
    p.validate();
    Dataset y(n);
    const double mean_h = p.omega / (1.0 - p.rho);
    const double sd_h = p.sigma_v / std::sqrt(1.0 - p.rho * p.rho);
    double h = rng.normal(mean_h, sd_h);  // stationary start
    y[0] = std::exp(0.5 * h) * rng.normal();
    for (Eigen::Index t = 1; t < n; ++t) {
        h = p.omega + p.rho * h + p.sigma_v * rng.normal();
        y[t] = std::exp(0.5 * h) * rng.normal();
    }
    return y;
}

Dataset simulate_stable_sv(const StableSvParams& p, Eigen::Index n, RandomStream& rng) {
    p.validate();
    Dataset r(n);
    const double sd_ln = p.theta3 / std::sqrt(1.0 - p.theta2 * p.theta2);
    double ln_sig2 = rng.normal(0.0, sd_ln);  // theta1 = 0, stationary start
    r[0] = std::exp(0.5 * ln_sig2) * sample_alpha_stable(p.theta4, 0.0, rng);
    for (Eigen::Index t = 1; t < n; ++t) {
        ln_sig2 = p.theta2 * ln_sig2 + p.theta3 * rng.normal();
        r[t] = std::exp(0.5 * ln_sig2) * sample_alpha_stable(p.theta4, 0.0, rng);
    }
    return r;
}

Eigen::Vector3d ma2_limit_summaries(double theta1, double theta2) {
    return {1.0 + theta1 * theta1 + theta2 * theta2, theta1 * (1.0 + theta2), theta2};
}

Eigen::Vector3d sv_limit_summary(const SvParams& p) {
    p.validate();
    const double v = std::exp(p.omega / (1.0 - p.rho) +
                              0.5 * p.sigma_v * p.sigma_v / (1.0 - p.rho * p.rho));
    return {v, 0.0, 0.0};
}

double gaussian_mixture_cdf(const MixtureParams& p, double x) {
    p.validate();
    const double sd1 = std::sqrt(p.var1), sd2 = std::sqrt(p.var2);
    return p.w * normal_cdf((x - p.mu1) / sd1) + (1.0 - p.w) * normal_cdf((x - p.mu2) / sd2);
}

double gaussian_mixture_quantile(const MixtureParams& p, double q) {
    p.validate();
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("gaussian_mixture_quantile: q must lie in (0,1)");
    const double sd_max = std::sqrt(std::max(p.var1, p.var2));
    double lo = std::min(p.mu1, p.mu2) - 10.0 * sd_max;
    double hi = std::max(p.mu1, p.mu2) + 10.0 * sd_max;
    while (gaussian_mixture_cdf(p, lo) > q) lo -= 10.0 * sd_max;
    while (gaussian_mixture_cdf(p, hi) < q) hi += 10.0 * sd_max;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (gaussian_mixture_cdf(p, mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

Eigen::Vector4d robust_summary_of_quantiles(const std::function<double(double)>& quantile) {
    const double l1 = quantile(0.25), l2 = quantile(0.5), l3 = quantile(0.75);
    const double e1 = quantile(1.0 / 8.0), e3 = quantile(3.0 / 8.0);
    const double e5 = quantile(5.0 / 8.0), e7 = quantile(7.0 / 8.0);
    const double s2 = l3 - l1;
    return {l2, s2, (l3 + l1 - 2.0 * l2) / s2, (e7 - e5 + e3 - e1) / s2};
}

}  // namespace

Eigen::Vector4d gk_population_summary(const GkParams& p) {
    return robust_summary_of_quantiles([&](double q) { return gk_quantile(q, p); });
}

Eigen::Vector4d mixture_population_summary(const MixtureParams& p) {
    return robust_summary_of_quantiles([&](double q) { return gaussian_mixture_quantile(p, q); });
}

GkParams gk_pseudo_true(const MixtureParams& mix) {
    const Eigen::Vector4d b0 = mixture_population_summary(mix);
    const Eigen::Vector4d lo = Eigen::Vector4d::Zero();
    const Eigen::Vector4d hi = Eigen::Vector4d::Constant(10.0);

    auto objective = [&](const Eigen::VectorXd& th) {
        double penalty = 0.0;
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (th[j] < lo[j]) penalty += lo[j] - th[j];
            if (th[j] > hi[j]) penalty += th[j] - hi[j];
        }
        if (penalty > 0.0) return 1e6 + penalty;
        GkParams p{th[0], std::max(th[1], 1e-12), th[2], th[3]};
        return (gk_population_summary(p) - b0).norm();
    };

    const auto starts = latin_hypercube(lo, hi, 20);
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (const auto& s : starts) {
        auto r = nelder_mead(objective, s, Eigen::VectorXd::Constant(4, 0.5), 1e-8, 20000);
        any_converged = any_converged || r.converged;
        if (r.converged && r.value < best.value) best = r;
        if (!any_converged && r.value < best.value) best = r;
    }
    // Polish from the incumbent with progressively tighter simplexes.
    for (const double step : {1e-2, 1e-3, 1e-4}) {
        auto polished =
            nelder_mead(objective, best.x, Eigen::VectorXd::Constant(4, step), 1e-13, 40000);
        if (polished.value < best.value) best = polished;
    }

    if (!any_converged) {
        std::ostringstream msg;
        msg << "gk_pseudo_true: no restart converged; best point (" << best.x.transpose()
            << ") with objective " << best.value;
        throw std::runtime_error(msg.str());
    }
    GkParams out{best.x[0], best.x[1], best.x[2], best.x[3]};
    out.validate();
    return out;
}

}  // namespace rabc
