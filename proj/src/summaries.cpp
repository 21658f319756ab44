#include "rabc/summaries.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rabc/distributions.hpp"
#include "rabc/optimize.hpp"

namespace rabc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void Partition::validate(Eigen::Index d) const {
    if (psi.empty()) throw std::invalid_argument("Partition: psi must be non-empty");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    auto mark = [&](Eigen::Index i) {
        if (i < 0 || i >= d) throw std::invalid_argument("Partition: index out of range");
        if (seen[static_cast<std::size_t>(i)])
            throw std::invalid_argument("Partition: duplicate index");
        seen[static_cast<std::size_t>(i)] = true;
    };
    for (Eigen::Index i : psi) mark(i);
    for (Eigen::Index i : phi) mark(i);
    if (psi.size() + phi.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("Partition: psi and phi must cover the summary vector");
}

std::pair<SummaryVector, SummaryVector> apply_partition(const SummaryVector& eta,
                                                        const Partition& part) {
    part.validate(eta.size());
    auto take = [&](const std::vector<Eigen::Index>& idx) {
        SummaryVector out;
        out.values.resize(static_cast<Eigen::Index>(idx.size()));
        out.labels.reserve(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out.values[static_cast<Eigen::Index>(k)] = eta.values[idx[k]];
            out.labels.push_back(eta.labels.empty() ? std::string{}
                                                    : eta.labels[static_cast<std::size_t>(idx[k])]);
        }
        return out;
    };
    return {take(part.psi), take(part.phi)};
}

SummaryVector mean_variance_summary(const Dataset& z) {
    const Eigen::Index n = z.size();
    if (n < 2) throw std::domain_error("mean_variance_summary: need n >= 2");
    const double mean = z.mean();
    const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
    return {Eigen::Vector2d{mean, var}, {"mean", "variance"}};
}

SummaryVector autocovariance_summary(const Dataset& z) {
    const Eigen::Index n = z.size();
    if (n < 3) throw std::domain_error("autocovariance_summary: need n >= 3");
    Eigen::Vector3d eta = Eigen::Vector3d::Zero();
    for (int j = 0; j <= 2; ++j) {
        double s = 0.0;
        for (Eigen::Index t = j; t < n; ++t) s += z[t] * z[t - j];
        eta[j] = s / static_cast<double>(n);
    }
    return {eta, {"eta0", "eta1", "eta2"}};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::domain_error("quantile_sorted: empty sample");
    const std::size_t n = sorted.size();
    const double h = 1.0 + (static_cast<double>(n) - 1.0) * q;  // 1-based position
    const std::size_t i = std::min(static_cast<std::size_t>(h), n - 1 + 1) - 1;
    const std::size_t j = std::min(i + 1, n - 1);
    const double frac = h - std::floor(h);
    return sorted[i] + frac * (sorted[j] - sorted[i]);
}

SummaryVector robust_gk_summary(const Dataset& z) {
    const Eigen::Index n = z.size();
    if (n < 8) throw std::domain_error("robust_gk_summary: need n >= 8");
    std::vector<double> s(z.data(), z.data() + n);
    std::sort(s.begin(), s.end());
    const double l1 = quantile_sorted(s, 0.25), l2 = quantile_sorted(s, 0.5),
                 l3 = quantile_sorted(s, 0.75);
    const double e1 = quantile_sorted(s, 1.0 / 8.0), e3 = quantile_sorted(s, 3.0 / 8.0),
                 e5 = quantile_sorted(s, 5.0 / 8.0), e7 = quantile_sorted(s, 7.0 / 8.0);
    const double s2 = l3 - l1;
    if (s2 == 0.0) throw std::runtime_error("robust_gk_summary: degenerate sample (zero IQR)");
    return {Eigen::Vector4d{l2, s2, (l3 + l1 - 2.0 * l2) / s2, (e7 - e5 + e3 - e1) / s2},
            {"S1", "S2", "S3", "S4"}};
}

void AuxGarchParams::validate() const {
    if (!(beta1 > 0.0)) throw std::invalid_argument("AuxGarchParams: beta1 must be > 0");
    if (!(beta2 >= 0.0 && beta3 >= 0.0))
        throw std::invalid_argument("AuxGarchParams: beta2, beta3 must be >= 0");
    if (!(beta2 + beta3 < 1.0))
        throw std::invalid_argument("AuxGarchParams: beta2 + beta3 must be < 1");
    if (!(beta4 > 2.0)) throw std::invalid_argument("AuxGarchParams: beta4 must exceed 2");
}

double garch_loglik(const AuxGarchParams& beta, const Dataset& y) {
    beta.validate();
    const Eigen::Index n = y.size();
    if (n < 1) throw std::domain_error("garch_loglik: empty dataset");
    const double x1 = y.array().abs().mean();
    if (!(x1 > 0.0) || !std::isfinite(x1)) return kNegInf;

    const double nu = beta.beta4;
    const double lognorm =
        std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(M_PI * (nu - 2.0));

    double x = x1;
    double loglik = 0.0;
    double abs_eps_prev = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t > 0) x = beta.beta1 + beta.beta2 * x * abs_eps_prev + beta.beta3 * x;
        if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
        const double eps = y[t] / x;
        loglik += lognorm - 0.5 * (nu + 1.0) * std::log1p(eps * eps / (nu - 2.0)) - std::log(x);
        abs_eps_prev = std::abs(eps);
    }
    return std::isfinite(loglik) ? loglik : kNegInf;
}

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

Eigen::Vector4d to_raw(const Eigen::VectorXd& u) {
    const double beta1 = std::exp(u[0]);
    const double s = sigmoid(u[1]);
    const double r = sigmoid(u[2]);
    return {beta1, s * r, s * (1.0 - r), 2.0 + std::exp(u[3])};
}

Eigen::Vector4d to_transformed(const AuxGarchParams& b) {
    const double s = std::clamp(b.beta2 + b.beta3, 1e-8, 1.0 - 1e-8);
    const double r = std::clamp(b.beta2 / s, 1e-8, 1.0 - 1e-8);
    return {std::log(b.beta1), logit(s), logit(r), std::log(b.beta4 - 2.0)};
}

Eigen::Vector4d raw_score(const AuxGarchParams& beta_hat, const Dataset& z, bool* ok);

}  // namespace

AuxGarchParams fit_garch_aux(const Dataset& y) {
    const Eigen::Index n = y.size();
    if (n < 50) throw std::domain_error("fit_garch_aux: need n >= 50");
    const double scale = y.array().abs().mean();
    if (!(scale > 0.0)) throw std::runtime_error("fit_garch_aux: degenerate data");

    auto negloglik_u = [&](const Eigen::VectorXd& u) {
        const Eigen::Vector4d raw = to_raw(u);
        AuxGarchParams b{raw[0], raw[1], raw[2], raw[3]};
        return -garch_loglik(b, y);
    };

    const AuxGarchParams starts[5] = {
        {0.12 * scale, 0.10, 0.80, 8.0},  {0.05 * scale, 0.05, 0.90, 5.0},
        {0.40 * scale, 0.20, 0.60, 12.0}, {0.70 * scale, 0.30, 0.30, 4.0},
        {0.25 * scale, 0.15, 0.75, 25.0}};

    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& s0 : starts) {
        auto r = nelder_mead(negloglik_u, to_transformed(s0), Eigen::VectorXd::Constant(4, 0.25),
                             1e-8, 20000);
        any = any || r.converged;
        if (r.value < best.value) best = r;
    }
    if (!any && !std::isfinite(best.value))
        throw std::runtime_error("fit_garch_aux: no restart produced a finite likelihood");

    // Newton polish on transformed coordinates until the raw-space score
    // (per-observation) is negligible. Step sizes: the Hessian needs a wide
    // stencil (second differences of a ~1e4-scale log-likelihood drown in
    // roundoff below h ~ 1e-3), the gradient a narrow one.
    Eigen::VectorXd u = best.x;
    double current = -negloglik_u(u);
    const double tol = 1e-9;
    for (int iter = 0; iter < 50; ++iter) {
        const Eigen::Vector4d raw = to_raw(u);
        AuxGarchParams b{raw[0], raw[1], raw[2], raw[3]};
        bool ok = true;
        const Eigen::Vector4d score = raw_score(b, y, &ok);
        if (!ok) break;
        if (score.norm() / static_cast<double>(n) <= tol) break;

        const double hg = 1e-5, hh = 1e-3;
        Eigen::Vector4d grad;
        Eigen::Matrix4d hess;
        const double f0 = -current;
        for (int i = 0; i < 4; ++i) {
            Eigen::VectorXd up = u, um = u;
            up[i] += hg;
            um[i] -= hg;
            grad[i] = (negloglik_u(up) - negloglik_u(um)) / (2.0 * hg);
            up = u; um = u;
            up[i] += hh;
            um[i] -= hh;
            hess(i, i) = (negloglik_u(up) - 2.0 * f0 + negloglik_u(um)) / (hh * hh);
        }
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                Eigen::VectorXd upp = u, upm = u, ump = u, umm = u;
                upp[i] += hh; upp[j] += hh;
                upm[i] += hh; upm[j] -= hh;
                ump[i] -= hh; ump[j] += hh;
                umm[i] -= hh; umm[j] -= hh;
                hess(i, j) = hess(j, i) = (negloglik_u(upp) - negloglik_u(upm) -
                                           negloglik_u(ump) + negloglik_u(umm)) /
                                          (4.0 * hh * hh);
            }
        }
        Eigen::Vector4d step = hess.ldlt().solve(-grad);
        if (!step.allFinite() || step.lpNorm<Eigen::Infinity>() < 1e-10) break;
        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Eigen::VectorXd cand = u + t * step;
            const double fcand = -negloglik_u(cand);
            if (std::isfinite(fcand) && fcand >= current - 1e-12) {
                u = cand;
                current = fcand;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }

    // Final stage: Newton on the finite-difference score itself, so the fit
    // is a root of the exact summary map used downstream (the coarse FD
    // stencil carries a truncation bias that no amount of likelihood
    // optimization can push below ~1e-5 on its own).
    Eigen::Vector4d beta_vec = to_raw(u);
    for (int iter = 0; iter < 20; ++iter) {
        AuxGarchParams b{beta_vec[0], beta_vec[1], beta_vec[2], beta_vec[3]};
        bool ok = true;
        const Eigen::Vector4d g = raw_score(b, y, &ok);
        if (!ok || !g.allFinite()) break;
        if (g.norm() / static_cast<double>(n) <= 1e-10) break;

        Eigen::Matrix4d jac;
        bool jac_ok = true;
        for (int j = 0; j < 4 && jac_ok; ++j) {
            const double hj = 1e-3 * std::max(1.0, std::abs(beta_vec[j]));
            Eigen::Vector4d bp = beta_vec, bm = beta_vec;
            bp[j] += hj;
            bm[j] -= hj;
            bool okp = true, okm = true;
            const Eigen::Vector4d gp = raw_score({bp[0], bp[1], bp[2], bp[3]}, y, &okp);
            const Eigen::Vector4d gm = raw_score({bm[0], bm[1], bm[2], bm[3]}, y, &okm);
            if (!okp || !okm) {
                jac_ok = false;
                break;
            }
            jac.col(j) = (gp - gm) / (2.0 * hj);
        }
        if (!jac_ok) break;
        const Eigen::Vector4d step = jac.fullPivLu().solve(-g);
        if (!step.allFinite()) break;

        double t = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 20; ++ls) {
            const Eigen::Vector4d cand = beta_vec + t * step;
            AuxGarchParams bc{cand[0], cand[1], cand[2], cand[3]};
            bool okc = true;
            Eigen::Vector4d gc;
            try {
                gc = raw_score(bc, y, &okc);
            } catch (const std::exception&) {
                okc = false;
            }
            if (okc && gc.allFinite() && gc.norm() < g.norm()) {
                beta_vec = cand;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
    }

    AuxGarchParams out{beta_vec[0], beta_vec[1], beta_vec[2], beta_vec[3]};
    out.validate();
    return out;
}

namespace {

Eigen::Vector4d raw_score(const AuxGarchParams& beta_hat, const Dataset& z, bool* ok) {
    const double steps[4] = {1e-4 * std::max(1.0, std::abs(beta_hat.beta1)),
                             1e-4 * std::max(1.0, std::abs(beta_hat.beta2)),
                             1e-4 * std::max(1.0, std::abs(beta_hat.beta3)),
                             1e-4 * std::max(1.0, std::abs(beta_hat.beta4))};
    Eigen::Vector4d score;
    *ok = true;
    for (int i = 0; i < 4; ++i) {
        AuxGarchParams bp = beta_hat, bm = beta_hat;
        double* fields_p[4] = {&bp.beta1, &bp.beta2, &bp.beta3, &bp.beta4};
        double* fields_m[4] = {&bm.beta1, &bm.beta2, &bm.beta3, &bm.beta4};
        *fields_p[i] += steps[i];
        *fields_m[i] -= steps[i];
        double lp, lm;
        try {
            lp = garch_loglik(bp, z);
            lm = garch_loglik(bm, z);
        } catch (const std::invalid_argument&) {
            // stencil point left the valid parameter box
            *ok = false;
            return Eigen::Vector4d::Zero();
        }
        if (!std::isfinite(lp) || !std::isfinite(lm)) {
            *ok = false;
            return Eigen::Vector4d::Zero();
        }
        score[i] = (lp - lm) / (2.0 * steps[i]);
    }
    return score;
}

}  // namespace

SummaryVector garch_score_summary(const Dataset& z, const AuxGarchParams& beta_hat) {
    beta_hat.validate();
    bool ok = true;
    const Eigen::Vector4d score = raw_score(beta_hat, z, &ok);
    if (!ok) throw std::runtime_error("garch_score_summary: non-finite log-likelihood at a stencil point");
    return {score / static_cast<double>(z.size()),
            {"score_b1", "score_b2", "score_b3", "score_b4"}};
}

Dataset simulate_garch_aux(const AuxGarchParams& beta, Eigen::Index n, RandomStream& rng) {
    beta.validate();
    const Eigen::Index burn = 500;
    Dataset r(n);
    double x = beta.beta1 / (1.0 - beta.beta2 - beta.beta3);
    double abs_eps_prev = 1.0;
    for (Eigen::Index t = 0; t < burn + n; ++t) {
        if (t > 0) x = beta.beta1 + beta.beta2 * x * abs_eps_prev + beta.beta3 * x;
        const double eps = sample_standardized_t(beta.beta4, rng);
        if (t >= burn) r[t - burn] = x * eps;
        abs_eps_prev = std::abs(eps);
    }
    return r;
}

}  // namespace rabc
