#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rabc/distributions.hpp"
#include "rabc/models.hpp"
#include "rabc/summaries.hpp"

using namespace rabc;

namespace {
Dataset make(std::initializer_list<double> v) {
    Dataset d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d[i++] = x;
    return d;
}
}  // namespace

TEST_CASE("mean and variance summary") {
    CHECK(mean_variance_summary(make({3, 3, 3, 3})).values.isApprox(Eigen::Vector2d{3, 0}));
    CHECK(mean_variance_summary(make({0, 2})).values.isApprox(Eigen::Vector2d{1, 2}));
    CHECK(mean_variance_summary(make({1, 2, 3})).values.isApprox(Eigen::Vector2d{2, 1}));
    CHECK_THROWS_AS(mean_variance_summary(make({1})), std::domain_error);
}

TEST_CASE("uncentered autocovariance summary") {
    CHECK(autocovariance_summary(make({0, 0, 0, 0})).values.isApprox(Eigen::Vector3d{0, 0, 0}));
    CHECK(autocovariance_summary(make({1, 1, 1, 1}))
              .values.isApprox(Eigen::Vector3d{1.0, 0.75, 0.5}));
    CHECK(autocovariance_summary(make({1, -1, 1, -1}))
              .values.isApprox(Eigen::Vector3d{1.0, -0.75, 0.5}));
    CHECK_THROWS_AS(autocovariance_summary(make({1, 2})), std::domain_error);

    // lag-0 entry is exactly the uncentered second moment
    RandomStream rng(1);
    Dataset z(100);
    for (auto& x : z) x = rng.normal(2.0, 3.0);
    CHECK(autocovariance_summary(z).values[0] ==
          doctest::Approx(z.squaredNorm() / 100.0).epsilon(1e-14));
}

TEST_CASE("robust g-and-k summary") {
    SUBCASE("symmetric sample") {
        const auto s = robust_gk_summary(make({1, 2, 3, 4, -1, -2, -3, -4}));
        CHECK(s.values[0] == 0.0);
        CHECK(s.values[2] == 0.0);
    }
    SUBCASE("affine equivariance") {
        RandomStream rng(2);
        Dataset z(501);
        for (auto& x : z) x = rng.laplace(0.3, 1.7);
        const auto base = robust_gk_summary(z);
        const double c = 2.5, d = -4.0;
        const auto mapped = robust_gk_summary((c * z.array() + d).matrix());
        CHECK(mapped.values[0] == doctest::Approx(c * base.values[0] + d).epsilon(1e-12));
        CHECK(mapped.values[1] == doctest::Approx(c * base.values[1]).epsilon(1e-12));
        CHECK(mapped.values[2] == doctest::Approx(base.values[2]).epsilon(1e-9));
        CHECK(mapped.values[3] == doctest::Approx(base.values[3]).epsilon(1e-9));
    }
    SUBCASE("S4 of a standard normal sample matches the quantile oracle") {
        // population value from the oracle quantile identity
        const double pop =
            (oracles::normal_quantile_bisect(7.0 / 8.0) - oracles::normal_quantile_bisect(5.0 / 8.0) +
             oracles::normal_quantile_bisect(3.0 / 8.0) - oracles::normal_quantile_bisect(1.0 / 8.0)) /
            (2.0 * oracles::normal_quantile_bisect(0.75));
        CHECK(pop == doctest::Approx(1.23310).epsilon(1e-5));
        RandomStream rng(3);
        Dataset z(1000000);
        for (auto& x : z) x = rng.normal();
        CHECK(robust_gk_summary(z).values[3] == doctest::Approx(pop).epsilon(0.02 / pop));
    }
    SUBCASE("degenerate data") {
        CHECK_THROWS_AS(robust_gk_summary(make({5, 5, 5, 5, 5, 5, 5, 5})), std::runtime_error);
        CHECK_THROWS_AS(robust_gk_summary(make({1, 2, 3})), std::domain_error);
    }
}

TEST_CASE("partition mechanics") {
    SummaryVector eta{Eigen::Vector4d{10, 20, 30, 40}, {"S1", "S2", "S3", "S4"}};
    Partition part;
    part.psi = {2};
    part.phi = {0, 1, 3};
    const auto [psi, phi] = apply_partition(eta, part);
    CHECK(psi.values.size() == 1);
    CHECK(psi.values[0] == 30);
    CHECK(psi.labels[0] == "S3");
    CHECK(phi.values.isApprox(Eigen::Vector3d{10, 20, 40}));

    // re-interleaving reconstructs the original
    Eigen::Vector4d rebuilt;
    for (std::size_t k = 0; k < part.psi.size(); ++k)
        rebuilt[part.psi[k]] = psi.values[static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < part.phi.size(); ++k)
        rebuilt[part.phi[k]] = phi.values[static_cast<Eigen::Index>(k)];
    CHECK(rebuilt.isApprox(eta.values));

    Partition bad;
    bad.psi = {0, 5};
    bad.phi = {1, 2, 3};
    CHECK_THROWS_AS(apply_partition(eta, bad), std::invalid_argument);
    Partition empty_psi;
    empty_psi.phi = {0, 1, 2, 3};
    CHECK_THROWS_AS(apply_partition(eta, empty_psi), std::invalid_argument);
}

TEST_CASE("garch log-likelihood") {
    RandomStream rng(4);
    Dataset r(400);
    for (auto& x : r) x = 0.01 * rng.normal();

    SUBCASE("degenerate recursion equals iid scaled-t") {
        const AuxGarchParams beta{0.02, 0.0, 0.0, 6.0};
        // independent hand computation of the iid scaled-t log-likelihood;
        // x_t = beta1 for t >= 2, while t = 1 uses the documented
        // initialization x_1 = mean |r|
        const double nu = 6.0;
        const double lognorm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                               0.5 * std::log(M_PI * (nu - 2.0));
        const double x1 = r.array().abs().mean();
        double expected = 0.0;
        for (Eigen::Index t = 0; t < r.size(); ++t) {
            const double scale = t == 0 ? x1 : 0.02;
            const double e = r[t] / scale;
            expected += lognorm - 0.5 * (nu + 1.0) * std::log(1.0 + e * e / (nu - 2.0)) -
                        std::log(scale);
        }
        CHECK(garch_loglik(beta, r) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("scale-family Jacobian") {
        const AuxGarchParams beta{0.02, 0.1, 0.8, 6.0};
        const AuxGarchParams beta2{0.04, 0.1, 0.8, 6.0};
        const double l1 = garch_loglik(beta, r);
        const double l2 = garch_loglik(beta2, (2.0 * r.array()).matrix());
        CHECK(l2 == doctest::Approx(l1 - 400.0 * std::log(2.0)).epsilon(1e-10));
    }
    SUBCASE("heavy tail absorbs an outlier") {
        Dataset ro = r;
        ro[100] = 50.0;
        CHECK(std::isfinite(garch_loglik({0.02, 0.1, 0.8, 3.0}, ro)));
    }
    CHECK_THROWS_AS(garch_loglik({0.0, 0.1, 0.8, 6.0}, r), std::invalid_argument);
    CHECK_THROWS_AS(garch_loglik({0.02, 0.5, 0.6, 6.0}, r), std::invalid_argument);
}

TEST_CASE("garch fit recovers its own parameters" * doctest::timeout(900)) {
    const AuxGarchParams truth{0.05, 0.10, 0.85, 8.0};
    RandomStream rng(5);
    const Dataset y = simulate_garch_aux(truth, 100000, rng);
    const AuxGarchParams fit = fit_garch_aux(y);

    // asymptotic standard errors from a finite-difference observed
    // information matrix (test-local oracle)
    const double h = 1e-4;
    double base[4] = {fit.beta1, fit.beta2, fit.beta3, fit.beta4};
    auto ll = [&](const double* b) {
        return garch_loglik({b[0], b[1], b[2], b[3]}, y);
    };
    std::vector<std::vector<double>> hess(4, std::vector<double>(4));
    const double f0 = ll(base);
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            double bpp[4], bpm[4], bmp[4], bmm[4];
            for (int k = 0; k < 4; ++k) bpp[k] = bpm[k] = bmp[k] = bmm[k] = base[k];
            const double hi = h * std::max(1.0, std::abs(base[i]));
            const double hj = h * std::max(1.0, std::abs(base[j]));
            bpp[i] += hi; bpp[j] += hj;
            bpm[i] += hi; bpm[j] -= hj;
            bmp[i] -= hi; bmp[j] += hj;
            bmm[i] -= hi; bmm[j] -= hj;
            if (i == j) {
                double bp[4], bm[4];
                for (int k = 0; k < 4; ++k) { bp[k] = bm[k] = base[k]; }
                bp[i] += hi; bm[i] -= hi;
                hess[i][i] = (ll(bp) - 2.0 * f0 + ll(bm)) / (hi * hi);
            } else {
                hess[i][j] = hess[j][i] =
                    (ll(bpp) - ll(bpm) - ll(bmp) + ll(bmm)) / (4.0 * hi * hj);
            }
        }
    }
    // invert -H by solving against unit vectors
    double truths[4] = {truth.beta1, truth.beta2, truth.beta3, truth.beta4};
    for (int i = 0; i < 4; ++i) {
        std::vector<std::vector<double>> neg(4, std::vector<double>(4));
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) neg[a][b] = -hess[a][b];
        std::vector<double> e(4, 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        const double var_i = oracles::solve_dense(neg, e)[static_cast<std::size_t>(i)];
        REQUIRE(var_i > 0.0);
        const double se = std::sqrt(var_i);
        CHECK(std::abs(base[i] - truths[i]) < 3.0 * se);
    }
}

TEST_CASE("garch fit maximizer properties") {
    RandomStream rng(6);
    const Dataset y = simulate_garch_aux({0.05, 0.10, 0.85, 8.0}, 3000, rng);
    const AuxGarchParams fit = fit_garch_aux(y);
    const double at_fit = garch_loglik(fit, y);

    RandomStream box(7);
    for (int i = 0; i < 100; ++i) {
        const double s = box.uniform(0.01, 0.98);
        const double ratio = box.uniform(0.01, 0.99);
        const AuxGarchParams cand{box.uniform(1e-4, 0.5), s * ratio, s * (1.0 - ratio),
                                  box.uniform(2.1, 60.0)};
        CHECK(garch_loglik(cand, y) <= at_fit);
    }

    const AuxGarchParams fit2 = fit_garch_aux(y);
    CHECK(fit.beta1 == doctest::Approx(fit2.beta1).epsilon(1e-6));
    CHECK(fit.beta2 == doctest::Approx(fit2.beta2).epsilon(1e-6));
    CHECK(fit.beta3 == doctest::Approx(fit2.beta3).epsilon(1e-6));
    CHECK(fit.beta4 == doctest::Approx(fit2.beta4).epsilon(1e-6));

    CHECK_THROWS_AS(fit_garch_aux(make({1, 2, 3})), std::domain_error);
}

TEST_CASE("garch score summary") {
    RandomStream rng(8);
    const Dataset y = simulate_garch_aux({0.05, 0.10, 0.85, 8.0}, 5000, rng);
    const AuxGarchParams beta_hat = fit_garch_aux(y);

    SUBCASE("score at the maximizer is numerically zero") {
        const auto score = garch_score_summary(y, beta_hat);
        CHECK(score.values.norm() < 1e-7);
    }
    SUBCASE("Richardson consistency in the step size") {
        RandomStream zr(9);
        const Dataset z = simulate_garch_aux(beta_hat, 5000, zr);
        const auto coarse = garch_score_summary(z, beta_hat).values;
        // same central difference with h/2, computed locally
        Eigen::Vector4d fine;
        const double b[4] = {beta_hat.beta1, beta_hat.beta2, beta_hat.beta3, beta_hat.beta4};
        for (int i = 0; i < 4; ++i) {
            const double h = 0.5e-4 * std::max(1.0, std::abs(b[i]));
            double bp[4], bm[4];
            for (int k = 0; k < 4; ++k) { bp[k] = bm[k] = b[k]; }
            bp[i] += h;
            bm[i] -= h;
            fine[i] = (garch_loglik({bp[0], bp[1], bp[2], bp[3]}, z) -
                       garch_loglik({bm[0], bm[1], bm[2], bm[3]}, z)) /
                      (2.0 * h) / 5000.0;
        }
        CHECK((coarse - fine).norm() / fine.norm() < 1e-4);
    }
    SUBCASE("mean score over fresh simulations is zero within 3 SE") {
        Eigen::Vector4d sum = Eigen::Vector4d::Zero();
        Eigen::Vector4d sum2 = Eigen::Vector4d::Zero();
        const int reps = 200;
        for (int r = 0; r < reps; ++r) {
            RandomStream zr(1000 + static_cast<std::uint64_t>(r));
            const Dataset z = simulate_garch_aux(beta_hat, 2000, zr);
            const Eigen::Vector4d s = garch_score_summary(z, beta_hat).values;
            sum += s;
            sum2 += s.cwiseProduct(s);
        }
        for (int i = 0; i < 4; ++i) {
            const double mean = sum[i] / reps;
            const double var = (sum2[i] - reps * mean * mean) / (reps - 1);
            CHECK(std::abs(mean) < 3.0 * std::sqrt(var / reps));
        }
    }
}
