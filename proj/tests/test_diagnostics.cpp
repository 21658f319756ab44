#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rabc/diagnostics.hpp"
#include "rabc/models.hpp"

using namespace rabc;

TEST_CASE("randomization location test basics") {
    auto normal_sampler = [](RandomStream& r) { return r.normal(); };

    SUBCASE("identical samples give p-value one") {
        // posterior identical to the realized prior sample: statistic is 0,
        // every permutation ties or beats it
        RandomStream rng(1);
        Eigen::VectorXd post(100);
        std::vector<double> vals;
        for (int i = 0; i < 100; ++i) vals.push_back(rng.normal());
        for (int i = 0; i < 100; ++i) post[i] = vals[static_cast<std::size_t>(i)];
        // a prior sampler that replays exactly those values
        std::size_t k = 0;
        auto replay = [&](RandomStream&) { return vals[k++ % vals.size()]; };
        RandomStream test_rng(2);
        CHECK(randomization_location_test(post, replay, 0, 499, test_rng) == 1.0);
    }
    SUBCASE("a large shift is detected") {
        RandomStream rng(3);
        Eigen::VectorXd post(200);
        for (int i = 0; i < 200; ++i) post[i] = rng.normal() + 5.0;
        RandomStream test_rng(4);
        CHECK(randomization_location_test(post, normal_sampler, 0, 4999, test_rng) < 0.001);
    }
    SUBCASE("size under the null is 5% within 2 points") {
        int rejections = 0;
        const int trials = 500;
        for (int t = 0; t < trials; ++t) {
            RandomStream rng(1000 + static_cast<std::uint64_t>(t));
            Eigen::VectorXd post(200);
            for (int i = 0; i < 200; ++i) post[i] = rng.normal();
            if (randomization_location_test(post, normal_sampler, 0, 199, rng) <= 0.05)
                ++rejections;
        }
        const double rate = static_cast<double>(rejections) / trials;
        CHECK(rate > 0.03);
        CHECK(rate < 0.07);
    }
    SUBCASE("exchangeability: reordering the posterior leaves p unchanged") {
        // The observed statistic is order-invariant, so the two runs estimate
        // the same permutation p-value; they agree to Monte Carlo accuracy.
        RandomStream rng(5);
        Eigen::VectorXd post(100);
        for (int i = 0; i < 100; ++i) post[i] = rng.normal(0.2, 1.0);
        Eigen::VectorXd reversed = post.reverse();
        RandomStream r1(6), r2(6);
        const std::size_t n_perm = 19999;
        const double p1 = randomization_location_test(post, normal_sampler, 0, n_perm, r1);
        const double p2 = randomization_location_test(reversed, normal_sampler, 0, n_perm, r2);
        const double se = std::sqrt(p1 * (1.0 - p1) / static_cast<double>(n_perm));
        CHECK(std::abs(p1 - p2) <= 3.0 * se + 1e-12);
    }
    SUBCASE("empty input") {
        RandomStream rng(7);
        CHECK_THROWS_AS(randomization_location_test(Eigen::VectorXd(), normal_sampler, 0, 99, rng),
                        std::domain_error);
    }
}

TEST_CASE("posterior predictive summary bands") {
    const Eigen::Index n = 200;
    Simulator normal_sim = [n](const Eigen::VectorXd& t, RandomStream& rng) {
        return simulate_normal_location(t[0], 1.0, n, rng);
    };
    SummaryMap mv = [](const Dataset& z) { return mean_variance_summary(z); };

    SUBCASE("well-specified model covers the observed mean") {
        RandomStream data_rng(8);
        const Dataset y = simulate_normal_location(1.0, 1.0, n, data_rng);
        Eigen::MatrixXd draws(200, 1);
        RandomStream post_rng(9);
        for (int i = 0; i < 200; ++i) draws(i, 0) = y.mean() + 0.1 * post_rng.normal();
        RandomStream rng(10);
        const auto check = posterior_predictive_summaries(draws, normal_sim, mv,
                                                          mean_variance_summary(y), 300, rng);
        CHECK(check.observed_inside[0]);
        CHECK(check.observed_inside[1]);
    }
    SUBCASE("bimodal data pushes the kurtosis summary outside the g-and-k band") {
        const Eigen::Index ng = 2000;
        RandomStream data_rng(11);
        const Dataset y = simulate_gaussian_mixture({0.6, 1.0, 7.0, 2.0, 2.0}, ng, data_rng);
        const SummaryVector y_summary = robust_gk_summary(y);
        // posterior stand-in concentrated near the pseudo-true value
        Eigen::MatrixXd draws(100, 4);
        RandomStream post_rng(12);
        for (int i = 0; i < 100; ++i) {
            draws(i, 0) = 2.3663 + 0.05 * post_rng.normal();
            draws(i, 1) = 4.1757 + 0.05 * post_rng.normal();
            draws(i, 2) = 1.7850 + 0.05 * post_rng.normal();
            draws(i, 3) = std::abs(0.10 + 0.05 * post_rng.normal());
        }
        Simulator gk_sim = [ng](const Eigen::VectorXd& t, RandomStream& rng) {
            return simulate_gk({t[0], t[1], t[2], t[3]}, ng, rng);
        };
        RandomStream rng(13);
        const auto check = posterior_predictive_summaries(
            draws, gk_sim, [](const Dataset& z) { return robust_gk_summary(z); }, y_summary, 300,
            rng);
        CHECK_FALSE(check.observed_inside[3]);  // S4 cannot be matched

        // widening the band never flips inside to outside
        RandomStream rng2(13);
        const auto wide = posterior_predictive_summaries(
            draws, gk_sim, [](const Dataset& z) { return robust_gk_summary(z); }, y_summary, 300,
            rng2, 0.001, 0.999);
        for (std::size_t j = 0; j < 4; ++j)
            if (check.observed_inside[j]) CHECK(wide.observed_inside[j]);
    }
}

TEST_CASE("prior-predictive partition probe on the g-and-k") {
    const Eigen::Index n = 1000;
    JointPrior prior({PriorSpec::uniform(0, 10), PriorSpec::uniform(0, 10),
                      PriorSpec::uniform(0, 10), PriorSpec::uniform(0, 10)});
    Simulator sim = [n](const Eigen::VectorXd& t, RandomStream& rng) {
        return simulate_gk({t[0], t[1], t[2], t[3]}, n, rng);
    };
    RandomStream rng(14);
    const auto rows = partition_probe(
        prior, sim, [](const Dataset& z) { return robust_gk_summary(z); }, 300, 20, rng, 2);
    REQUIRE(rows.size() == 300);

    std::vector<double> a, b, mean_s1, std_s1;
    for (const auto& row : rows) {
        a.push_back(row.theta[0]);
        b.push_back(row.theta[1]);
        mean_s1.push_back(row.summary_mean[0]);
        std_s1.push_back(row.summary_std[0]);
    }
    CHECK(oracles::correlation(a, mean_s1) >= 0.9);
    CHECK(oracles::correlation(b, std_s1) > 0.3);

    SUBCASE("a constant summary map probes to zero spread") {
        RandomStream rng2(15);
        const auto flat = partition_probe(
            prior, sim,
            [](const Dataset&) {
                return SummaryVector{Eigen::Vector2d{1.0, 2.0}, {}};
            },
            50, 5, rng2);
        for (const auto& row : flat) CHECK(row.summary_std.norm() == 0.0);
    }
}

TEST_CASE("monte carlo benchmark metrics") {
    SUBCASE("point masses at the truth") {
        std::vector<Eigen::MatrixXd> posts(5, Eigen::MatrixXd::Constant(100, 1, 2.5));
        const auto m = mc_metrics(posts, Eigen::VectorXd::Constant(1, 2.5), 0.95);
        CHECK(m[0].coverage_pct == 100.0);
        CHECK(m[0].bias == 0.0);
        CHECK(m[0].avg_posterior_std == 0.0);
    }
    SUBCASE("full-support intervals always cover") {
        RandomStream rng(16);
        std::vector<Eigen::MatrixXd> posts;
        for (int r = 0; r < 6; ++r) {
            Eigen::MatrixXd m(1000, 1);
            for (int i = 0; i < 1000; ++i) m(i, 0) = rng.uniform(-100.0, 100.0);
            posts.push_back(m);
        }
        const auto m = mc_metrics(posts, Eigen::VectorXd::Constant(1, 3.0), 0.95);
        CHECK(m[0].coverage_pct == 100.0);
    }
    SUBCASE("a ten-sigma shift destroys coverage") {
        RandomStream rng(17);
        std::vector<Eigen::MatrixXd> posts;
        for (int r = 0; r < 20; ++r) {
            Eigen::MatrixXd m(500, 1);
            for (int i = 0; i < 500; ++i) m(i, 0) = 10.0 + rng.normal();
            posts.push_back(m);
        }
        const auto m = mc_metrics(posts, Eigen::VectorXd::Zero(1), 0.95);
        CHECK(m[0].coverage_pct == 0.0);
        CHECK(m[0].bias == doctest::Approx(10.0).epsilon(0.05));
    }
    SUBCASE("coverage is invariant to replication order") {
        RandomStream rng(18);
        std::vector<Eigen::MatrixXd> posts;
        for (int r = 0; r < 10; ++r) {
            Eigen::MatrixXd m(200, 1);
            for (int i = 0; i < 200; ++i) m(i, 0) = rng.normal(0.0, 1.0 + r * 0.1);
            posts.push_back(m);
        }
        const auto m1 = mc_metrics(posts, Eigen::VectorXd::Zero(1), 0.95);
        std::reverse(posts.begin(), posts.end());
        const auto m2 = mc_metrics(posts, Eigen::VectorXd::Zero(1), 0.95);
        CHECK(m1[0].coverage_pct == m2[0].coverage_pct);
    }
}
