// Acceptance suite: one pass/fail line per criterion, nonzero exit status on
// any failure. Runs the desk-scale replication studies end to end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "rabc/bsl.hpp"
#include "rabc/diagnostics.hpp"
#include "rabc/experiment.hpp"
#include "rabc/parallel.hpp"

using namespace rabc;
using nlohmann::json;

namespace {

int failures = 0;
std::vector<std::string> notes;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

struct Study {
    std::vector<McMetrics> metrics;                       // per theta coordinate
    std::vector<std::map<std::string, double>> pvalues;   // per replication
    std::vector<Eigen::MatrixXd> draws;                   // per replication
    std::vector<std::string> labels;
    bool all_ok = false;
};

Study run_study(json doc, const std::string& algorithm) {
    doc["algorithm"] = algorithm;
    ExperimentConfig cfg = parse_config(doc);
    cfg.workers = default_workers();
    const RunReport report = run_experiment(cfg);

    Study study;
    study.all_ok = report.all_ok;
    study.labels = report.labels;
    for (const auto& rep : report.replications) {
        if (!rep.ok) continue;
        study.draws.push_back(rep.draws);
        study.pvalues.push_back(rep.gamma_pvalues);
    }
    if (cfg.pseudo_true && study.draws.size() >= 2) {
        std::vector<Eigen::MatrixXd> theta_only;
        for (const auto& m : study.draws) theta_only.push_back(m.leftCols(cfg.pseudo_true->size()));
        study.metrics = mc_metrics(theta_only, *cfg.pseudo_true, 0.95);
    }
    return study;
}

double rejection_rate(const Study& study, const std::string& gamma, double level = 0.05) {
    std::size_t rejected = 0;
    for (const auto& pv : study.pvalues)
        if (pv.at(gamma) <= level) ++rejected;
    return static_cast<double>(rejected) / static_cast<double>(study.pvalues.size());
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

void criterion_1_gk_pseudo_true() {
    const MixtureParams mix{0.6, 1.0, 7.0, 2.0, 2.0};
    const GkParams star = gk_pseudo_true(mix);
    const double expected[4] = {2.3663, 4.1757, 1.7850, 0.1001};
    const double got[4] = {star.a, star.b, star.g, star.k};
    bool ok = true;
    for (int i = 0; i < 4; ++i)
        if (std::abs(got[i] - expected[i]) > 1e-3) ok = false;
    report(1, ok,
           fmt("gk pseudo-true = (%.4f, %.4f, %.4f, %.4f), paper value (2.3663, 4.1757, "
               "1.7850, 0.1001), tolerance 1e-3 per coordinate",
               got[0], got[1], got[2], got[3]));
    if (!ok) {
        const Eigen::Vector4d b0 = mixture_population_summary(mix);
        const double obj_found = (gk_population_summary(star) - b0).norm();
        const double obj_paper =
            (gk_population_summary({expected[0], expected[1], expected[2], expected[3]}) - b0)
                .norm();
        std::printf("     note: returned minimizer has objective %.6f, the paper's value scores "
                    "%.6f under the same documented objective (population robust-summary "
                    "distance, box [0,10]^4); the paper's point is not its minimizer\n",
                    obj_found, obj_paper);
    }
}

void criterion_2_normal_toy() {
    json doc = preset_config("normal-toy");
    const Study spike = run_study(doc, "rabc-spike-slab");
    const Study laplace = run_study(doc, "rabc-laplace");
    const Study reg = run_study(doc, "abc-smc-reg");

    bool ok = spike.all_ok && laplace.all_ok && reg.all_ok;
    std::string detail = "normal toy (n=100, 50 reps, sigma=2):";
    for (const auto* study : {&spike, &laplace}) {
        const auto& m = study->metrics.at(0);
        ok = ok && m.coverage_pct >= 85.0 && std::abs(m.bias) <= 0.05 &&
             m.avg_posterior_std >= 0.13 && m.avg_posterior_std <= 0.29;
        detail += fmt(" [%s cov=%.0f%% bias=%.3f std=%.3f]",
                      study == &spike ? "spike-slab" : "laplace", m.coverage_pct, m.bias,
                      m.avg_posterior_std);
    }
    const auto& mr = reg.metrics.at(0);
    ok = ok && mr.coverage_pct <= 70.0;
    detail += fmt(" [smc-reg cov=%.0f%% (need <=70%%)]", mr.coverage_pct);
    report(2, ok, detail);
}

void criterion_3_ma2() {
    json doc = preset_config("ma2");
    doc["params"]["N"] = 500;
    const Study study = run_study(doc, "rabc-spike-slab");

    bool ok = study.all_ok;
    std::string detail = "MA(2) on SV data (n=1000, 20 reps, spike-slab):";
    for (int j = 0; j < 2; ++j) {
        const auto& m = study.metrics.at(static_cast<std::size_t>(j));
        ok = ok && std::abs(m.bias) <= 0.05 && m.coverage_pct >= 90.0;
        detail += fmt(" [theta%d cov=%.0f%% bias=%.3f]", j + 1, m.coverage_pct, m.bias);
    }
    const double r1 = rejection_rate(study, "gamma1");
    const double r2 = rejection_rate(study, "gamma2");
    ok = ok && r1 >= 0.80 && r2 <= 0.40;
    detail += fmt(" [reject gamma1 %.0f%% (need >=80%%), gamma2 %.0f%% (need <=40%%)]",
                  100.0 * r1, 100.0 * r2);
    report(3, ok, detail);
}

void criterion_4_gk_misspecified() {
    json doc = preset_config("gnk");
    doc["params"]["N"] = 300;
    doc["params"]["N1"] = 15000;
    const Study study = run_study(doc, "rabc-laplace");

    bool ok = study.all_ok;
    const double k_star = 0.1001;
    std::size_t k_covered = 0;
    for (const auto& m : study.draws) {
        const Eigen::VectorXd k_col = m.col(3);
        const double mean = k_col.mean();
        const double sd = std::sqrt((k_col.array() - mean).square().sum() /
                                    static_cast<double>(k_col.size() - 1));
        if (std::abs(mean - k_star) <= 3.0 * sd) ++k_covered;
    }
    ok = ok && k_covered == study.draws.size();
    // gamma1 <-> S1, gamma2 <-> S2, gamma3 <-> S4
    const double rs1 = rejection_rate(study, "gamma1");
    const double rs2 = rejection_rate(study, "gamma2");
    const double rs4 = rejection_rate(study, "gamma3");
    ok = ok && rs4 == 1.0 && rs1 <= 0.5 && rs2 <= 0.5;
    report(4, ok,
           fmt("g-and-k on mixture data (n=2000, 10 reps, laplace): k within 3 sd in %zu/%zu "
               "reps; reject S4 %.0f%% (need 100%%), S1 %.0f%%, S2 %.0f%% (need <=50%%)",
               k_covered, study.draws.size(), 100.0 * rs4, 100.0 * rs1, 100.0 * rs2));
}

void criterion_5_rbsl_v_ma2() {
    json doc = preset_config("ma2");
    const Study study = run_study(doc, "rbsl-v");

    bool ok = study.all_ok;
    std::string detail = "R-BSL-V on the MA(2) design (n=1000, 20 reps):";
    for (int j = 0; j < 2; ++j) {
        const auto& m = study.metrics.at(static_cast<std::size_t>(j));
        ok = ok && std::abs(m.bias) <= 0.05 && m.coverage_pct >= 90.0;
        detail += fmt(" [theta%d cov=%.0f%% bias=%.3f std=%.3f]", j + 1, m.coverage_pct, m.bias,
                      m.avg_posterior_std);
    }
    report(5, ok, detail);
}

void criterion_6_empirical_pipeline() {
    // A user-supplied returns CSV stands in for the proprietary series: we
    // manufacture one from the stable-SV model at a known parameter, then run
    // the whole GARCH-score pipeline on the file.
    const auto dir = std::filesystem::temp_directory_path() / "rabc_acceptance";
    std::filesystem::create_directories(dir);
    const auto csv_path = dir / "returns.csv";
    const StableSvParams truth{0.90, 0.30, 1.50};
    {
        RandomStream rng(7151);
        const Dataset r = simulate_stable_sv(truth, 1200, rng);
        std::ofstream out(csv_path);
        out << "date,ret\n";
        for (Eigen::Index i = 0; i < r.size(); ++i) out << i << "," << r[i] << "\n";
    }

    const Dataset y = ingest_returns_csv(csv_path.string(), "ret");
    const AuxGarchParams beta_hat = fit_garch_aux(y);
    const double score_norm = garch_score_summary(y, beta_hat).values.norm();
    const bool score_ok = score_norm < 1e-7;

    json doc = preset_config("stable-sv");
    doc["data"] = {{"source", "csv"}, {"path", csv_path.string()}, {"column", "ret"}};
    doc.erase("pseudo_true");
    ExperimentConfig cfg = parse_config(doc);
    cfg.workers = default_workers();
    const RunReport run = run_experiment(cfg);

    bool covered = run.all_ok;
    std::string coverage_detail;
    if (run.all_ok) {
        const Eigen::MatrixXd& draws = run.replications.front().draws;
        const double truths[3] = {truth.theta2, truth.theta3, truth.theta4};
        for (int j = 0; j < 3; ++j) {
            std::vector<double> col(static_cast<std::size_t>(draws.rows()));
            for (Eigen::Index i = 0; i < draws.rows(); ++i)
                col[static_cast<std::size_t>(i)] = draws(i, j);
            std::sort(col.begin(), col.end());
            const double lo = quantile_sorted(col, 0.025);
            const double hi = quantile_sorted(col, 0.975);
            if (!(truths[j] >= lo && truths[j] <= hi)) covered = false;
            coverage_detail += fmt(" theta%d in [%.3f,%.3f] (true %.2f)", j + 2, lo, hi, truths[j]);
        }
    }
    report(6, score_ok && covered,
           fmt("empirical pipeline: observed score norm %.2e (need <1e-7); synthetic "
               "self-consistency 95%% intervals cover the generating parameters:%s",
               score_norm, coverage_detail.c_str()));
}

// --- criterion 7: property suites ---

bool prop_threshold_monotonicity() {
    const Eigen::Index n = 50;
    const JointPrior prior({PriorSpec::gaussian(0.0, 9.0)});
    Simulator sim = [n](const Eigen::VectorXd& t, RandomStream& rng) {
        return simulate_normal_location(t[0], 1.0, n, rng);
    };
    SummaryMap smap = [](const Dataset& z) { return mean_variance_summary(z); };
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream data_rng(300 + seed);
        const Dataset y = simulate_normal_location(0.5, 1.0, n, data_rng);
        SmcConfig cfg;
        cfg.N = 100;
        SmcTrace trace;
        RandomStream rng(400 + seed);
        (void)smc_abc(prior, sim, smap, smap(y), cfg, rng, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i)
            if (trace[i].epsilon > trace[i - 1].epsilon) return false;
    }
    return true;
}

bool prop_joint_condition() {
    const Eigen::Index n = 100;
    const JointPrior prior({PriorSpec::gaussian(0.0, 25.0)});
    Simulator sim = [n](const Eigen::VectorXd& t, RandomStream& rng) {
        return simulate_normal_location(t[0], 1.0, n, rng);
    };
    SummaryMap smap = [](const Dataset& z) { return mean_variance_summary(z); };
    Partition part;
    part.psi = {0};
    part.phi = {1};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RandomStream data_rng(500 + seed);
        const Dataset y = simulate_normal_location(1.0, 2.0, n, data_rng);
        RabcOptions options;
        options.gamma_prior = seed % 2 ? GammaPriorKind::Laplace : GammaPriorKind::SpikeSlab;
        options.N1 = 4000;
        options.smc.N = 200;
        options.smc.workers = 2;
        RandomStream rng(600 + seed);
        const RabcResult result = run_rabc(prior, sim, smap, part, smap(y), options, rng);
        for (Eigen::Index i = 0; i < result.d1.size(); ++i) {
            if (result.d1[i] > result.eps1) return false;
            if (result.d2[i] > result.eps2_final) return false;
        }
    }
    return true;
}

bool prop_regression_brute_force() {
    RandomStream rng(700);
    for (int instance = 0; instance < 100; ++instance) {
        const int n = 8 + static_cast<int>(rng.uniform_index(43));
        const int d_eta = 1 + static_cast<int>(rng.uniform_index(4));
        ParticleSet set;
        set.epsilon = 2.0;
        for (int i = 0; i < n; ++i) {
            Particle p;
            p.theta = Eigen::VectorXd::Constant(1, rng.normal(0.0, 2.0));
            p.summary.values = Eigen::VectorXd(d_eta);
            for (int j = 0; j < d_eta; ++j) p.summary.values[j] = rng.normal();
            p.d2 = rng.uniform(0.0, 1.9);
            set.particles.push_back(p);
        }
        Eigen::VectorXd y_vals(d_eta);
        for (int j = 0; j < d_eta; ++j) y_vals[j] = rng.normal();

        const int q = d_eta + 1;
        std::vector<std::vector<double>> gram(q, std::vector<double>(q, 0.0));
        std::vector<double> rhs(q, 0.0);
        for (const auto& p : set.particles) {
            const double w = epanechnikov_weight(p.d2, set.epsilon);
            std::vector<double> row(q, 1.0);
            for (int j = 0; j < d_eta; ++j) row[static_cast<std::size_t>(j) + 1] = p.summary.values[j];
            for (int a = 0; a < q; ++a) {
                for (int b = 0; b < q; ++b)
                    gram[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                        w * row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
                rhs[static_cast<std::size_t>(a)] += w * row[static_cast<std::size_t>(a)] * p.theta[0];
            }
        }
        for (int a = 0; a < q; ++a)
            gram[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] += 1e-10;
        const std::vector<double> coef = oracles::solve_dense(gram, rhs);

        const auto adjusted = regression_adjust(set, SummaryVector{y_vals, {}});
        for (std::size_t i = 0; i < set.particles.size(); ++i) {
            double fitted = 0.0, shift = 0.0;
            for (int j = 0; j < d_eta; ++j) {
                fitted += coef[static_cast<std::size_t>(j) + 1] * set.particles[i].summary.values[j];
                shift += coef[static_cast<std::size_t>(j) + 1] * y_vals[j];
            }
            if (std::abs(adjusted.particles[i].theta[0] -
                         (shift + set.particles[i].theta[0] - fitted)) > 1e-8)
                return false;
        }
    }
    return true;
}

bool prop_spike_slab_oracle() {
    const double noise_sd = 0.01, y0 = 0.02, p = 0.5, lambda = 0.125;
    Simulator sim = [noise_sd](const Eigen::VectorXd&, RandomStream& rng) {
        return Dataset(Eigen::VectorXd::Constant(1, rng.normal(0.0, noise_sd)));
    };
    SummaryMap smap = [](const Dataset& z) {
        return SummaryVector{Eigen::Vector2d{0.0, z[0]}, {}};
    };
    const SummaryVector y_summary{Eigen::Vector2d{0.0, y0}, {}};
    const JointPrior theta_prior({PriorSpec::uniform(0.0, 1.0)});
    Partition part;
    part.psi = {0};
    part.phi = {1};
    ParticleSet step1;
    RandomStream init_rng(800);
    for (int i = 0; i < 100; ++i) {
        Particle particle;
        particle.theta = Eigen::VectorXd::Constant(1, init_rng.uniform());
        particle.d1 = 0.0;
        step1.particles.push_back(particle);
    }
    SmcConfig cfg;
    cfg.N = 2000;
    cfg.p_acc_min = 0.02;
    cfg.workers = 2;
    RandomStream rng(801);
    const ParticleSet set = rabc_smc_spike_slab(step1, 1.0, p, lambda, theta_prior, sim, smap,
                                                part, y_summary, cfg, rng);
    std::size_t zeros = 0;
    for (const auto& particle : set.particles)
        if (particle.gamma[0] == 0.0) ++zeros;
    const double chain_frac = static_cast<double>(zeros) / static_cast<double>(set.size());

    RandomStream oracle_rng(802);
    std::size_t acc = 0, acc_zero = 0;
    for (int i = 0; i < 2000000; ++i) {
        const double gamma = oracle_rng.uniform() < p ? 0.0 : oracle_rng.laplace(0.0, lambda);
        const double xi = oracle_rng.normal(0.0, noise_sd);
        if (std::abs(xi + gamma - y0) <= set.epsilon) {
            ++acc;
            if (gamma == 0.0) ++acc_zero;
        }
    }
    if (acc < 1000) return false;
    const double oracle_frac = static_cast<double>(acc_zero) / static_cast<double>(acc);
    const double ess = static_cast<double>(set.size()) / 10.0;
    const double se = std::sqrt(oracle_frac * (1.0 - oracle_frac) *
                                (1.0 / ess + 1.0 / static_cast<double>(acc)));
    notes.push_back(fmt("spike-slab zero fraction: chain %.3f vs oracle %.3f (3se=%.3f)",
                        chain_frac, oracle_frac, 3.0 * se));
    return std::abs(chain_frac - oracle_frac) < 3.0 * se;
}

bool prop_alpha_stable_variance() {
    RandomStream rng(900);
    double s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_alpha_stable(2.0, 0.0, rng);
        s2 += x * x;
    }
    return std::abs(s2 / n - 2.0) < 0.1;
}

bool prop_randomization_size() {
    auto sampler = [](RandomStream& r) { return r.normal(); };
    int rejections = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        RandomStream rng(2000 + static_cast<std::uint64_t>(t));
        Eigen::VectorXd post(200);
        for (int i = 0; i < 200; ++i) post[i] = rng.normal();
        if (randomization_location_test(post, sampler, 0, 199, rng) <= 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    notes.push_back(fmt("randomization size at 5%% level: %.3f", rate));
    return rate >= 0.03 && rate <= 0.07;
}

bool prop_rbsl_gamma_zero_exact() {
    RandomStream rng(950);
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(3));
        SyntheticMoments mom;
        mom.mean = Eigen::VectorXd(d);
        for (int i = 0; i < d; ++i) mom.mean[i] = rng.normal();
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
        mom.cov = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
        mom.m = 50;
        Eigen::VectorXd yv(d);
        for (int i = 0; i < d; ++i) yv[i] = rng.normal();
        const SummaryVector y{yv, {}};
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
        const double plain = rbsl_loglik(y, mom, {}, BslVariant::Plain);
        if (rbsl_loglik(y, mom, zero, BslVariant::MeanAdjust) != plain) return false;
        if (rbsl_loglik(y, mom, zero, BslVariant::VarianceAdjust) != plain) return false;
    }
    return true;
}

bool prop_bit_identical_reruns() {
    json doc = preset_config("normal-toy");
    doc["replications"] = 3;
    doc["params"]["N1"] = 2000;
    doc["params"]["N"] = 100;
    doc["params"]["predictive_draws"] = 0;

    auto run_with = [&](int workers) {
        ExperimentConfig cfg = parse_config(doc);
        cfg.workers = workers;
        return run_experiment(cfg);
    };
    const RunReport a = run_with(1);
    const RunReport b = run_with(2);
    if (a.replications.size() != b.replications.size()) return false;
    for (std::size_t r = 0; r < a.replications.size(); ++r) {
        const auto& da = a.replications[r].draws;
        const auto& db = b.replications[r].draws;
        if (da.rows() != db.rows() || da.cols() != db.cols()) return false;
        for (Eigen::Index i = 0; i < da.rows(); ++i)
            for (Eigen::Index j = 0; j < da.cols(); ++j)
                if (da(i, j) != db(i, j)) return false;
    }
    return true;
}

void criterion_7_property_suites() {
    struct Prop {
        const char* name;
        bool (*fn)();
    };
    const Prop props[] = {
        {"smc threshold monotonicity (20 seeds)", prop_threshold_monotonicity},
        {"joint selection condition on every R-ABC particle", prop_joint_condition},
        {"regression adjustment vs brute-force normal equations", prop_regression_brute_force},
        {"spike-slab atom fraction vs rejection oracle", prop_spike_slab_oracle},
        {"alpha-stable variance at alpha=2", prop_alpha_stable_variance},
        {"randomization test size under H0", prop_randomization_size},
        {"rbsl gamma=0 equivalence is exact", prop_rbsl_gamma_zero_exact},
        {"bit-identical reruns across worker counts", prop_bit_identical_reruns},
    };
    bool all = true;
    std::string detail = "property suites:";
    for (const auto& prop : props) {
        const bool ok = prop.fn();
        all = all && ok;
        detail += fmt(" [%s: %s]", prop.name, ok ? "ok" : "FAILED");
    }
    report(7, all, detail);
}

}  // namespace

int main() {
    criterion_1_gk_pseudo_true();
    criterion_2_normal_toy();
    criterion_3_ma2();
    criterion_4_gk_misspecified();
    criterion_5_rbsl_v_ma2();
    criterion_6_empirical_pipeline();
    criterion_7_property_suites();
    for (const auto& note : notes) std::printf("     note: %s\n", note.c_str());
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
