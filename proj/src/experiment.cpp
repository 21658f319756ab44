#include "rabc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "rabc/bsl.hpp"
#include "rabc/diagnostics.hpp"
#include "rabc/parallel.hpp"

namespace rabc {

namespace {

using nlohmann::json;

double dgp_param(const SyntheticDataSpec& spec, const std::string& key) {
    auto it = spec.dgp_params.find(key);
    if (it == spec.dgp_params.end())
        throw std::invalid_argument("data.dgp.params: missing '" + key + "' for dgp '" +
                                    spec.dgp_id + "'");
    return it->second;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
    return s.substr(start);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace

Dataset generate_data(const SyntheticDataSpec& spec, RandomStream& rng) {
    const Eigen::Index n = spec.n;
    if (spec.dgp_id == "normal")
        return simulate_normal_location(dgp_param(spec, "theta"), dgp_param(spec, "sigma"), n, rng);
    if (spec.dgp_id == "gaussian_mixture") {
        MixtureParams p{dgp_param(spec, "w"), dgp_param(spec, "mu1"), dgp_param(spec, "mu2"),
                        dgp_param(spec, "var1"), dgp_param(spec, "var2")};
        return simulate_gaussian_mixture(p, n, rng);
    }
    if (spec.dgp_id == "sv") {
        SvParams p{dgp_param(spec, "omega"), dgp_param(spec, "rho"), dgp_param(spec, "sigma_v")};
        return simulate_sv(p, n, rng);
    }
    if (spec.dgp_id == "ma2")
        return simulate_ma2(dgp_param(spec, "theta1"), dgp_param(spec, "theta2"), n, rng);
    if (spec.dgp_id == "gk") {
        GkParams p{dgp_param(spec, "a"), dgp_param(spec, "b"), dgp_param(spec, "g"),
                   dgp_param(spec, "k")};
        return simulate_gk(p, n, rng);
    }
    if (spec.dgp_id == "stable_sv") {
        StableSvParams p{dgp_param(spec, "theta2"), dgp_param(spec, "theta3"),
                         dgp_param(spec, "theta4")};
        return simulate_stable_sv(p, n, rng);
    }
    throw std::invalid_argument("data.dgp.id: unknown dgp '" + spec.dgp_id + "'");
}

Dataset ingest_returns_csv(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ingest_returns_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("ingest_returns_csv: '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) col = i;
    if (col == header.size()) {
        std::string available;
        for (std::size_t i = 0; i < header.size(); ++i)
            available += (i ? ", " : "") + header[i];
        throw std::invalid_argument("ingest_returns_csv: column '" + column +
                                    "' not found; available: " + available);
    }

    std::vector<double> values;
    std::size_t row = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (col >= cells.size() || cells[col].empty())
            throw std::invalid_argument("ingest_returns_csv: blank cell in column '" + column +
                                        "' at row " + std::to_string(row));
        const std::string& cell = cells[col];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw std::invalid_argument("ingest_returns_csv: non-numeric cell '" + cell +
                                        "' at row " + std::to_string(row));
        values.push_back(v);
    }
    if (values.size() < 3)
        throw std::invalid_argument("ingest_returns_csv: need at least 3 rows of data");
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ModelBundle build_model(const ExperimentConfig& cfg, Eigen::Index n) {
    ModelBundle bundle;
    bundle.prior = JointPrior(cfg.priors);

    if (cfg.model_id == "normal_location") {
        double sigma = 1.0;
        if (auto it = cfg.model_fixed.find("sigma"); it != cfg.model_fixed.end()) sigma = it->second;
        bundle.simulator = [sigma, n](const Eigen::VectorXd& theta, RandomStream& rng) {
            return simulate_normal_location(theta[0], sigma, n, rng);
        };
        bundle.theta_labels = {"theta"};
    } else if (cfg.model_id == "ma2") {
        bundle.prior.support = [](const Eigen::VectorXd& t) { return ma2_invertible(t[0], t[1]); };
        bundle.simulator = [n](const Eigen::VectorXd& theta, RandomStream& rng) {
            return simulate_ma2(theta[0], theta[1], n, rng);
        };
        bundle.theta_labels = {"theta1", "theta2"};
    } else if (cfg.model_id == "gk") {
        bundle.simulator = [n](const Eigen::VectorXd& theta, RandomStream& rng) {
            return simulate_gk(GkParams{theta[0], theta[1], theta[2], theta[3]}, n, rng);
        };
        bundle.theta_labels = {"a", "b", "g", "k"};
    } else if (cfg.model_id == "stable_sv") {
        bundle.simulator = [n](const Eigen::VectorXd& theta, RandomStream& rng) {
            return simulate_stable_sv(StableSvParams{theta[0], theta[1], theta[2]}, n, rng);
        };
        bundle.theta_labels = {"theta2", "theta3", "theta4"};
    } else {
        throw std::invalid_argument("model.id: unknown model '" + cfg.model_id + "'");
    }

    const std::string summary_id = cfg.summary_id;
    if (summary_id == "mean_variance") {
        bundle.summary_factory = [](const Dataset&) {
            return SummaryMap([](const Dataset& z) { return mean_variance_summary(z); });
        };
    } else if (summary_id == "autocov3") {
        bundle.summary_factory = [](const Dataset&) {
            return SummaryMap([](const Dataset& z) { return autocovariance_summary(z); });
        };
    } else if (summary_id == "robust_gk") {
        bundle.summary_factory = [](const Dataset&) {
            return SummaryMap([](const Dataset& z) { return robust_gk_summary(z); });
        };
    } else if (summary_id == "garch_score") {
        bundle.summary_factory = [](const Dataset& y) {
            const AuxGarchParams beta_hat = fit_garch_aux(y);
            return SummaryMap(
                [beta_hat](const Dataset& z) { return garch_score_summary(z, beta_hat); });
        };
    } else {
        throw std::invalid_argument("summary: unknown summary map '" + summary_id + "'");
    }
    return bundle;
}

namespace {

PriorSpec gamma_prior_spec(const ExperimentConfig& cfg) {
    if (cfg.algorithm == "rabc-laplace") return PriorSpec::laplace(0.0, cfg.params.lambda);
    if (cfg.algorithm == "rabc-spike-slab")
        return PriorSpec::spike_slab(cfg.params.p, cfg.params.lambda);
    if (cfg.algorithm == "rbsl-m") return PriorSpec::laplace(0.0, cfg.params.rbsl_gamma_scale);
    if (cfg.algorithm == "rbsl-v") return PriorSpec::exponential(cfg.params.rbsl_gamma_scale);
    throw std::logic_error("gamma_prior_spec: algorithm has no adjustment components");
}

ReplicationResult run_one_replication(const ExperimentConfig& cfg, const ModelBundle& bundle,
                                      const Dataset& y, RandomStream rng_alg,
                                      RandomStream rng_diag, int inner_workers) {
    ReplicationResult result;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const SummaryMap summary_map = bundle.summary_factory(y);
        const SummaryVector y_summary = summary_map(y);
        const Eigen::Index d_theta = bundle.prior.dim();
        result.labels = bundle.theta_labels;

        SmcConfig smc;
        smc.N = cfg.params.N;
        smc.alpha = cfg.params.alpha;
        smc.p_acc_min = cfg.params.p_acc_min;
        smc.R_init = cfg.params.R_init;
        smc.max_moves = cfg.params.max_moves;
        smc.workers = inner_workers;

        Eigen::Index d_gamma = 0;
        if (cfg.algorithm == "abc-smc" || cfg.algorithm == "abc-smc-reg") {
            ParticleSet set = smc_abc(bundle.prior, bundle.simulator, summary_map, y_summary, smc,
                                      rng_alg, &result.trace);
            result.warning = set.warning;
            if (cfg.algorithm == "abc-smc-reg") set = regression_adjust(set, y_summary);
            result.draws.resize(static_cast<Eigen::Index>(set.size()), d_theta);
            for (std::size_t i = 0; i < set.size(); ++i)
                result.draws.row(static_cast<Eigen::Index>(i)) = set.particles[i].theta.transpose();
        } else if (cfg.algorithm == "rabc-laplace" || cfg.algorithm == "rabc-spike-slab") {
            RabcOptions options;
            options.gamma_prior = cfg.algorithm == "rabc-laplace" ? GammaPriorKind::Laplace
                                                                  : GammaPriorKind::SpikeSlab;
            options.lambda = cfg.params.lambda;
            options.spike_probability = cfg.params.p;
            options.N1 = cfg.params.N1;
            options.retain_fraction = cfg.params.retain_fraction;
            options.smc = smc;
            const RabcResult rabc = run_rabc(bundle.prior, bundle.simulator, summary_map,
                                             cfg.partition, y_summary, options, rng_alg);
            result.warning = rabc.warning;
            result.trace = rabc.trace;
            d_gamma = rabc.gamma_draws.cols();
            result.draws.resize(rabc.theta_draws.rows(), d_theta + d_gamma);
            result.draws.leftCols(d_theta) = rabc.theta_draws;
            result.draws.rightCols(d_gamma) = rabc.gamma_draws;
        } else {  // bsl / rbsl-m / rbsl-v
            RbslOptions options;
            options.variant = cfg.algorithm == "rbsl-m"
                                  ? BslVariant::MeanAdjust
                                  : (cfg.algorithm == "rbsl-v" ? BslVariant::VarianceAdjust
                                                               : BslVariant::Plain);
            options.m = cfg.params.m;
            options.iters = cfg.params.iters;
            options.burnin = cfg.params.burnin;
            options.thin = cfg.params.thin;
            JointPrior gamma_prior;
            if (options.variant != BslVariant::Plain) {
                d_gamma = y_summary.size();
                gamma_prior = JointPrior(std::vector<PriorSpec>(
                    static_cast<std::size_t>(d_gamma), gamma_prior_spec(cfg)));
            }
            const RbslResult mh = rbsl_mh(options, bundle.prior, gamma_prior, bundle.simulator,
                                          summary_map, y_summary, rng_alg);
            result.warning = mh.warning;
            result.draws = mh.draws;
        }

        for (Eigen::Index j = 0; j < d_gamma; ++j)
            result.labels.push_back("gamma" + std::to_string(j + 1));

        // Randomization location test of each adjustment component against a
        // fresh prior sample of matching size.
        if (d_gamma > 0) {
            const PriorSpec gspec = gamma_prior_spec(cfg);
            for (Eigen::Index j = 0; j < d_gamma; ++j) {
                RandomStream sub = rng_diag.derive({1, static_cast<std::uint64_t>(j)});
                const Eigen::VectorXd post = result.draws.col(d_theta + j);
                const double pval = randomization_location_test(
                    post, [&gspec](RandomStream& r) { return sample(gspec, r); }, 0, 999, sub);
                result.gamma_pvalues[result.labels[static_cast<std::size_t>(d_theta + j)]] = pval;
            }
        }

        if (cfg.params.predictive_draws > 0 && result.draws.rows() > 0) {
            RandomStream sub = rng_diag.derive({2});
            const PredictiveCheck check = posterior_predictive_summaries(
                result.draws.leftCols(d_theta), bundle.simulator, summary_map, y_summary,
                cfg.params.predictive_draws, sub);
            for (Eigen::Index j = 0; j < y_summary.size(); ++j) {
                const std::string label = y_summary.labels.empty()
                                              ? "summary" + std::to_string(j + 1)
                                              : y_summary.labels[static_cast<std::size_t>(j)];
                result.predictive_inside[label] = check.observed_inside[static_cast<std::size_t>(j)];
            }
        }
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

void write_draws_csv(const std::string& path, const RunReport& report) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    std::fputs("rep,param,draw_index,value\n", f);
    for (std::size_t r = 0; r < report.replications.size(); ++r) {
        const ReplicationResult& rep = report.replications[r];
        if (!rep.ok) continue;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(rep.labels.size()); ++j) {
            for (Eigen::Index i = 0; i < rep.draws.rows(); ++i) {
                std::fprintf(f, "%zu,%s,%lld,%.17g\n", r, rep.labels[static_cast<std::size_t>(j)].c_str(),
                             static_cast<long long>(i), rep.draws(i, j));
            }
        }
    }
    std::fclose(f);
}

json metrics_to_json(const std::vector<McMetrics>& metrics,
                     const std::vector<std::string>& labels) {
    json out = json::object();
    for (std::size_t j = 0; j < metrics.size(); ++j) {
        out[labels[j]] = {{"coverage_pct", metrics[j].coverage_pct},
                          {"bias", metrics[j].bias},
                          {"avg_posterior_std", metrics[j].avg_posterior_std}};
    }
    return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = cfg.workers == 0 ? default_workers() : cfg.workers;

    Dataset csv_data;
    if (cfg.csv) csv_data = ingest_returns_csv(cfg.csv->path, cfg.csv->column);
    const Eigen::Index n = cfg.csv ? csv_data.size() : cfg.synthetic->n;
    const ModelBundle bundle = build_model(cfg, n);

    RunReport report;
    report.replications.resize(cfg.replications);
    const int outer = static_cast<int>(std::min<std::size_t>(workers, cfg.replications));
    const int inner = cfg.replications == 1 ? workers : std::max(1, workers / outer);

    parallel_for(cfg.replications, outer, [&](std::size_t r) {
        RandomStream rng_data(cfg.seed, {static_cast<std::uint64_t>(r), 0});
        RandomStream rng_alg(cfg.seed, {static_cast<std::uint64_t>(r), 1});
        RandomStream rng_diag(cfg.seed, {static_cast<std::uint64_t>(r), 2});
        const Dataset y = cfg.csv ? csv_data : generate_data(*cfg.synthetic, rng_data);
        report.replications[r] =
            run_one_replication(cfg, bundle, y, rng_alg, rng_diag, inner);
    });

    report.all_ok = true;
    for (const auto& rep : report.replications)
        if (!rep.ok) report.all_ok = false;
    for (const auto& rep : report.replications)
        if (rep.ok) {
            report.labels = rep.labels;
            break;
        }

    json doc;
    doc["config"] = cfg.echo();
    doc["labels"] = report.labels;
    json reps = json::array();
    std::size_t total_rows = 0;
    for (std::size_t r = 0; r < report.replications.size(); ++r) {
        const ReplicationResult& rep = report.replications[r];
        json entry;
        entry["rep"] = r;
        entry["status"] = rep.ok ? "ok" : "failed";
        if (!rep.ok) entry["error"] = rep.error;
        entry["warning"] = rep.warning;
        entry["seconds"] = rep.seconds;
        if (rep.ok) {
            total_rows += static_cast<std::size_t>(rep.draws.rows()) * rep.labels.size();
            json mean = json::object(), sd = json::object();
            for (std::size_t j = 0; j < rep.labels.size(); ++j) {
                const Eigen::VectorXd col = rep.draws.col(static_cast<Eigen::Index>(j));
                const double mu = col.mean();
                const double var = col.size() > 1
                                       ? (col.array() - mu).square().sum() /
                                             static_cast<double>(col.size() - 1)
                                       : 0.0;
                mean[rep.labels[j]] = mu;
                sd[rep.labels[j]] = std::sqrt(var);
            }
            entry["posterior_mean"] = mean;
            entry["posterior_std"] = sd;
            if (!rep.gamma_pvalues.empty()) entry["gamma_pvalues"] = rep.gamma_pvalues;
            if (!rep.predictive_inside.empty()) entry["predictive_inside"] = rep.predictive_inside;
            if (!rep.trace.empty()) {
                json trace = json::array();
                for (const auto& t : rep.trace)
                    trace.push_back({{"iteration", t.iteration},
                                     {"epsilon", t.epsilon},
                                     {"p_acc", t.p_acc},
                                     {"moves", t.moves}});
                entry["trace"] = trace;
            }
        }
        reps.push_back(entry);
    }
    doc["replications"] = reps;
    doc["draw_accounting"] = {{"rows", total_rows}};

    if (cfg.pseudo_true) {
        std::vector<Eigen::MatrixXd> posteriors;
        for (const auto& rep : report.replications)
            if (rep.ok) posteriors.push_back(rep.draws);
        if (posteriors.size() >= 2) {
            const Eigen::Index d_theta = cfg.pseudo_true->size();
            std::vector<Eigen::MatrixXd> theta_only;
            theta_only.reserve(posteriors.size());
            for (const auto& m : posteriors) theta_only.push_back(m.leftCols(d_theta));
            const auto metrics = mc_metrics(theta_only, *cfg.pseudo_true, 0.95);
            doc["metrics"] = metrics_to_json(
                metrics, {report.labels.begin(),
                          report.labels.begin() + static_cast<std::ptrdiff_t>(d_theta)});
        }
    }
    doc["seconds_total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.document = std::move(doc);

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_draws_csv(cfg.out_dir + "/draws.csv", report);
        std::ofstream out(cfg.out_dir + "/report.json");
        out << report.document.dump(2) << "\n";
    }
    return report;
}

bool report_from_dir(const std::string& dir, std::ostream& out) {
    std::ifstream in(dir + "/report.json");
    if (!in) return false;
    json doc;
    in >> doc;

    std::vector<std::string> labels;
    for (const auto& l : doc["labels"]) labels.push_back(l.get<std::string>());

    // Group persisted draws back into one matrix per replication.
    std::ifstream csv(dir + "/draws.csv");
    if (!csv) return false;
    std::string line;
    std::getline(csv, line);  // header
    std::map<std::size_t, std::map<std::string, std::vector<double>>> by_rep;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 4) continue;
        by_rep[std::stoull(cells[0])][cells[1]].push_back(std::stod(cells[3]));
    }

    std::vector<Eigen::MatrixXd> posteriors;
    for (const auto& [rep, cols] : by_rep) {
        const std::size_t rows = cols.begin()->second.size();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(labels.size()));
        for (std::size_t j = 0; j < labels.size(); ++j) {
            const auto it = cols.find(labels[j]);
            if (it == cols.end() || it->second.size() != rows) return false;
            for (std::size_t i = 0; i < rows; ++i)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = it->second[i];
        }
        posteriors.push_back(std::move(m));
    }

    out << "experiment: " << doc["config"]["experiment"].get<std::string>() << "\n";
    out << "algorithm:  " << doc["config"]["algorithm"].get<std::string>() << "\n";
    out << "replications with draws: " << posteriors.size() << "\n";

    char buf[256];
    if (doc["config"].contains("pseudo_true") && posteriors.size() >= 2) {
        Eigen::VectorXd star(doc["config"]["pseudo_true"].size());
        for (Eigen::Index j = 0; j < star.size(); ++j)
            star[j] = doc["config"]["pseudo_true"][static_cast<std::size_t>(j)].get<double>();
        std::vector<Eigen::MatrixXd> theta_only;
        theta_only.reserve(posteriors.size());
        for (const auto& m : posteriors) theta_only.push_back(m.leftCols(star.size()));
        const auto metrics = mc_metrics(theta_only, star, 0.95);
        out << "\nparam        coverage%       bias        avg_std\n";
        for (std::size_t j = 0; j < metrics.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%-12s %8.1f %12.4f %12.4f\n", labels[j].c_str(),
                          metrics[j].coverage_pct, metrics[j].bias, metrics[j].avg_posterior_std);
            out << buf;
        }
    } else {
        out << "\nparam        post_mean    post_std (averaged over replications)\n";
        for (std::size_t j = 0; j < labels.size(); ++j) {
            double mu = 0.0, sd = 0.0;
            for (const auto& m : posteriors) {
                const Eigen::VectorXd col = m.col(static_cast<Eigen::Index>(j));
                const double cm = col.mean();
                mu += cm;
                sd += std::sqrt((col.array() - cm).square().sum() /
                                std::max<double>(1.0, static_cast<double>(col.size() - 1)));
            }
            mu /= static_cast<double>(posteriors.size());
            sd /= static_cast<double>(posteriors.size());
            std::snprintf(buf, sizeof(buf), "%-12s %12.4f %12.4f\n", labels[j].c_str(), mu, sd);
            out << buf;
        }
    }
    return true;
}

}  // namespace rabc
