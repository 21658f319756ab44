#include "rabc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rabc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument("config error at '" + field + "': " + what);
}

void check_keys(const json& obj, const std::string& field, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(field, "unknown key '" + it.key() + "'");
    }
}

double need_number(const json& obj, const std::string& field, const std::string& key) {
    if (!obj.contains(key)) fail(field, "missing key '" + key + "'");
    if (!obj[key].is_number()) fail(field + "." + key, "expected a number");
    return obj[key].get<double>();
}

PriorSpec parse_prior(const json& obj, const std::string& field) {
    if (!obj.is_object() || !obj.contains("kind")) fail(field, "expected an object with 'kind'");
    const std::string kind = obj["kind"].get<std::string>();
    PriorSpec spec;
    if (kind == "uniform") {
        check_keys(obj, field, {"kind", "lo", "hi"});
        spec = PriorSpec::uniform(need_number(obj, field, "lo"), need_number(obj, field, "hi"));
    } else if (kind == "gaussian") {
        check_keys(obj, field, {"kind", "mean", "variance"});
        spec = PriorSpec::gaussian(need_number(obj, field, "mean"),
                                   need_number(obj, field, "variance"));
    } else if (kind == "laplace") {
        check_keys(obj, field, {"kind", "location", "scale"});
        spec = PriorSpec::laplace(need_number(obj, field, "location"),
                                  need_number(obj, field, "scale"));
    } else if (kind == "exponential") {
        check_keys(obj, field, {"kind", "scale"});
        spec = PriorSpec::exponential(need_number(obj, field, "scale"));
    } else if (kind == "spike_slab") {
        check_keys(obj, field, {"kind", "p", "scale"});
        spec = PriorSpec::spike_slab(need_number(obj, field, "p"), need_number(obj, field, "scale"));
    } else {
        fail(field, "unknown prior kind '" + kind + "'");
    }
    try {
        spec.validate();
    } catch (const std::exception& e) {
        fail(field, e.what());
    }
    return spec;
}

json prior_to_json(const PriorSpec& p) {
    switch (p.kind) {
        case PriorSpec::Kind::Uniform: return {{"kind", "uniform"}, {"lo", p.a}, {"hi", p.b}};
        case PriorSpec::Kind::Gaussian: return {{"kind", "gaussian"}, {"mean", p.a}, {"variance", p.b}};
        case PriorSpec::Kind::Laplace: return {{"kind", "laplace"}, {"location", p.a}, {"scale", p.b}};
        case PriorSpec::Kind::Exponential: return {{"kind", "exponential"}, {"scale", p.a}};
        case PriorSpec::Kind::SpikeSlab: return {{"kind", "spike_slab"}, {"p", p.a}, {"scale", p.b}};
    }
    return {};
}

struct ModelDefaults {
    int d_theta;
    std::string summary;
    std::vector<Eigen::Index> psi_1based;
    std::vector<Eigen::Index> phi_1based;
    std::vector<PriorSpec> priors;
};

ModelDefaults model_defaults(const std::string& id) {
    if (id == "normal_location")
        return {1, "mean_variance", {1}, {2}, {PriorSpec::gaussian(0.0, 25.0)}};
    if (id == "ma2")
        return {2, "autocov3", {3}, {1, 2},
                {PriorSpec::uniform(-2.0, 2.0), PriorSpec::uniform(-1.0, 1.0)}};
    if (id == "gk")
        return {4, "robust_gk", {3}, {1, 2, 4},
                {PriorSpec::uniform(0.0, 10.0), PriorSpec::uniform(0.0, 10.0),
                 PriorSpec::uniform(0.0, 10.0), PriorSpec::uniform(0.0, 10.0)}};
    if (id == "stable_sv")
        return {3, "garch_score", {1}, {2, 3, 4},
                {PriorSpec::uniform(0.7, 1.0), PriorSpec::uniform(0.01, 1.0),
                 PriorSpec::uniform(1.0, 2.0)}};
    fail("model.id", "unknown model '" + id + "'");
}

int summary_dimension(const std::string& id) {
    if (id == "mean_variance") return 2;
    if (id == "autocov3") return 3;
    if (id == "robust_gk" || id == "garch_score") return 4;
    fail("summary", "unknown summary map '" + id + "'");
}

const std::set<std::string> kAlgorithms = {"abc-smc",      "abc-smc-reg", "rabc-laplace",
                                           "rabc-spike-slab", "bsl",      "rbsl-m",
                                           "rbsl-v"};

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) fail("<root>", "expected a JSON object");
    check_keys(doc, "<root>",
               {"experiment", "model", "priors", "summary", "partition", "algorithm", "params",
                "replications", "data", "pseudo_true", "seed", "out", "workers"});

    ExperimentConfig cfg;
    if (doc.contains("experiment")) cfg.experiment = doc["experiment"].get<std::string>();

    if (!doc.contains("model") || !doc["model"].is_object() || !doc["model"].contains("id"))
        fail("model", "expected an object with 'id'");
    check_keys(doc["model"], "model", {"id", "fixed"});
    cfg.model_id = doc["model"]["id"].get<std::string>();
    const ModelDefaults defaults = model_defaults(cfg.model_id);
    if (doc["model"].contains("fixed")) {
        if (!doc["model"]["fixed"].is_object()) fail("model.fixed", "expected an object");
        for (auto it = doc["model"]["fixed"].begin(); it != doc["model"]["fixed"].end(); ++it) {
            if (!it.value().is_number()) fail("model.fixed." + it.key(), "expected a number");
            cfg.model_fixed[it.key()] = it.value().get<double>();
        }
    }

    if (doc.contains("priors")) {
        if (!doc["priors"].is_array()) fail("priors", "expected an array");
        for (std::size_t i = 0; i < doc["priors"].size(); ++i)
            cfg.priors.push_back(parse_prior(doc["priors"][i], "priors[" + std::to_string(i) + "]"));
        if (cfg.priors.size() != static_cast<std::size_t>(defaults.d_theta))
            fail("priors", "expected " + std::to_string(defaults.d_theta) + " components for model '" +
                               cfg.model_id + "'");
    } else {
        cfg.priors = defaults.priors;
    }

    cfg.summary_id = doc.contains("summary") ? doc["summary"].get<std::string>() : defaults.summary;
    const int d_eta = summary_dimension(cfg.summary_id);

    std::vector<Eigen::Index> psi1 = defaults.psi_1based, phi1 = defaults.phi_1based;
    if (doc.contains("partition")) {
        const json& part = doc["partition"];
        if (!part.is_object()) fail("partition", "expected an object with 'psi' and 'phi'");
        check_keys(part, "partition", {"psi", "phi"});
        auto read_indices = [&](const char* key) {
            std::vector<Eigen::Index> out;
            if (!part.contains(key) || !part[key].is_array()) fail("partition", std::string("missing array '") + key + "'");
            for (const auto& v : part[key]) {
                if (!v.is_number_integer()) fail("partition", "indices must be integers");
                out.push_back(v.get<Eigen::Index>());
            }
            return out;
        };
        psi1 = read_indices("psi");
        phi1 = read_indices("phi");
    }
    for (Eigen::Index i : psi1) {
        if (i < 1 || i > d_eta) fail("partition", "index " + std::to_string(i) + " outside 1.." + std::to_string(d_eta));
        cfg.partition.psi.push_back(i - 1);
    }
    for (Eigen::Index i : phi1) {
        if (i < 1 || i > d_eta) fail("partition", "index " + std::to_string(i) + " outside 1.." + std::to_string(d_eta));
        cfg.partition.phi.push_back(i - 1);
    }
    try {
        cfg.partition.validate(d_eta);
    } catch (const std::exception& e) {
        fail("partition", e.what());
    }

    if (!doc.contains("algorithm")) fail("algorithm", "missing");
    cfg.algorithm = doc["algorithm"].get<std::string>();
    if (!kAlgorithms.count(cfg.algorithm)) fail("algorithm", "unknown algorithm '" + cfg.algorithm + "'");

    if (doc.contains("params")) {
        const json& p = doc["params"];
        if (!p.is_object()) fail("params", "expected an object");
        check_keys(p, "params",
                   {"N", "N1", "retain_fraction", "m", "iters", "burnin", "thin", "lambda", "p",
                    "alpha", "p_acc_min", "R_init", "max_moves", "rbsl_gamma_scale",
                    "predictive_draws"});
        auto num = [&](const char* key, double fallback) {
            if (!p.contains(key)) return fallback;
            if (!p[key].is_number()) fail(std::string("params.") + key, "expected a number");
            return p[key].get<double>();
        };
        cfg.params.N = static_cast<std::size_t>(num("N", static_cast<double>(cfg.params.N)));
        cfg.params.N1 = static_cast<std::size_t>(num("N1", static_cast<double>(cfg.params.N1)));
        cfg.params.retain_fraction = num("retain_fraction", cfg.params.retain_fraction);
        cfg.params.m = static_cast<std::size_t>(num("m", static_cast<double>(cfg.params.m)));
        cfg.params.iters = static_cast<std::size_t>(num("iters", static_cast<double>(cfg.params.iters)));
        cfg.params.burnin = static_cast<std::size_t>(num("burnin", static_cast<double>(cfg.params.burnin)));
        cfg.params.thin = static_cast<std::size_t>(num("thin", static_cast<double>(cfg.params.thin)));
        cfg.params.lambda = num("lambda", cfg.params.lambda);
        cfg.params.p = num("p", cfg.params.p);
        cfg.params.alpha = num("alpha", cfg.params.alpha);
        cfg.params.p_acc_min = num("p_acc_min", cfg.params.p_acc_min);
        cfg.params.R_init = static_cast<int>(num("R_init", cfg.params.R_init));
        cfg.params.max_moves = static_cast<int>(num("max_moves", cfg.params.max_moves));
        cfg.params.rbsl_gamma_scale = num("rbsl_gamma_scale", cfg.params.rbsl_gamma_scale);
        cfg.params.predictive_draws =
            static_cast<std::size_t>(num("predictive_draws", static_cast<double>(cfg.params.predictive_draws)));
        if (!(cfg.params.lambda > 0.0)) fail("params.lambda", "must be > 0");
        if (!(cfg.params.p > 0.0 && cfg.params.p < 1.0)) fail("params.p", "must lie in (0,1)");
        if (!(cfg.params.retain_fraction > 0.0 && cfg.params.retain_fraction <= 1.0))
            fail("params.retain_fraction", "must lie in (0,1]");
        if (cfg.params.iters <= cfg.params.burnin) fail("params.iters", "must exceed burnin");
    }

    if (doc.contains("replications")) {
        if (!doc["replications"].is_number_integer() || doc["replications"].get<long>() < 1)
            fail("replications", "must be an integer >= 1");
        cfg.replications = doc["replications"].get<std::size_t>();
    }

    if (!doc.contains("data") || !doc["data"].is_object() || !doc["data"].contains("source"))
        fail("data", "expected an object with 'source'");
    const json& data = doc["data"];
    const std::string source = data["source"].get<std::string>();
    if (source == "synthetic") {
        check_keys(data, "data", {"source", "dgp", "n"});
        if (!data.contains("dgp") || !data["dgp"].is_object() || !data["dgp"].contains("id"))
            fail("data.dgp", "expected an object with 'id'");
        check_keys(data["dgp"], "data.dgp", {"id", "params"});
        SyntheticDataSpec spec;
        spec.dgp_id = data["dgp"]["id"].get<std::string>();
        if (data["dgp"].contains("params")) {
            for (auto it = data["dgp"]["params"].begin(); it != data["dgp"]["params"].end(); ++it) {
                if (!it.value().is_number()) fail("data.dgp.params." + it.key(), "expected a number");
                spec.dgp_params[it.key()] = it.value().get<double>();
            }
        }
        if (!data.contains("n") || !data["n"].is_number_integer() || data["n"].get<long>() < 3)
            fail("data.n", "must be an integer >= 3");
        spec.n = data["n"].get<Eigen::Index>();
        cfg.synthetic = std::move(spec);
    } else if (source == "csv") {
        check_keys(data, "data", {"source", "path", "column"});
        if (!data.contains("path") || !data.contains("column"))
            fail("data", "csv source requires 'path' and 'column'");
        cfg.csv = CsvDataSpec{data["path"].get<std::string>(), data["column"].get<std::string>()};
    } else {
        fail("data.source", "must be 'synthetic' or 'csv'");
    }

    if (doc.contains("pseudo_true")) {
        if (!doc["pseudo_true"].is_array()) fail("pseudo_true", "expected an array");
        Eigen::VectorXd v(doc["pseudo_true"].size());
        for (std::size_t i = 0; i < doc["pseudo_true"].size(); ++i)
            v[static_cast<Eigen::Index>(i)] = doc["pseudo_true"][i].get<double>();
        if (v.size() != static_cast<Eigen::Index>(cfg.priors.size()))
            fail("pseudo_true", "length must equal the parameter dimension");
        cfg.pseudo_true = std::move(v);
    }

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer()) fail("seed", "expected an integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    if (doc.contains("workers")) {
        if (!doc["workers"].is_number_integer() || doc["workers"].get<int>() < 0)
            fail("workers", "expected a non-negative integer");
        cfg.workers = doc["workers"].get<int>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("load_config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json ExperimentConfig::echo() const {
    json doc;
    doc["experiment"] = experiment;
    doc["model"] = {{"id", model_id}, {"fixed", json::object()}};
    for (const auto& [k, v] : model_fixed) doc["model"]["fixed"][k] = v;
    doc["priors"] = json::array();
    for (const auto& p : priors) doc["priors"].push_back(prior_to_json(p));
    doc["summary"] = summary_id;
    json psi = json::array(), phi = json::array();
    for (Eigen::Index i : partition.psi) psi.push_back(i + 1);
    for (Eigen::Index i : partition.phi) phi.push_back(i + 1);
    doc["partition"] = {{"psi", psi}, {"phi", phi}};
    doc["algorithm"] = algorithm;
    doc["params"] = {{"N", params.N},
                     {"N1", params.N1},
                     {"retain_fraction", params.retain_fraction},
                     {"m", params.m},
                     {"iters", params.iters},
                     {"burnin", params.burnin},
                     {"thin", params.thin},
                     {"lambda", params.lambda},
                     {"p", params.p},
                     {"alpha", params.alpha},
                     {"p_acc_min", params.p_acc_min},
                     {"R_init", params.R_init},
                     {"max_moves", params.max_moves},
                     {"rbsl_gamma_scale", params.rbsl_gamma_scale},
                     {"predictive_draws", params.predictive_draws}};
    doc["replications"] = replications;
    if (synthetic) {
        json params_json = json::object();
        for (const auto& [k, v] : synthetic->dgp_params) params_json[k] = v;
        doc["data"] = {{"source", "synthetic"},
                       {"dgp", {{"id", synthetic->dgp_id}, {"params", params_json}}},
                       {"n", synthetic->n}};
    } else if (csv) {
        doc["data"] = {{"source", "csv"}, {"path", csv->path}, {"column", csv->column}};
    }
    if (pseudo_true) {
        json v = json::array();
        for (Eigen::Index i = 0; i < pseudo_true->size(); ++i) v.push_back((*pseudo_true)[i]);
        doc["pseudo_true"] = v;
    }
    doc["seed"] = seed;
    if (!out_dir.empty()) doc["out"] = out_dir;
    doc["workers"] = workers;
    return doc;
}

nlohmann::json preset_config(const std::string& name) {
    json doc;
    if (name == "normal-toy" || name == "normal-toy-laplace" || name == "normal-toy-reg" ||
        name == "normal-toy-smc") {
        doc = {{"experiment", name},
               {"model", {{"id", "normal_location"}, {"fixed", {{"sigma", 1.0}}}}},
               {"algorithm", name == "normal-toy-reg"
                                 ? "abc-smc-reg"
                                 : (name == "normal-toy-smc"
                                        ? "abc-smc"
                                        : (name == "normal-toy-laplace" ? "rabc-laplace"
                                                                        : "rabc-spike-slab"))},
               {"params", {{"N1", 20000}, {"N", 500}}},
               {"replications", 50},
               {"data",
                {{"source", "synthetic"},
                 {"dgp", {{"id", "normal"}, {"params", {{"theta", 1.0}, {"sigma", 2.0}}}}},
                 {"n", 100}}},
               {"pseudo_true", {1.0}},
               {"seed", 20250801}};
    } else if (name == "ma2" || name == "ma2-laplace" || name == "ma2-rbslv" || name == "ma2-rbslm") {
        doc = {{"experiment", name},
               {"model", {{"id", "ma2"}}},
               {"algorithm", name == "ma2-rbslv"
                                 ? "rbsl-v"
                                 : (name == "ma2-rbslm"
                                        ? "rbsl-m"
                                        : (name == "ma2-laplace" ? "rabc-laplace"
                                                                 : "rabc-spike-slab"))},
               {"params", {{"N1", 25000}, {"N", 1000}}},
               {"replications", 20},
               {"data",
                {{"source", "synthetic"},
                 {"dgp",
                  {{"id", "sv"},
                   {"params", {{"omega", -0.76}, {"rho", 0.90}, {"sigma_v", 0.36}}}}},
                 {"n", 1000}}},
               {"pseudo_true", {0.0, 0.0}},
               {"seed", 20250802}};
    } else if (name == "gnk" || name == "gnk-spike-slab") {
        doc = {{"experiment", name},
               {"model", {{"id", "gk"}}},
               {"algorithm", name == "gnk-spike-slab" ? "rabc-spike-slab" : "rabc-laplace"},
               {"params", {{"N1", 20000}, {"N", 400}}},
               {"replications", 10},
               {"data",
                {{"source", "synthetic"},
                 {"dgp",
                  {{"id", "gaussian_mixture"},
                   {"params",
                    {{"w", 0.6}, {"mu1", 1.0}, {"mu2", 7.0}, {"var1", 2.0}, {"var2", 2.0}}}}},
                 {"n", 2000}}},
               {"pseudo_true", {2.3663, 4.1757, 1.7850, 0.1001}},
               {"seed", 20250803}};
    } else if (name == "stable-sv") {
        doc = {{"experiment", name},
               {"model", {{"id", "stable_sv"}}},
               {"algorithm", "rabc-spike-slab"},
               {"params", {{"N1", 10000}, {"N", 300}}},
               {"replications", 1},
               {"data",
                {{"source", "synthetic"},
                 {"dgp",
                  {{"id", "stable_sv"},
                   {"params", {{"theta2", 0.90}, {"theta3", 0.30}, {"theta4", 1.50}}}}},
                 {"n", 1000}}},
               {"pseudo_true", {0.90, 0.30, 1.50}},
               {"seed", 20250804}};
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return doc;
}

std::vector<std::string> preset_names() {
    return {"normal-toy", "normal-toy-laplace", "normal-toy-reg", "normal-toy-smc",
            "ma2",        "ma2-laplace",        "ma2-rbslv",      "ma2-rbslm",
            "gnk",        "gnk-spike-slab",     "stable-sv"};
}

}  // namespace rabc
