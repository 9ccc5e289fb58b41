#include "sgamp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sgamp/errors.hpp"

namespace sgamp {

using nlohmann::json;

namespace {

struct KindName {
    ExperimentKind kind;
    std::string_view name;
};
constexpr KindName kKinds[] = {
    {ExperimentKind::SeChart, "se_chart"},     {ExperimentKind::SeSweep, "se_sweep"},
    {ExperimentKind::GampSweep, "gamp_sweep"}, {ExperimentKind::Convergence, "convergence"},
    {ExperimentKind::Lemma1, "lemma1"},        {ExperimentKind::Threshold, "threshold"},
};

struct AlgName {
    Algorithm algorithm;
    std::string_view name;
};
constexpr AlgName kAlgorithms[] = {
    {Algorithm::Gamp, "gamp"}, {Algorithm::Fista, "fista"}, {Algorithm::Omp, "omp"},
    {Algorithm::Biht, "biht"}, {Algorithm::Glasso, "glasso"},
};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail(path, "wrong type");
    }
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path,
                                std::vector<double> fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (it->is_number()) return {it->get<double>()};
    if (!it->is_array()) fail(path, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number()) fail(path, "expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

AlgorithmSpec parse_algorithm_spec(const json& j, std::size_t index) {
    const std::string path = "algorithms[" + std::to_string(index) + "]";
    AlgorithmSpec a;
    if (j.is_string()) {
        a.algorithm = parse_algorithm(j.get<std::string>());
        return a;
    }
    if (!j.is_object()) fail(path, "expected a name or an object");
    reject_unknown(j, path,
                   {"name", "iterations", "lambda", "lambda_points", "lambda_decades", "pilot_trials", "tolerance", "step",
                    "damping"});
    if (!j.contains("name")) fail(path + ".name", "missing");
    a.algorithm = parse_algorithm(get<std::string>(j, "name", path + ".name", ""));
    a.iterations = get<int>(j, "iterations", path + ".iterations", 0);
    if (j.contains("lambda")) a.lambda = get<double>(j, "lambda", path + ".lambda", 0.0);
    a.lambda_points = get<int>(j, "lambda_points", path + ".lambda_points", a.lambda_points);
    a.lambda_decades = get<double>(j, "lambda_decades", path + ".lambda_decades", a.lambda_decades);
    a.pilot_trials = get<int>(j, "pilot_trials", path + ".pilot_trials", a.pilot_trials);
    a.tolerance = get<double>(j, "tolerance", path + ".tolerance", a.tolerance);
    a.step = get<double>(j, "step", path + ".step", a.step);
    a.damping = get<double>(j, "damping", path + ".damping", a.damping);
    if (a.iterations < 0) fail(path + ".iterations", "must be >= 0");
    if (a.lambda && !(*a.lambda > 0.0)) fail(path + ".lambda", "must be positive");
    if (a.lambda_points < 1) fail(path + ".lambda_points", "must be >= 1");
    if (!(a.lambda_decades >= 0.0)) fail(path + ".lambda_decades", "must be >= 0");
    if (a.pilot_trials < 0) fail(path + ".pilot_trials", "must be >= 0");
    if (!(a.step > 0.0)) fail(path + ".step", "must be positive");
    if (!(a.damping > 0.0 && a.damping <= 1.0)) fail(path + ".damping", "must lie in (0, 1]");
    return a;
}

json algorithm_to_json(const AlgorithmSpec& a) {
    json j;
    j["name"] = std::string(to_string(a.algorithm));
    j["iterations"] = a.iterations;
    if (a.lambda) j["lambda"] = *a.lambda;
    j["lambda_points"] = a.lambda_points;
    j["lambda_decades"] = a.lambda_decades;
    j["pilot_trials"] = a.pilot_trials;
    j["tolerance"] = a.tolerance;
    j["step"] = a.step;
    j["damping"] = a.damping;
    return j;
}

json to_json(const ExperimentConfig& c, bool include_execution) {
    json j;
    j["schema_version"] = c.schema_version;
    j["experiment"] = std::string(to_string(c.kind));
    j["name"] = c.name;
    json dims;
    dims["n"] = c.n;
    if (c.gamma)
        dims["gamma"] = *c.gamma;
    else
        dims["k"] = c.k;
    dims["deltas"] = c.deltas;
    j["dims"] = dims;
    json ch;
    ch["kind"] = c.channel.name();
    if (c.snr_db)
        ch["snr_db"] = *c.snr_db;
    else
        ch["sigma2"] = c.channel.noise_variance;
    j["channel"] = ch;
    j["prior"] = c.prior.describe();
    j["algorithms"] = json::array();
    for (const auto& a : c.algorithms) j["algorithms"].push_back(algorithm_to_json(a));
    j["trials"] = c.trials;
    j["iterations"] = c.iterations;
    j["seed"] = c.master_seed;
    j["timing"] = c.timing;
    j["plot"] = c.plot;
    j["se"] = {{"chart_points", c.chart_points}, {"t_max", c.se_t_max},       {"tol", c.se_tol},
               {"delta_lo", c.delta_lo},         {"delta_hi", c.delta_hi},    {"delta_tol", c.delta_tol}};
    j["lemma1"] = {{"log2_n", c.log2_n}, {"v", c.lemma_v}};
    if (include_execution) {
        j["output"] = c.output.string();
        j["threads"] = c.threads;
    }
    return j;
}

} // namespace

std::string_view to_string(ExperimentKind kind) {
    for (const auto& k : kKinds)
        if (k.kind == kind) return k.name;
    return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
    for (const auto& k : kKinds)
        if (k.name == text) return k.kind;
    fail("experiment", "unknown kind '" + std::string(text) +
                           "' (expected se_chart, se_sweep, gamp_sweep, convergence, lemma1 or threshold)");
}

std::string_view to_string(Algorithm a) {
    for (const auto& k : kAlgorithms)
        if (k.algorithm == a) return k.name;
    return "?";
}

Algorithm parse_algorithm(std::string_view text) {
    for (const auto& k : kAlgorithms)
        if (k.name == text) return k.algorithm;
    fail("algorithms", "unknown algorithm '" + std::string(text) + "' (expected gamp, fista, omp, biht or glasso)");
}

double ExperimentConfig::noise_variance() const {
    if (snr_db) return prior.second_moment() * noise_variance_from_snr_db(*snr_db);
    return channel.noise_variance;
}

std::size_t ExperimentConfig::sparsity() const {
    if (gamma) return static_cast<std::size_t>(std::max(1.0, std::round(std::pow(static_cast<double>(n), *gamma))));
    return k;
}

ExperimentConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, "",
                   {"schema_version", "experiment", "name", "dims", "channel", "prior", "algorithms", "trials",
                    "iterations", "seed", "output", "threads", "timing", "plot", "se", "lemma1"});

    ExperimentConfig c;
    c.schema_version = get<int>(j, "schema_version", "schema_version", kConfigSchemaVersion);
    if (c.schema_version != kConfigSchemaVersion)
        fail("schema_version", "unsupported version " + std::to_string(c.schema_version));
    if (!j.contains("experiment")) fail("experiment", "missing");
    c.kind = parse_experiment_kind(get<std::string>(j, "experiment", "experiment", ""));
    c.name = get<std::string>(j, "name", "name", std::string(to_string(c.kind)));

    if (auto it = j.find("dims"); it != j.end()) {
        if (!it->is_object()) fail("dims", "expected an object");
        reject_unknown(*it, "dims", {"n", "k", "gamma", "deltas", "delta"});
        c.n = get<std::size_t>(*it, "n", "dims.n", c.n);
        c.k = get<std::size_t>(*it, "k", "dims.k", c.k);
        if (it->contains("gamma")) {
            if (it->contains("k")) fail("dims", "give either k or gamma, not both");
            c.gamma = get<double>(*it, "gamma", "dims.gamma", 0.0);
        }
        c.deltas = get_numbers(*it, "deltas", "dims.deltas", {});
        if (it->contains("delta")) {
            const auto more = get_numbers(*it, "delta", "dims.delta", {});
            c.deltas.insert(c.deltas.end(), more.begin(), more.end());
        }
    }

    std::string channel_kind = "linear";
    double sigma2 = 1e-4;
    if (auto it = j.find("channel"); it != j.end()) {
        if (it->is_string()) {
            channel_kind = it->get<std::string>();
        } else {
            if (!it->is_object()) fail("channel", "expected a kind name or an object");
            reject_unknown(*it, "channel", {"kind", "sigma2", "snr_db"});
            channel_kind = get<std::string>(*it, "kind", "channel.kind", channel_kind);
            if (it->contains("sigma2") && it->contains("snr_db")) fail("channel", "give either sigma2 or snr_db, not both");
            sigma2 = get<double>(*it, "sigma2", "channel.sigma2", sigma2);
            if (it->contains("snr_db")) c.snr_db = get<double>(*it, "snr_db", "channel.snr_db", 0.0);
        }
    }
    if (!(sigma2 >= 0.0)) fail("channel.sigma2", "must be >= 0");
    c.channel = Channel::parse(channel_kind, sigma2);

    if (j.contains("prior")) c.prior = Prior::parse(get<std::string>(j, "prior", "prior", ""));
    c.channel.noise_variance = c.noise_variance();

    if (auto it = j.find("algorithms"); it != j.end()) {
        if (!it->is_array()) fail("algorithms", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) c.algorithms.push_back(parse_algorithm_spec((*it)[i], i));
    }
    c.trials = get<int>(j, "trials", "trials", c.trials);
    c.iterations = get<int>(j, "iterations", "iterations", c.iterations);
    c.master_seed = get<std::uint64_t>(j, "seed", "seed", c.master_seed);
    c.output = get<std::string>(j, "output", "output", c.output.string());
    c.threads = get<int>(j, "threads", "threads", c.threads);
    c.timing = get<bool>(j, "timing", "timing", c.timing);
    c.plot = get<bool>(j, "plot", "plot", c.plot);

    if (auto it = j.find("se"); it != j.end()) {
        if (!it->is_object()) fail("se", "expected an object");
        reject_unknown(*it, "se", {"chart_points", "t_max", "tol", "delta_lo", "delta_hi", "delta_tol"});
        c.chart_points = get<std::size_t>(*it, "chart_points", "se.chart_points", c.chart_points);
        c.se_t_max = get<int>(*it, "t_max", "se.t_max", c.se_t_max);
        c.se_tol = get<double>(*it, "tol", "se.tol", c.se_tol);
        c.delta_lo = get<double>(*it, "delta_lo", "se.delta_lo", c.delta_lo);
        c.delta_hi = get<double>(*it, "delta_hi", "se.delta_hi", c.delta_hi);
        c.delta_tol = get<double>(*it, "delta_tol", "se.delta_tol", c.delta_tol);
    }
    if (auto it = j.find("lemma1"); it != j.end()) {
        if (!it->is_object()) fail("lemma1", "expected an object");
        reject_unknown(*it, "lemma1", {"log2_n", "v"});
        c.log2_n = get_numbers(*it, "log2_n", "lemma1.log2_n", c.log2_n);
        c.lemma_v = get_numbers(*it, "v", "lemma1.v", c.lemma_v);
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    const bool needs_deltas = c.kind != ExperimentKind::Lemma1 && c.kind != ExperimentKind::Threshold;
    if (needs_deltas && c.deltas.empty()) fail("dims.deltas", "must not be empty");
    for (double d : c.deltas)
        if (!(d > 0.0) || !std::isfinite(d)) fail("dims.deltas", "entries must be positive and finite");
    if (c.trials < 1) fail("trials", "must be >= 1");
    if (c.iterations < 1) fail("iterations", "must be >= 1");
    if (c.threads < 0) fail("threads", "must be >= 0");
    if (c.n < 2) fail("dims.n", "must be >= 2");
    if (c.gamma && !(*c.gamma >= 0.0 && *c.gamma < 1.0)) fail("dims.gamma", "must lie in [0, 1)");
    const std::size_t k = c.sparsity();
    if (k < 1 || k >= c.n) fail("dims.k", "must satisfy 1 <= k < n");
    if (c.chart_points < 2) fail("se.chart_points", "must be >= 2");
    if (c.se_t_max < 1) fail("se.t_max", "must be >= 1");
    if (!(c.se_tol > 0.0)) fail("se.tol", "must be positive");
    if (!(c.delta_lo > 0.0 && c.delta_hi > c.delta_lo)) fail("se.delta_lo", "need 0 < delta_lo < delta_hi");
    if (!(c.delta_tol > 0.0)) fail("se.delta_tol", "must be positive");
    if (c.kind == ExperimentKind::Lemma1) {
        if (c.log2_n.empty()) fail("lemma1.log2_n", "must not be empty");
        if (c.lemma_v.empty()) fail("lemma1.v", "must not be empty");
        for (double v : c.lemma_v)
            if (!(v > 0.0)) fail("lemma1.v", "entries must be positive");
        if (!c.gamma) fail("dims.gamma", "lemma1 needs gamma");
    }
    if (c.kind == ExperimentKind::GampSweep || c.kind == ExperimentKind::Convergence) {
        if (c.algorithms.empty()) fail("algorithms", "must not be empty");
        for (const auto& a : c.algorithms) {
            const bool onebit_only = a.algorithm == Algorithm::Biht || a.algorithm == Algorithm::Glasso;
            if (onebit_only && c.channel.kind != ChannelKind::OneBitSign)
                fail("algorithms", std::string(to_string(a.algorithm)) + " needs the onebit channel");
            if (a.algorithm == Algorithm::Omp && c.channel.kind != ChannelKind::Linear)
                fail("algorithms", "omp needs the linear channel");
            if (a.algorithm == Algorithm::Fista && c.channel.kind != ChannelKind::Linear)
                fail("algorithms", "fista needs the linear channel (use glasso for onebit)");
        }
    }
}

std::string canonical_json(const ExperimentConfig& cfg) { return to_json(cfg, true).dump(); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = to_json(cfg, false).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace sgamp
