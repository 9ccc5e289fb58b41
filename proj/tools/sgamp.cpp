#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgamp/config.hpp"
#include "sgamp/csv.hpp"
#include "sgamp/errors.hpp"
#include "sgamp/harness.hpp"
#include "sgamp/state_evolution.hpp"

using namespace sgamp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> trials;
    std::optional<int> threads;
    std::vector<double> deltas;
    bool quiet = false;
};

struct ProblemFlags {
    std::string channel;
    std::string prior;
    std::optional<double> sigma2;
    std::optional<double> snr_db;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "JSON experiment config");
    app->add_option("--seed", f.seed, "Master seed");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--trials", f.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    app->add_option("--threads", f.threads, "Worker threads (default: SUBLINEAR_GAMP_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--delta", f.deltas, "Sample-complexity prefactor (repeatable)");
    app->add_flag("--quiet", f.quiet, "Suppress progress output");
}

void add_problem(CLI::App* app, ProblemFlags& p) {
    app->add_option("--channel", p.channel, "linear or onebit");
    app->add_option("--prior", p.prior, "gauss:P, const:u or mix:u@p,...");
    app->add_option("--sigma2", p.sigma2, "Noise variance");
    app->add_option("--snr-db", p.snr_db, "Signal-to-noise ratio in dB (overrides --sigma2)");
}

ExperimentConfig build_config(const CommonFlags& f, const ProblemFlags* p, std::optional<ExperimentKind> kind) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = load_config(f.config);
    } else if (kind) {
        cfg.kind = *kind;
        cfg.name = std::string(to_string(*kind));
        if (*kind == ExperimentKind::Lemma1) cfg.gamma = 0.25;
    } else {
        throw ConfigError("--config is required for this subcommand");
    }
    if (kind && !f.config.empty() && cfg.kind != *kind &&
        !(*kind == ExperimentKind::SeSweep && cfg.kind == ExperimentKind::SeChart))
        throw ConfigError("config experiment '" + std::string(to_string(cfg.kind)) + "' does not match the subcommand");
    if (p) {
        if (!p->prior.empty()) cfg.prior = Prior::parse(p->prior);
        const std::string kind_name = p->channel.empty() ? cfg.channel.name() : p->channel;
        double sigma2 = p->sigma2.value_or(cfg.channel.noise_variance);
        if (p->snr_db) {
            cfg.snr_db = *p->snr_db;
        } else if (p->sigma2) {
            cfg.snr_db.reset();
        }
        cfg.channel = Channel::parse(kind_name, sigma2);
        cfg.channel.noise_variance = cfg.noise_variance();
    }
    if (f.seed) cfg.master_seed = *f.seed;
    if (!f.out.empty()) cfg.output = f.out;
    if (f.trials) cfg.trials = *f.trials;
    if (f.threads) cfg.threads = *f.threads;
    if (!f.deltas.empty()) cfg.deltas = f.deltas;
    validate(cfg);
    return cfg;
}

std::ostream* progress(const CommonFlags& f) { return f.quiet ? nullptr : &std::cerr; }

int cmd_se(const CommonFlags& f, const ProblemFlags& p) {
    const ExperimentConfig cfg = build_config(f, &p, ExperimentKind::SeSweep);
    if (!f.out.empty() || !f.config.empty()) {
        for (const auto& path : run_experiment(cfg, progress(f)).files) std::cout << path.string() << '\n';
        return kExitOk;
    }
    SeOptions opt;
    opt.t_max = cfg.se_t_max;
    opt.tol = cfg.se_tol;
    std::cout << "delta,t,v_in,v_out\n";
    for (double delta : cfg.deltas) {
        const SeTrace tr = se_run(cfg.channel, cfg.prior, delta, opt);
        for (std::size_t t = 0; t < tr.steps.size(); ++t)
            std::cout << format_number(delta) << ',' << t << ',' << format_number(tr.steps[t].v_in) << ','
                      << format_number(tr.steps[t].v_out) << '\n';
        const auto grid = default_chart_grid(cfg.channel, cfg.prior, delta, cfg.chart_points);
        const auto fp = count_fixed_points(exit_chart(cfg.channel, cfg.prior, delta, grid));
        if (!f.quiet)
            std::cerr << "delta=" << format_number(delta) << " v_in_limit=" << format_number(tr.v_in_limit)
                      << " converged=" << (tr.converged ? "yes" : "no") << " fixed_points=" << fp.count << '\n';
    }
    return kExitOk;
}

int cmd_run(const CommonFlags& f, bool bench) {
    ExperimentConfig cfg = build_config(f, nullptr, std::nullopt);
    if (bench) {
        if (cfg.kind != ExperimentKind::GampSweep && cfg.kind != ExperimentKind::Convergence)
            throw ConfigError("bench needs a gamp_sweep or convergence config");
        cfg.timing = true;
        const MonteCarloResult mc = run_monte_carlo(cfg, resolve_threads(cfg.threads), progress(f));
        std::map<std::string, std::pair<double, int>> totals;
        for (const auto& r : mc.records)
            if (r.seconds) {
                auto& t = totals[r.algorithm];
                t.first += *r.seconds;
                ++t.second;
            }
        std::cout << "algorithm,runs,mean_seconds\n";
        for (const auto& [alg, t] : totals)
            std::cout << alg << ',' << t.second << ',' << format_number(t.first / t.second) << '\n';
        return mc.failures.empty() ? kExitOk : kExitNumerical;
    }
    const RunReport report = run_experiment(cfg, progress(f));
    for (const auto& path : report.files) std::cout << path.string() << '\n';
    return kExitOk;
}

int cmd_lemma1(const CommonFlags& f, const ProblemFlags& p, std::optional<double> gamma, const std::vector<double>& v,
               const std::vector<double>& log2n) {
    ExperimentConfig cfg = build_config(f, &p, ExperimentKind::Lemma1);
    if (gamma) cfg.gamma = *gamma;
    if (!cfg.gamma) cfg.gamma = 0.25;
    if (!v.empty()) cfg.lemma_v = v;
    if (!log2n.empty()) cfg.log2_n = log2n;
    validate(cfg);
    if (!f.out.empty() || !f.config.empty()) {
        for (const auto& path : run_experiment(cfg, progress(f)).files) std::cout << path.string() << '\n';
        return kExitOk;
    }
    std::cout << "v,log2_n,log2_k,value,asymptote\n";
    for (double vv : cfg.lemma_v)
        for (const auto& pt : lemma1_curve(cfg.prior, vv, *cfg.gamma, cfg.log2_n))
            std::cout << format_number(vv) << ',' << format_number(pt.log2_n) << ',' << format_number(pt.log2_k) << ','
                      << format_number(pt.value) << ',' << format_number(pt.asymptote) << '\n';
    return kExitOk;
}

int cmd_threshold(const CommonFlags& f, const ProblemFlags& p, std::optional<double> lo, std::optional<double> hi,
                  std::optional<double> tol) {
    ExperimentConfig cfg = build_config(f, &p, ExperimentKind::Threshold);
    if (lo) cfg.delta_lo = *lo;
    if (hi) cfg.delta_hi = *hi;
    if (tol) cfg.delta_tol = *tol;
    validate(cfg);
    if (!f.out.empty()) {
        for (const auto& path : run_experiment(cfg, progress(f)).files) std::cout << path.string() << '\n';
        return kExitOk;
    }
    SeOptions opt;
    opt.t_max = cfg.se_t_max;
    opt.tol = cfg.se_tol;
    auto show = [](const char* label, auto&& compute) {
        try {
            const ThresholdResult r = compute();
            std::printf("%-22s %.6f  [%.6f, %.6f]\n", label, r.delta, r.lo, r.hi);
        } catch (const BracketError& e) {
            std::printf("%-22s none (%s)\n", label, e.what());
        }
    };
    show("delta* (bisection)", [&] {
        return reconstruction_threshold(cfg.channel, cfg.prior, cfg.delta_lo, cfg.delta_hi, cfg.delta_tol, opt);
    });
    if (cfg.channel.kind == ChannelKind::Linear && cfg.prior.min_amplitude() > 0.0)
        std::printf("%-22s %.6f\n", "delta* (closed form)",
                    prop1_threshold(cfg.prior.min_amplitude(), cfg.channel.noise_variance));
    show("delta_w* (chart)", [&] {
        return weak_reconstruction_threshold(cfg.channel, cfg.prior, cfg.delta_lo, cfg.delta_hi, cfg.delta_tol);
    });
    return kExitOk;
}

int cmd_plot(const CommonFlags& f) {
    ExperimentConfig cfg = build_config(f, nullptr, std::nullopt);
    const std::string name = figure_script_name(cfg);
    if (name.empty()) throw ConfigError("experiment '" + std::string(to_string(cfg.kind)) + "' has no figure script");
    std::filesystem::create_directories(cfg.output);
    const auto path = cfg.output / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << gnuplot_script(cfg);
    std::cout << path.string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian GAMP for sublinear sparsity: state evolution, thresholds and Monte Carlo benchmarks"};
    app.require_subcommand(1);

    CommonFlags common;
    ProblemFlags problem;
    std::optional<double> gamma, lo, hi, tol;
    std::vector<double> lemma_v, log2n;

    auto* se = app.add_subcommand("se", "Run the state-evolution recursion");
    add_common(se, common);
    add_problem(se, problem);

    auto* run = app.add_subcommand("run", "Run an experiment config");
    add_common(run, common);

    auto* bench = app.add_subcommand("bench", "Time the algorithms of a Monte Carlo config");
    add_common(bench, common);

    auto* lemma = app.add_subcommand("lemma1", "Expected error of the Bayesian estimator versus N");
    add_common(lemma, common);
    add_problem(lemma, problem);
    lemma->add_option("--gamma", gamma, "Sparsity exponent, k = N^gamma");
    lemma->add_option("--v", lemma_v, "Noise level v (repeatable)");
    lemma->add_option("--log2n", log2n, "log2 N grid (repeatable)");

    auto* thr = app.add_subcommand("threshold", "Reconstruction thresholds");
    add_common(thr, common);
    add_problem(thr, problem);
    thr->add_option("--lo", lo, "Lower delta bracket");
    thr->add_option("--hi", hi, "Upper delta bracket");
    thr->add_option("--tol", tol, "Bracket width");

    auto* plot = app.add_subcommand("plot", "Write the gnuplot script of a config");
    add_common(plot, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*se) return cmd_se(common, problem);
        if (*run) return cmd_run(common, false);
        if (*bench) return cmd_run(common, true);
        if (*lemma) return cmd_lemma1(common, problem, gamma, lemma_v, log2n);
        if (*thr) return cmd_threshold(common, problem, lo, hi, tol);
        if (*plot) return cmd_plot(common);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const BracketError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure in " << e.where() << ": " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
