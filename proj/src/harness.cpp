#include "sgamp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "sgamp/baselines.hpp"
#include "sgamp/csv.hpp"
#include "sgamp/errors.hpp"
#include "sgamp/gamp.hpp"
#include "sgamp/metrics.hpp"
#include "sgamp/state_evolution.hpp"

namespace sgamp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool uses_lambda(Algorithm a) { return a == Algorithm::Fista || a == Algorithm::Glasso; }

int iteration_budget(const ExperimentConfig& cfg, const AlgorithmSpec& spec, const ProblemDims& dims) {
    if (spec.iterations > 0) return spec.iterations;
    switch (spec.algorithm) {
    case Algorithm::Fista:
    case Algorithm::Glasso: return cfg.channel.kind == ChannelKind::Linear ? 1000 : 20;
    case Algorithm::Omp: return static_cast<int>(dims.k);
    default: return cfg.iterations;
    }
}

double lambda_center(const ExperimentConfig& cfg, const AlgorithmSpec& spec, const ProblemDims& dims,
                     const TrialInstance& inst) {
    if (spec.lambda) return *spec.lambda;
    if (cfg.channel.noise_variance > 0.0) return lambda_default(cfg.channel.noise_variance, dims.m, dims.n);
    return lambda_max(inst.a, inst.y) / 10.0;
}

std::vector<double> lambda_factors(const AlgorithmSpec& spec) {
    if (spec.lambda || spec.lambda_points == 1) return {1.0};
    std::vector<double> f(static_cast<std::size_t>(spec.lambda_points));
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double t = 2.0 * static_cast<double>(j) / static_cast<double>(f.size() - 1) - 1.0;
        f[j] = std::pow(10.0, spec.lambda_decades * t);
    }
    return f;
}

struct AlgoRun {
    std::vector<TrialRecord> rows;
    std::optional<std::string> failure;
};

class RowSink {
public:
    RowSink(AlgoRun& run, const TrialInstance& inst, std::size_t delta_index, double delta_eff, std::string algorithm,
            int trial)
        : run_(run), inst_(inst), di_(delta_index), de_(delta_eff), alg_(std::move(algorithm)), trial_(trial) {}

    void metrics(int iter, const Vector& x_hat, bool final) {
        TrialRecord r = base(iter, final);
        r.use = metric_unnormalized(x_hat, inst_.truth.x);
        r.nse = metric_normalized(x_hat, inst_.truth.x).value;
        if (final) r.support_ok = support_recovered(x_hat, inst_.truth.support);
        run_.rows.push_back(std::move(r));
    }

    void values(int iter, std::optional<double> use, std::optional<double> nse, bool final) {
        TrialRecord r = base(iter, final);
        r.use = use;
        r.nse = nse;
        run_.rows.push_back(std::move(r));
    }

    void failed(int iter, bool final) { values(iter, kNaN, kNaN, final); }

private:
    TrialRecord base(int iter, bool final) const {
        TrialRecord r;
        r.delta_index = di_;
        r.delta_eff = de_;
        r.algorithm = alg_;
        r.trial = trial_;
        r.iter = iter;
        r.final = final;
        return r;
    }

    AlgoRun& run_;
    const TrialInstance& inst_;
    std::size_t di_;
    double de_;
    std::string alg_;
    int trial_;
};

AlgoRun run_algorithm(const ExperimentConfig& cfg, const AlgorithmSpec& spec, const ProblemDims& dims,
                      const TrialInstance& inst, std::size_t delta_index, int trial, double lambda_factor,
                      bool all_iterations) {
    AlgoRun run;
    RowSink sink(run, inst, delta_index, dims.delta_eff(), spec.label(), trial);
    const int budget = iteration_budget(cfg, spec, dims);
    const auto start = std::chrono::steady_clock::now();

    switch (spec.algorithm) {
    case Algorithm::Gamp: {
        GampOptions opt;
        opt.iterations = budget;
        opt.damping = spec.damping;
        const GampTrace trace = gamp_run(inst.a, inst.y, cfg.channel, cfg.prior, dims, opt, &inst.truth);
        const int done = trace.iterations();
        for (int j = 0; j <= done; ++j) {
            const auto& rec = trace.records[static_cast<std::size_t>(j)];
            if (j == budget && trace.ok()) {
                sink.metrics(j, trace.x_hat, true);
            } else {
                sink.values(j, rec.square_error, rec.normalized_error, false);
            }
        }
        if (!trace.ok()) {
            run.failure = *trace.failure;
            for (int j = done + 1; j <= budget; ++j) sink.failed(j, j == budget);
            if (done == budget) {
                // The failing sweep recorded nothing; the final row carries the failure.
                run.rows.back().final = false;
                sink.failed(budget, true);
            }
        }
        break;
    }
    case Algorithm::Fista:
    case Algorithm::Glasso: {
        FistaConfig fc;
        fc.lambda = lambda_center(cfg, spec, dims, inst) * lambda_factor;
        fc.max_iters = budget;
        fc.tolerance = all_iterations ? 0.0 : spec.tolerance;
        const bool normalize = spec.algorithm == Algorithm::Glasso;
        auto report = [&](const Vector& x) {
            if (!normalize || x.norm() == 0.0) return Vector(x);
            return Vector(x / x.norm());
        };
        IterateObserver observe;
        if (all_iterations) {
            sink.metrics(0, Vector::Zero(inst.a.cols()), false);
            observe = [&](int it, const Vector& x) {
                if (it < budget) sink.metrics(it, report(x), false);
            };
        }
        try {
            const FistaResult fr =
                spec.algorithm == Algorithm::Glasso ? glasso(inst.a, inst.y, fc, observe) : fista(inst.a, inst.y, fc, observe);
            sink.metrics(budget, report(fr.x_hat), true);
        } catch (const NumericalError& e) {
            run.failure = e.what();
            sink.failed(budget, true);
        }
        break;
    }
    case Algorithm::Omp: {
        if (all_iterations) sink.metrics(0, Vector::Zero(inst.a.cols()), false);
        sink.metrics(budget, omp(inst.a, inst.y, static_cast<std::size_t>(budget)).x_hat, true);
        break;
    }
    case Algorithm::Biht: {
        BihtConfig bc;
        bc.k = dims.k;
        bc.max_iters = budget;
        bc.step = spec.step;
        IterateObserver observe;
        if (all_iterations) {
            observe = [&](int it, const Vector& x) {
                if (it < budget) sink.metrics(it, x, false);
            };
        }
        sink.metrics(budget, biht(inst.a, inst.y, bc, observe).x_hat, true);
        break;
    }
    }
    if (cfg.timing) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        run.rows.back().seconds = secs;
    }
    return run;
}

double selection_metric(const ExperimentConfig& cfg, const AlgoRun& run) {
    const auto& r = run.rows.back();
    const auto v = cfg.channel.kind == ChannelKind::Linear ? r.use : r.nse;
    return v && std::isfinite(*v) ? *v : std::numeric_limits<double>::infinity();
}

std::size_t select_lambda(const ExperimentConfig& cfg, const AlgorithmSpec& spec, const ProblemDims& dims,
                          std::size_t delta_index, const std::vector<double>& factors, int threads) {
    if (factors.size() == 1) return 0;
    const std::size_t pilots =
        spec.pilot_trials > 0 ? std::min<std::size_t>(spec.pilot_trials, static_cast<std::size_t>(cfg.trials))
                              : static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<double>> metric(factors.size(), std::vector<double>(pilots));
    parallel_for(pilots, threads, [&](std::size_t t) {
        const TrialInstance inst = make_trial(cfg, dims, delta_index, t);
        for (std::size_t j = 0; j < factors.size(); ++j)
            metric[j][t] = selection_metric(
                cfg, run_algorithm(cfg, spec, dims, inst, delta_index, static_cast<int>(t), factors[j], false));
    });
    std::size_t best = 0;
    double best_median = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < factors.size(); ++j) {
        const double med = quantile(metric[j], 0.5);
        if (med < best_median) {
            best_median = med;
            best = j;
        }
    }
    return best;
}

std::filesystem::path prepare_output(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ConfigError("config field 'output': cannot create directory '" + dir.string() + "'");
    return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("config field 'output': cannot write '" + path.string() + "'");
    return out;
}

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
    return s;
}

CsvHeader base_header(const ExperimentConfig& cfg, const std::vector<double>& delta_eff) {
    CsvHeader h;
    h.add("experiment", std::string(to_string(cfg.kind)));
    h.add("name", cfg.name);
    h.add("schema_version", std::to_string(cfg.schema_version));
    h.add("config_hash", hex64(config_hash(cfg)));
    h.add("seed", std::to_string(cfg.master_seed));
    h.add("channel", cfg.channel.name());
    h.add("sigma2", format_number(cfg.channel.noise_variance));
    h.add("prior", cfg.prior.describe());
    if (cfg.kind == ExperimentKind::GampSweep || cfg.kind == ExperimentKind::Convergence) {
        h.add("n", std::to_string(cfg.n));
        h.add("k", std::to_string(cfg.sparsity()));
        h.add("delta_requested", join_numbers(cfg.deltas));
    }
    h.add("delta_eff", join_numbers(delta_eff));
    return h;
}

SeOptions se_options(const ExperimentConfig& cfg) {
    SeOptions o;
    o.t_max = cfg.se_t_max;
    o.tol = cfg.se_tol;
    return o;
}

std::optional<double> try_weak_threshold(const ExperimentConfig& cfg) {
    try {
        return weak_reconstruction_threshold(cfg.channel, cfg.prior, cfg.delta_lo, cfg.delta_hi, cfg.delta_tol).delta;
    } catch (const BracketError&) {
        return std::nullopt;
    }
}

void write_script(const ExperimentConfig& cfg, RunReport& report, std::optional<double> weak) {
    if (!cfg.plot) return;
    const std::string name = figure_script_name(cfg);
    if (name.empty()) return;
    const auto path = cfg.output / name;
    auto out = open_output(path);
    out << gnuplot_script(cfg, weak);
    report.files.push_back(path);
}

void log_line(std::ostream* log, const std::string& s) {
    if (log) *log << s << '\n' << std::flush;
}

RunReport run_se(const ExperimentConfig& cfg, std::ostream* log) {
    RunReport report;
    const bool chart = cfg.kind == ExperimentKind::SeChart;
    const auto header = base_header(cfg, cfg.deltas);
    const auto opts = se_options(cfg);

    std::ostringstream trace_csv, limit_csv, chart_csv;
    trace_csv << "delta,t,v_in,v_out\n";
    limit_csv << "delta,v_in_limit,converged,iterations,fixed_points,interior_crossings,boundary_zero,tangency\n";
    chart_csv << "delta,x,phi,psi\n";
    for (double delta : cfg.deltas) {
        const SeTrace tr = se_run(cfg.channel, cfg.prior, delta, opts);
        for (std::size_t t = 0; t < tr.steps.size(); ++t)
            trace_csv << format_number(delta) << ',' << t << ',' << format_number(tr.steps[t].v_in) << ','
                      << format_number(tr.steps[t].v_out) << '\n';
        const auto grid = default_chart_grid(cfg.channel, cfg.prior, delta, cfg.chart_points);
        const ChartCurves c = exit_chart(cfg.channel, cfg.prior, delta, grid);
        const FixedPointCount fp = count_fixed_points(c);
        limit_csv << format_number(delta) << ',' << format_number(tr.v_in_limit) << ',' << (tr.converged ? 1 : 0) << ','
                  << tr.steps.size() << ',' << fp.count << ',' << fp.interior_crossings << ','
                  << (fp.boundary_zero ? 1 : 0) << ',' << (fp.tangency ? 1 : 0) << '\n';
        if (chart)
            for (std::size_t i = 0; i < c.x.size(); ++i)
                chart_csv << format_number(delta) << ',' << format_number(c.x[i]) << ',' << format_number(c.phi[i]) << ','
                          << format_number(c.psi[i]) << '\n';
        log_line(log, "se delta=" + format_number(delta) + " v_in_limit=" + format_number(tr.v_in_limit) +
                          " fixed_points=" + std::to_string(fp.count));
    }
    auto emit = [&](const char* file, const std::ostringstream& body) {
        const auto path = cfg.output / file;
        auto out = open_output(path);
        header.write(out);
        out << body.str();
        report.files.push_back(path);
    };
    emit("se_trace.csv", trace_csv);
    emit("se_limits.csv", limit_csv);
    if (chart) emit("chart.csv", chart_csv);
    write_script(cfg, report, std::nullopt);
    return report;
}

RunReport run_lemma1(const ExperimentConfig& cfg, std::ostream* log) {
    RunReport report;
    const auto path = cfg.output / "lemma1.csv";
    auto out = open_output(path);
    auto header = base_header(cfg, {});
    header.add("gamma", format_number(*cfg.gamma));
    header.write(out);
    out << "v,log2_n,log2_k,value,asymptote,deviation\n";
    for (double v : cfg.lemma_v) {
        for (const auto& p : lemma1_curve(cfg.prior, v, *cfg.gamma, cfg.log2_n)) {
            out << format_number(v) << ',' << format_number(p.log2_n) << ',' << format_number(p.log2_k) << ','
                << format_number(p.value) << ',' << format_number(p.asymptote) << ','
                << format_number(std::abs(p.value - p.asymptote)) << '\n';
        }
        log_line(log, "lemma1 v=" + format_number(v) + " done");
    }
    report.files.push_back(path);
    write_script(cfg, report, std::nullopt);
    return report;
}

RunReport run_threshold(const ExperimentConfig& cfg, std::ostream* log) {
    RunReport report;
    const auto path = cfg.output / "threshold.csv";
    auto out = open_output(path);
    base_header(cfg, {}).write(out);
    out << "quantity,delta,lo,hi,evaluations\n";
    auto row = [&](const char* name, std::optional<ThresholdResult> r) {
        if (r)
            out << name << ',' << format_number(r->delta) << ',' << format_number(r->lo) << ',' << format_number(r->hi)
                << ',' << r->evaluations << '\n';
        else
            out << name << ",nan,,,\n";
        log_line(log, std::string(name) + " = " + (r ? format_number(r->delta) : std::string("none in bracket")));
    };
    std::optional<ThresholdResult> strong, weak;
    try {
        strong = reconstruction_threshold(cfg.channel, cfg.prior, cfg.delta_lo, cfg.delta_hi, cfg.delta_tol, se_options(cfg));
    } catch (const BracketError&) {
    }
    try {
        weak = weak_reconstruction_threshold(cfg.channel, cfg.prior, cfg.delta_lo, cfg.delta_hi, cfg.delta_tol);
    } catch (const BracketError&) {
    }
    row("reconstruction", strong);
    row("weak_reconstruction", weak);
    if (cfg.channel.kind == ChannelKind::Linear && cfg.prior.min_amplitude() > 0.0) {
        const double closed = prop1_threshold(cfg.prior.min_amplitude(), cfg.channel.noise_variance);
        row("closed_form", ThresholdResult{closed, closed, closed, 0});
    }
    report.files.push_back(path);
    return report;
}

RunReport run_sweep(const ExperimentConfig& cfg, std::ostream* log) {
    RunReport report;
    const MonteCarloResult mc = run_monte_carlo(cfg, resolve_threads(cfg.threads), log);
    std::vector<double> delta_eff;
    for (const auto& d : mc.dims) delta_eff.push_back(d.delta_eff());
    auto header = base_header(cfg, delta_eff);
    header.add("trials", std::to_string(cfg.trials));
    for (const auto& l : mc.lambdas)
        header.add("lambda",
                   l.algorithm + " delta_eff=" + format_number(delta_eff[l.delta_index]) + " factor=" +
                       format_number(l.factor) + (l.lambda ? " value=" + format_number(*l.lambda) : std::string()));
    std::optional<double> weak;
    if (cfg.kind == ExperimentKind::GampSweep) {
        weak = try_weak_threshold(cfg);
        header.add("weak_threshold", weak ? format_number(*weak) : std::string("none"));
    }
    report.failed_runs = mc.failures.size();
    header.add("failed_runs", std::to_string(mc.failures.size()));

    const auto raw = cfg.output / "raw.csv";
    {
        auto out = open_output(raw);
        header.write(out);
        write_raw_csv(out, mc.records, cfg.timing);
    }
    const auto summary = cfg.output / "summary.csv";
    {
        auto out = open_output(summary);
        header.write(out);
        write_summary_csv(out, summarize_records(mc.records));
    }
    report.files = {raw, summary};
    for (const auto& f : mc.failures) log_line(log, "failed run " + f);
    write_script(cfg, report, weak);
    return report;
}

} // namespace

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SUBLINEAR_GAMP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t error_index = count;
    std::exception_ptr error;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

TrialInstance make_trial(const ExperimentConfig& cfg, const ProblemDims& dims, std::size_t delta_index,
                         std::size_t trial) {
    Rng rng = Rng::for_stream(cfg.master_seed, delta_index, trial);
    TrialInstance inst;
    inst.truth = sample_signal(dims, cfg.prior, rng);
    inst.a = sample_matrix(dims, rng);
    inst.y = apply_channel(cfg.channel, inst.a * inst.truth.x, rng);
    return inst;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, int threads, std::ostream* log) {
    validate(cfg);
    const bool all_iterations = cfg.kind == ExperimentKind::Convergence;
    MonteCarloResult res;
    const std::size_t k = cfg.sparsity();
    for (double d : cfg.deltas) res.dims.push_back(ProblemDims::make(cfg.n, k, d));

    for (std::size_t di = 0; di < res.dims.size(); ++di) {
        const ProblemDims& dims = res.dims[di];
        std::vector<double> factor(cfg.algorithms.size(), 1.0);
        for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
            const auto& spec = cfg.algorithms[ai];
            if (!uses_lambda(spec.algorithm)) continue;
            const auto grid = lambda_factors(spec);
            factor[ai] = grid[select_lambda(cfg, spec, dims, di, grid, threads)];
            LambdaChoice choice{di, spec.label(), factor[ai], std::nullopt};
            if (spec.lambda)
                choice.lambda = *spec.lambda;
            else if (cfg.channel.noise_variance > 0.0)
                choice.lambda = lambda_default(cfg.channel.noise_variance, dims.m, dims.n) * factor[ai];
            res.lambdas.push_back(choice);
        }

        const auto trials = static_cast<std::size_t>(cfg.trials);
        std::vector<std::vector<AlgoRun>> per_trial(trials);
        parallel_for(trials, threads, [&](std::size_t t) {
            const TrialInstance inst = make_trial(cfg, dims, di, t);
            auto& runs = per_trial[t];
            for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai)
                runs.push_back(run_algorithm(cfg, cfg.algorithms[ai], dims, inst, di, static_cast<int>(t), factor[ai],
                                             all_iterations));
        });
        for (std::size_t t = 0; t < trials; ++t) {
            for (auto& run : per_trial[t]) {
                if (run.failure)
                    res.failures.push_back(std::to_string(di) + "/" + std::to_string(t) + "/" + run.rows.back().algorithm +
                                           ": " + *run.failure);
                for (auto& r : run.rows) res.records.push_back(std::move(r));
            }
        }
        log_line(log, "delta=" + format_number(dims.delta) + " delta_eff=" + format_number(dims.delta_eff()) +
                          " M=" + std::to_string(dims.m) + " trials=" + std::to_string(trials) + " done");
    }
    return res;
}

std::vector<SummaryRow> summarize_records(const std::vector<TrialRecord>& records) {
    struct Group {
        double delta_eff;
        std::string algorithm;
        int iter;
        bool final = false;
        std::vector<double> use, nse;
        std::size_t support_n = 0, support_ok = 0;
    };
    using Key = std::tuple<std::size_t, std::size_t, int>; // delta index, algorithm rank, iter
    std::map<std::string, std::size_t> alg_rank;
    std::map<Key, Group> groups;
    for (const auto& r : records) {
        const auto rank = alg_rank.emplace(r.algorithm, alg_rank.size()).first->second;
        auto [it, fresh] = groups.try_emplace(Key{r.delta_index, rank, r.iter});
        Group& g = it->second;
        if (fresh) {
            g.delta_eff = r.delta_eff;
            g.algorithm = r.algorithm;
            g.iter = r.iter;
        }
        g.final = g.final || r.final;
        g.use.push_back(r.use.value_or(kNaN));
        g.nse.push_back(r.nse.value_or(kNaN));
        if (r.support_ok) {
            ++g.support_n;
            g.support_ok += *r.support_ok ? 1 : 0;
        }
    }
    std::vector<SummaryRow> out;
    out.reserve(groups.size());
    for (const auto& [key, g] : groups) {
        SummaryRow s;
        s.delta_eff = g.delta_eff;
        s.algorithm = g.algorithm;
        s.iter = g.iter;
        s.final = g.final;
        const SummaryStats u = summarize(g.use);
        const SummaryStats e = summarize(g.nse);
        s.count = u.count;
        s.failed = u.failed;
        s.use_mean = u.mean, s.use_median = u.median, s.use_p10 = u.p10, s.use_p90 = u.p90;
        s.nse_mean = e.mean, s.nse_median = e.median, s.nse_p10 = e.p10, s.nse_p90 = e.p90;
        if (g.support_n > 0) s.support_rate = static_cast<double>(g.support_ok) / static_cast<double>(g.support_n);
        out.push_back(std::move(s));
    }
    return out;
}

void write_raw_csv(std::ostream& os, const std::vector<TrialRecord>& records, bool timing) {
    os << "delta_eff,algorithm,trial,iter,use,nse,support_ok,seconds\n";
    for (const auto& r : records) {
        os << format_number(r.delta_eff) << ',' << r.algorithm << ',' << r.trial << ',' << r.iter << ','
           << format_number(r.use) << ',' << format_number(r.nse) << ','
           << (r.support_ok ? (*r.support_ok ? "1" : "0") : "") << ',' << (timing ? format_number(r.seconds) : "")
           << '\n';
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "delta_eff,algorithm,iter,final,count,failed,use_mean,use_median,use_p10,use_p90,"
          "nse_mean,nse_median,nse_p10,nse_p90,support_rate\n";
    for (const auto& s : rows) {
        os << format_number(s.delta_eff) << ',' << s.algorithm << ',' << s.iter << ',' << (s.final ? 1 : 0) << ','
           << s.count << ',' << s.failed << ',' << format_number(s.use_mean) << ',' << format_number(s.use_median) << ','
           << format_number(s.use_p10) << ',' << format_number(s.use_p90) << ',' << format_number(s.nse_mean) << ','
           << format_number(s.nse_median) << ',' << format_number(s.nse_p10) << ',' << format_number(s.nse_p90) << ','
           << format_number(s.support_rate) << '\n';
    }
}

RunReport run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    validate(cfg);
    prepare_output(cfg.output);
    switch (cfg.kind) {
    case ExperimentKind::SeChart:
    case ExperimentKind::SeSweep: return run_se(cfg, log);
    case ExperimentKind::Lemma1: return run_lemma1(cfg, log);
    case ExperimentKind::Threshold: return run_threshold(cfg, log);
    case ExperimentKind::GampSweep:
    case ExperimentKind::Convergence: return run_sweep(cfg, log);
    }
    return {};
}

std::string figure_script_name(const ExperimentConfig& cfg) {
    const bool linear = cfg.channel.kind == ChannelKind::Linear;
    switch (cfg.kind) {
    case ExperimentKind::Lemma1: return "fig1.gp";
    case ExperimentKind::SeChart: return linear ? "fig2.gp" : "fig5.gp";
    case ExperimentKind::GampSweep: return linear ? "fig3.gp" : "fig6.gp";
    case ExperimentKind::Convergence: return "fig4.gp";
    default: return {};
    }
}

std::string gnuplot_script(const ExperimentConfig& cfg, std::optional<double> weak_threshold) {
    const std::string name = figure_script_name(cfg);
    if (name.empty()) return {};
    const std::string stem = name.substr(0, name.size() - 3);
    std::ostringstream gp;
    gp << "# " << cfg.name << "\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << stem << ".png'\n"
       << "set key outside right\n"
       << "set grid\n";
    const bool linear = cfg.channel.kind == ChannelKind::Linear;
    switch (cfg.kind) {
    case ExperimentKind::Lemma1:
        gp << "set xlabel 'log2 N'\nset ylabel 'expected square error'\n"
           << "plot for [v in '" << join_numbers(cfg.lemma_v) << "'] 'lemma1.csv' using "
           << "(column(1) == real(v) ? $2 : NaN):4 with linespoints title sprintf('v = %s', v), \\\n"
           << "     for [v in '" << join_numbers(cfg.lemma_v) << "'] 'lemma1.csv' using "
           << "(column(1) == real(v) ? $2 : NaN):5 with lines dashtype 2 notitle\n";
        break;
    case ExperimentKind::SeChart:
        gp << "set logscale xy\nset xlabel 'x = 2 v_out / delta'\nset ylabel 'v_in'\n"
           << "plot for [d in '" << join_numbers(cfg.deltas) << "'] 'chart.csv' using "
           << "(column(1) == real(d) ? $2 : NaN):4 with lines title sprintf('outer, delta = %s', d), \\\n"
           << "     'chart.csv' using 2:3 with lines lw 2 title 'inner'\n";
        break;
    case ExperimentKind::GampSweep: {
        const int col = linear ? 8 : 12; // use_median / nse_median
        gp << "set logscale y\nset xlabel 'delta'\nset ylabel '" << (linear ? "median square error" : "median normalized error")
           << "'\n";
        if (weak_threshold)
            gp << "set arrow from " << format_number(*weak_threshold) << ", graph 0 to " << format_number(*weak_threshold)
               << ", graph 1 nohead dashtype 2\n";
        gp << "plot for [alg in '";
        for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) gp << (i ? " " : "") << cfg.algorithms[i].label();
        gp << "'] 'summary.csv' using (strcol(2) eq alg && $4 == 1 ? $1 : NaN):" << col
           << " with linespoints title alg\n";
        break;
    }
    case ExperimentKind::Convergence:
        gp << "set logscale xy\nset xlabel 'iteration'\nset ylabel 'median square error'\n"
           << "plot for [alg in '";
        for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) gp << (i ? " " : "") << cfg.algorithms[i].label();
        gp << "'] 'summary.csv' using (strcol(2) eq alg ? $3 : NaN):8 with linespoints title alg\n";
        break;
    default: break;
    }
    return gp.str();
}

} // namespace sgamp
