#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sgamp/baselines.hpp"
#include "sgamp/config.hpp"
#include "sgamp/denoise.hpp"
#include "sgamp/errors.hpp"
#include "sgamp/gamp.hpp"
#include "sgamp/harness.hpp"
#include "sgamp/metrics.hpp"
#include "sgamp/state_evolution.hpp"

namespace py = pybind11;
using namespace sgamp;

namespace {

py::dict trace_to_dict(const GampTrace& t) {
    py::list records;
    for (const auto& r : t.records) {
        py::dict d;
        d["iter"] = r.iter;
        d["v_in"] = r.v_in;
        d["v_out"] = r.v_out;
        d["xi_out"] = r.xi_out;
        d["xi_in"] = r.xi_in;
        d["z_residual"] = r.z_residual;
        d["square_error"] = r.square_error;
        d["z_error"] = r.z_error;
        d["normalized_error"] = r.normalized_error;
        records.append(d);
    }
    py::dict out;
    out["records"] = records;
    out["x_hat"] = t.x_hat;
    out["clamp_events"] = t.clamp_events;
    out["failure"] = t.failure;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bayesian GAMP for sublinear sparsity";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<BracketError>(m, "BracketError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Prior>(m, "Prior")
        .def_static("gaussian", &Prior::gaussian, py::arg("variance"))
        .def_static("constant_amplitude", &Prior::constant_amplitude, py::arg("amplitude"))
        .def_static(
            "discrete",
            [](const std::vector<std::pair<double, double>>& pts) {
                std::vector<MixturePoint> v;
                for (auto [u, p] : pts) v.push_back({u, p});
                return Prior::discrete(std::move(v));
            },
            py::arg("points"))
        .def_static("parse", &Prior::parse, py::arg("text"))
        .def("second_moment", &Prior::second_moment)
        .def("min_amplitude", &Prior::min_amplitude)
        .def("describe", &Prior::describe)
        .def("__repr__", [](const Prior& p) { return "Prior('" + p.describe() + "')"; });

    py::enum_<ChannelKind>(m, "ChannelKind")
        .value("LINEAR", ChannelKind::Linear)
        .value("ONE_BIT_SIGN", ChannelKind::OneBitSign);

    py::class_<Channel>(m, "Channel")
        .def_static("linear", &Channel::linear, py::arg("sigma2"))
        .def_static("one_bit", &Channel::one_bit, py::arg("sigma2"))
        .def_readonly("kind", &Channel::kind)
        .def_readonly("noise_variance", &Channel::noise_variance)
        .def("name", &Channel::name);

    py::class_<ProblemDims>(m, "ProblemDims")
        .def_static("make", &ProblemDims::make, py::arg("n"), py::arg("k"), py::arg("delta"))
        .def_readonly("n", &ProblemDims::n)
        .def_readonly("k", &ProblemDims::k)
        .def_readonly("m", &ProblemDims::m)
        .def_readonly("delta", &ProblemDims::delta)
        .def("delta_eff", &ProblemDims::delta_eff);

    m.def(
        "sample_instance",
        [](const ProblemDims& dims, const Prior& prior, const Channel& channel, std::uint64_t seed) {
            Rng rng(seed);
            SignalInstance s = sample_signal(dims, prior, rng);
            Matrix a = sample_matrix(dims, rng);
            Vector y = apply_channel(channel, a * s.x, rng);
            py::dict d;
            d["x"] = s.x;
            d["support"] = s.support;
            d["a"] = a;
            d["y"] = y;
            return d;
        },
        py::arg("dims"), py::arg("prior"), py::arg("channel"), py::arg("seed"),
        "Signal, sensing matrix and measurements drawn from one seeded stream.");

    m.def(
        "gamp",
        [](const Matrix& a, const Vector& y, const Channel& channel, const Prior& prior, const ProblemDims& dims,
           int iterations, std::optional<Vector> x_true) {
            GampOptions opt;
            opt.iterations = iterations;
            if (!x_true) return trace_to_dict(gamp_run(a, y, channel, prior, dims, opt));
            SignalInstance truth;
            truth.x = *x_true;
            for (Eigen::Index i = 0; i < truth.x.size(); ++i)
                if (truth.x[i] != 0.0) truth.support.push_back(static_cast<std::size_t>(i));
            return trace_to_dict(gamp_run(a, y, channel, prior, dims, opt, &truth));
        },
        py::arg("a"), py::arg("y"), py::arg("channel"), py::arg("prior"), py::arg("dims"), py::arg("iterations") = 20,
        py::arg("x_true") = py::none());

    m.def("truncated_second_moment", &truncated_second_moment, py::arg("prior"), py::arg("x"));
    m.def("se_outer", &se_outer, py::arg("channel"), py::arg("v_in"), py::arg("order") = kDefaultHermiteOrder);
    m.def(
        "se_run",
        [](const Channel& channel, const Prior& prior, double delta, int t_max, double tol) {
            SeOptions o;
            o.t_max = t_max;
            o.tol = tol;
            const SeTrace t = se_run(channel, prior, delta, o);
            std::vector<double> v_in, v_out;
            for (const auto& s : t.steps) {
                v_in.push_back(s.v_in);
                v_out.push_back(s.v_out);
            }
            py::dict d;
            d["v_in"] = v_in;
            d["v_out"] = v_out;
            d["v_in_limit"] = t.v_in_limit;
            d["converged"] = t.converged;
            return d;
        },
        py::arg("channel"), py::arg("prior"), py::arg("delta"), py::arg("t_max") = 10000, py::arg("tol") = 1e-12);
    m.def(
        "exit_chart",
        [](const Channel& channel, const Prior& prior, double delta, std::size_t points) {
            const auto grid = default_chart_grid(channel, prior, delta, points);
            const ChartCurves c = exit_chart(channel, prior, delta, grid);
            const FixedPointCount fp = count_fixed_points(c);
            py::dict d;
            d["x"] = c.x;
            d["phi"] = c.phi;
            d["psi"] = c.psi;
            d["fixed_points"] = fp.count;
            d["tangency"] = fp.tangency;
            return d;
        },
        py::arg("channel"), py::arg("prior"), py::arg("delta"), py::arg("points") = 4000);
    m.def(
        "reconstruction_threshold",
        [](const Channel& c, const Prior& p, double lo, double hi, double tol) {
            return reconstruction_threshold(c, p, lo, hi, tol).delta;
        },
        py::arg("channel"), py::arg("prior"), py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-4);
    m.def(
        "weak_reconstruction_threshold",
        [](const Channel& c, const Prior& p, double lo, double hi, double tol) {
            return weak_reconstruction_threshold(c, p, lo, hi, tol).delta;
        },
        py::arg("channel"), py::arg("prior"), py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-4);
    m.def("prop1_threshold", &prop1_threshold, py::arg("u_min"), py::arg("sigma2"));
    m.def(
        "lemma1_expected_error",
        [](const Prior& p, double v, double log2_n, double log2_k) { return lemma1_expected_error(p, v, log2_n, log2_k); },
        py::arg("prior"), py::arg("v"), py::arg("log2_n"), py::arg("log2_k"));

    m.def(
        "scalar_posterior",
        [](const Prior& prior, double n, double k, double v_tilde, double y) {
            const ScalarPosterior s = scalar_posterior(InnerDenoiserParams::make(prior, n, k, v_tilde), y);
            py::dict d;
            d["activity"] = s.activity;
            d["mean"] = s.mean;
            d["variance"] = s.variance;
            d["derivative"] = s.derivative;
            return d;
        },
        py::arg("prior"), py::arg("n"), py::arg("k"), py::arg("v_tilde"), py::arg("y"));
    m.def(
        "outer_onebit",
        [](double z, double y, double v_in, double sigma2) {
            const OuterEval e = outer_onebit(z, y, v_in, sigma2);
            return std::make_pair(e.value, e.dz);
        },
        py::arg("z"), py::arg("y"), py::arg("v_in"), py::arg("sigma2"));

    m.def("omp", [](const Matrix& a, const Vector& y, std::size_t k) { return omp(a, y, k).x_hat; }, py::arg("a"),
          py::arg("y"), py::arg("k"));
    m.def(
        "fista",
        [](const Matrix& a, const Vector& y, double lambda, int max_iters) {
            FistaConfig c;
            c.lambda = lambda;
            c.max_iters = max_iters;
            const FistaResult r = fista(a, y, c);
            return std::make_pair(r.x_hat, r.objective);
        },
        py::arg("a"), py::arg("y"), py::arg("lam"), py::arg("max_iters") = 1000);
    m.def(
        "biht",
        [](const Matrix& a, const Vector& y, std::size_t k, int max_iters, double step) {
            BihtConfig c;
            c.k = k;
            c.max_iters = max_iters;
            c.step = step;
            return biht(a, y, c).x_hat;
        },
        py::arg("a"), py::arg("y"), py::arg("k"), py::arg("max_iters") = 20, py::arg("step") = 1.0);
    m.def("lambda_default", &lambda_default, py::arg("sigma2"), py::arg("m"), py::arg("n"));
    m.def("metric_unnormalized", &metric_unnormalized, py::arg("x_hat"), py::arg("x"));
    m.def(
        "metric_normalized", [](const Vector& a, const Vector& b) { return metric_normalized(a, b).value; },
        py::arg("x_hat"), py::arg("x"));

    m.def(
        "run_experiment",
        [](const std::string& json_text) {
            const ExperimentConfig cfg = parse_config(json_text);
            RunReport r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg);
            }
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(f.string());
            return files;
        },
        py::arg("config_json"), "Runs a JSON experiment config and returns the written file paths.");
}
