import csv
import json
import math
import os
import subprocess
from collections import defaultdict

import numpy as np
import pytest

import sublinear_gamp as sg


def read_csv(path):
    with open(path) as f:
        header = [line for line in f if line.startswith("#")]
    with open(path) as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    return header, rows


def test_module_surface():
    assert sg.__version__
    p = sg.Prior.parse("gauss:1")
    assert p.second_moment() == 1.0
    assert sg.Channel.one_bit(0.0).kind == sg.ChannelKind.ONE_BIT_SIGN


def test_gamp_recovers_above_threshold():
    dims = sg.ProblemDims.make(1024, 8, 2.0)
    prior = sg.Prior.gaussian(1.0)
    channel = sg.Channel.linear(1e-4)
    inst = sg.sample_instance(dims, prior, channel, 3)
    out = sg.gamp(inst["a"], inst["y"], channel, prior, dims, 20, inst["x"])
    assert out["failure"] is None
    assert len(out["records"]) == 21
    assert out["records"][-1]["square_error"] < 1e-2
    for r in out["records"][1:]:
        assert abs(r["v_out"] - r["z_residual"]) <= 1e-10 * r["v_out"]


def test_state_evolution_and_thresholds():
    prior = sg.Prior.gaussian(1.0)
    channel = sg.Channel.linear(1e-4)
    assert sg.se_run(channel, prior, 1.5)["v_in_limit"] < 1e-3
    assert sg.exit_chart(channel, prior, 1.5)["fixed_points"] == 1
    for u, s2 in [(1, 0), (2, 0.1), (1, 1)]:
        closed = sg.prop1_threshold(u, s2)
        assert closed == pytest.approx(2 * (1 + s2 / u**2), rel=1e-14)
        got = sg.reconstruction_threshold(sg.Channel.linear(s2), sg.Prior.constant_amplitude(u), 0.5, 10.0, 1e-5)
        assert abs(got - closed) < 1e-3
    # Gaussian truncated second moment against a closed form.
    x = 1.7
    r = math.sqrt(x)
    closed = math.erf(r / math.sqrt(2)) - 2 * r * math.exp(-x / 2) / math.sqrt(2 * math.pi)
    assert sg.truncated_second_moment(prior, x) == pytest.approx(closed, rel=1e-12)


def test_metrics_and_baselines():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(40)
    assert sg.metric_unnormalized(x, x) == 0.0
    assert sg.metric_normalized(-2 * x, x) == pytest.approx(4.0)
    assert sg.lambda_default(1e-4, 100, math.exp(10)) == pytest.approx(math.sqrt(8e-6), rel=1e-14)
    a = rng.standard_normal((30, 60))
    xs = np.zeros(60)
    xs[[4, 17]] = [1.0, -0.7]
    assert np.allclose(sg.omp(a, a @ xs, 2), xs, atol=1e-10)
    x_hat, objective = sg.fista(a, a @ xs, 1e-3, 2000)
    assert np.all(np.diff(objective) <= 0)
    assert np.linalg.norm(x_hat - xs) < 0.05


def test_config_error_is_value_error():
    with pytest.raises(ValueError, match="trails"):
        sg.run_experiment(json.dumps({"experiment": "gamp_sweep", "trails": 2}))


def test_summary_matches_independent_recomputation(tmp_path):
    cfg = {
        "experiment": "gamp_sweep",
        "dims": {"n": 256, "k": 4, "deltas": [1.0, 2.5]},
        "channel": {"kind": "linear", "snr_db": 30},
        "prior": "gauss:1",
        "algorithms": ["gamp", "omp"],
        "trials": 9,
        "iterations": 6,
        "seed": 5,
        "output": str(tmp_path),
    }
    files = sg.run_experiment(json.dumps(cfg))
    assert any(f.endswith("fig3.gp") for f in files)
    header, raw = read_csv(tmp_path / "raw.csv")
    assert any(h.startswith("# config_hash:") for h in header)
    assert any(h.startswith("# seed: 5") for h in header)
    assert any(h.startswith("# delta_eff:") for h in header)
    _, summary = read_csv(tmp_path / "summary.csv")

    groups = defaultdict(list)
    for r in raw:
        groups[(r["delta_eff"], r["algorithm"], r["iter"])].append(r)
    assert len(groups) == len(summary)
    for s in summary:
        g = groups[(s["delta_eff"], s["algorithm"], s["iter"])]
        for metric in ("use", "nse"):
            v = np.array([float(r[metric]) for r in g])
            v = v[~np.isnan(v)]
            assert int(s["count"]) == len(v)
            for name, ref in [
                ("mean", np.mean(v)),
                ("median", np.median(v)),
                ("p10", np.quantile(v, 0.1)),
                ("p90", np.quantile(v, 0.9)),
            ]:
                got = float(s[f"{metric}_{name}"])
                assert abs(got - ref) <= 1e-12 * max(abs(ref), 1e-300), (metric, name)
        flags = [r["support_ok"] for r in g if r["support_ok"]]
        if flags:
            assert float(s["support_rate"]) == pytest.approx(np.mean([f == "1" for f in flags]), rel=1e-12)


@pytest.mark.skipif("SGAMP_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_threshold_and_exit_codes(tmp_path):
    cli = os.environ["SGAMP_CLI"]
    out = subprocess.run(
        [cli, "threshold", "--channel", "linear", "--prior", "const:1", "--sigma2", "0.25"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert "2.5" in out.stdout
    missing = subprocess.run([cli, "run", "--config", str(tmp_path / "nope.json")], capture_output=True, text=True)
    assert missing.returncode == 2
    assert missing.stderr.strip()
