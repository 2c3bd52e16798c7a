import csv
import json
import math

import numpy as np
import pytest

from rmfront.cli import RunConfig, load_config, main, sweep_cases
from rmfront.errors import InvalidInput
from rmfront.model import ModelParams
from rmfront.pipeline import STATUSES, run_case

SWEEP_HEADER = ["alpha", "eta", "delta", "epsilon", "c", "sigma", "bound", "radius", "winding",
                "status", "seconds"]

SMALL_SWEEP = ["--epsilon-zero", "--eta-range", "2", "2", "1", "--alpha-range", "0.5", "0.5", "1",
               "--c-range", "1.5", "2", "2", "--no-timing"]


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_selftest(tmp_path, capsys):
    assert _run(tmp_path, "selftest") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out
    data = json.loads((tmp_path / "selftest.json").read_text())
    assert data


def test_invalid_alpha_exit_code(tmp_path, capsys):
    assert _run(tmp_path, "front", "--alpha", "1.5") == 2
    err = capsys.readouterr().err
    assert err.startswith("rmfront front:")


def test_zero_count_exit_code(tmp_path):
    assert _run(tmp_path, "sweep", "--eta-range", "2", "3", "0") == 2


def test_bad_argument_exit_code(tmp_path):
    assert _run(tmp_path, "front", "--nodes", "many") == 2
    assert main(["nonsense"]) == 2


def test_spectrum_json(tmp_path):
    assert _run(tmp_path, "spectrum", "--alpha", "0.75", "--eta", "3", "--delta", "0.1",
                "--epsilon", "0.01", "--c", "1") == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    k1, k2 = data["k1"], data["k2"]
    assert k1 == pytest.approx(2.2506, abs=5e-4) and k2 == pytest.approx(2.8146, abs=5e-4)
    assert abs(data["gap"]) == pytest.approx(0.0787, abs=5e-4)
    lo, hi = data["weight_interval"]["sigma_lo"], data["weight_interval"]["sigma_hi"]
    assert lo == pytest.approx(0.067, abs=5e-3) and hi == pytest.approx(0.93, abs=5e-3)
    rows = np.loadtxt(tmp_path / "spectrum_curves.dat", skiprows=1, usecols=(0, 1, 2))
    assert rows.shape[1] == 3 and np.all(np.isfinite(rows))
    header = json.loads((tmp_path / "spectrum_curves.dat").read_text().splitlines()[0])
    assert header["columns"] == ["k", "re", "im", "label"]


def test_spectrum_without_small_k_branches(tmp_path, capsys):
    assert _run(tmp_path, "spectrum", "--delta", "3", "--epsilon", "0.01") == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    assert data["gap"] is None and data["absent_branches"]


def test_front_epsilon_zero(tmp_path):
    assert _run(tmp_path, "front", "--epsilon-zero") == 0
    data = json.loads((tmp_path / "front.json").read_text())
    assert data["regime"] == "eps-zero" and data["residual"] <= 1e-8
    header = json.loads((tmp_path / "front.dat").read_text().splitlines()[0])
    assert header["regime"] == "eps-zero"


def test_bounds_command(tmp_path):
    assert _run(tmp_path, "bounds") == 0
    data = json.loads((tmp_path / "bounds.json").read_text())
    assert data["contour_radius"] == pytest.approx(1.05 * data["bound"])


def test_evans_command(tmp_path):
    assert _run(tmp_path, "evans", "--epsilon-zero") == 0
    data = json.loads((tmp_path / "evans.json").read_text())
    assert data["winding"] == 0
    trace = np.loadtxt(tmp_path / "evans_trace.dat", skiprows=1)
    assert trace.shape[1] == 5
    assert np.allclose(trace[0, :2], trace[-1, :2])


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert _run(a, "sweep", *SMALL_SWEEP) == 0
    assert _run(b, "sweep", *SMALL_SWEEP, "--jobs", "2") == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    with open(a / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == SWEEP_HEADER
    assert len(rows) == 3
    assert all(r[9] == "ok" and r[8] == "0" and r[10] == "" for r in rows[1:])
    summary = json.loads((a / "sweep.json").read_text())
    assert summary["by_status"]["ok"] == 2 and "seconds_total" not in summary


def test_config_file(tmp_path):
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text('alpha = 0.6\nc = 1.8\nsigma = "sattinger"\neta_range = [2.0, 3.0, 3]\n'
                        "epsilon_zero = true\n")
    cfg = load_config(cfg_path)
    assert cfg.alpha == 0.6 and cfg.c == 1.8 and cfg.epsilon == 0.0
    assert cfg.sigma == "sattinger"
    assert cfg.ranges["eta"] == (2.0, 3.0, 3)


def test_config_unknown_key(tmp_path):
    cfg_path = tmp_path / "bad.toml"
    cfg_path.write_text("alpah = 0.6\n")
    assert main(["front", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2


def test_flags_override_config(tmp_path):
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text("alpha = 0.6\n")
    assert _run(tmp_path, "bounds", "--config", str(cfg_path), "--alpha", "0.7") == 0
    data = json.loads((tmp_path / "bounds.json").read_text())
    assert data["params"]["alpha"] == 0.7


def test_grid_cases_order():
    cfg = RunConfig(ranges={"eta": (2.0, 3.0, 2), "alpha": (0.1, 0.8, 2), "c": (1.0, 2.0, 3)})
    cases = sweep_cases(cfg)
    assert len(cases) == 12
    assert cases[0] == (0.1, 2.0, 0.1, 0.05, 1.0)
    assert cases[1] == (0.1, 2.0, 0.1, 0.05, 1.5)


def test_default_sweep_size():
    assert len(sweep_cases(RunConfig())) == 10 * 8 * 11


def test_lhs_reproducible():
    cfg = RunConfig(sampling="lhs", samples=20, seed=3)
    a, b = sweep_cases(cfg), sweep_cases(cfg)
    assert a == b and len(a) == 20
    alphas = np.array([c[0] for c in a])
    assert np.all((alphas >= 0.1) & (alphas <= 0.8))
    # one sample per stratum
    assert sorted(np.floor((alphas - 0.1) / 0.7 * 20).astype(int).tolist()) == list(range(20))
    assert sweep_cases(RunConfig(sampling="lhs", samples=20, seed=4)) != a


# ---------------------------------------------------------------------------
# pipeline


def test_run_case_ok():
    res = run_case(ModelParams(0.5, 2.0, 0.1, 0.0, 1.5))
    assert res.status == "ok" and res.winding == 0
    assert res.radius == pytest.approx(1.05 * res.bound)
    assert len(res.row()) == len(SWEEP_HEADER)


def test_run_case_front_failure():
    res = run_case(ModelParams(0.1, 2.0, 0.1, 0.05, 1.0))
    assert res.status == "front-failure" and res.winding is None
    assert res.row()[8] == "" and res.row()[6] == ""


def test_run_case_sigma_outside_interval():
    res = run_case(ModelParams(0.5, 2.0, 0.1, 0.05, 1.5), sigma=5.0)
    assert res.status == "splitting-degenerate"
    assert res.status in STATUSES


def test_run_case_negative_sigma():
    res = run_case(ModelParams(0.5, 2.0, 0.1, 0.05, 1.5), sigma=-1.0)
    assert res.status == "splitting-degenerate" and "outside" in res.message


def test_run_case_structural_error():
    with pytest.raises(InvalidInput):
        run_case(ModelParams(0.5, 2.0, 0.1, 0.05, 1.5), sigma="sideways")


def test_case_row_formats():
    res = run_case(ModelParams(0.5, 2.0, 0.1, 0.0, 1.5))
    row = res.row(timing=False)
    assert row[10] == "" and float(row[5]) == res.sigma
    assert math.isfinite(float(row[6]))
