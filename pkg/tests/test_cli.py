import csv
import io

import numpy as np
import pytest

from chreg.cli import main

SMALL = """
domain.kind = interval
grid.nodes = 21
time.horizon = 0.2
time.dt = 0.01
model.beta.kind = stefan
model.beta.ks = 2
model.beta.kl = 3
model.beta.latent = 1
model.epsilon = {ladder}
initial.kind = gaussian
initial.amplitude = 2
initial.center = 0.3
initial.width = 0.1
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    body = [l for l in lines if "=" not in l]
    return list(csv.DictReader(io.StringIO("\n".join(body)))), [l for l in lines if "=" in l]


def test_solve_zero_data(tmp_path):
    cfg = write(tmp_path, "grid.nodes = 11\ntime.horizon = 0.1\ntime.dt = 0.01\ninitial.value = 0\n"
                          "model.beta.kind = stefan\nmodel.epsilon = 0.1\n")
    out = tmp_path / "out"
    assert main(["solve", cfg, "--output-dir", str(out)]) == 0
    rows, _ = read_csv(out / "trajectory.csv")
    assert len(rows) == 11
    assert list(rows[0])[:7] == ["t", "h_norm", "v_norm", "vstar_norm_of_rate", "phi_eps", "newton_iters", "residual"]
    for r in rows:
        assert float(r["h_norm"]) == float(r["v_norm"]) == float(r["vstar_norm_of_rate"]) == float(r["phi_eps"]) == 0
        assert r["eps"] and r["dt"] and r["nodes"] and r["T"]
    assert "verdict: PASS" in (out / "report.txt").read_text()


def test_solve_ladder_sorted_and_direct(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", write(tmp_path, SMALL.format(ladder="0.2, 0.1")), "--output-dir", str(out)]) == 0
    rows, _ = read_csv(out / "trajectory.csv")
    eps = [float(r["eps"]) for r in rows]
    assert eps == sorted(eps) and set(eps) == {0.1, 0.2}
    phi = np.array([float(r["phi_eps"]) for r in rows if float(r["eps"]) == 0.1])
    assert np.all(np.diff(phi) <= 1e-9)
    direct = write(tmp_path, SMALL.format(ladder="0.1") + "model.mode = direct\n", "d.cfg")
    assert main(["solve", direct, "--output-dir", str(tmp_path / "d")]) == 0
    rows, _ = read_csv(tmp_path / "d" / "trajectory.csv")
    assert {float(r["eps"]) for r in rows} == {0.0}


def test_cauchy_self_pair(tmp_path):
    out = tmp_path / "c"
    assert main(["cauchy-study", write(tmp_path, SMALL.format(ladder="0.25")), "--output-dir", str(out)]) == 0
    rows, _ = read_csv(out / "cauchy.csv")
    assert len(rows) == 1
    assert float(rows[0]["lhs"]) == 0 and float(rows[0]["rhs"]) > 0 and rows[0]["verdict"] == "PASS"


def test_cauchy_pairs_and_jobs(tmp_path):
    cfg = write(tmp_path, SMALL.format(ladder="0.2, 0.1, 0.05"))
    assert main(["cauchy-study", cfg, "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["cauchy-study", cfg, "--output-dir", str(tmp_path / "b"), "--jobs", "2"]) == 0
    rows, _ = read_csv(tmp_path / "a" / "cauchy.csv")
    assert [(r["eps"], r["gamma"]) for r in rows] == [("0.20000000000000001", "0.10000000000000001"),
                                                      ("0.20000000000000001", "0.050000000000000003"),
                                                      ("0.10000000000000001", "0.050000000000000003")]
    assert (tmp_path / "a" / "cauchy.csv").read_bytes() == (tmp_path / "b" / "cauchy.csv").read_bytes()


def test_rate_study_linear(tmp_path):
    text = """
grid.nodes = 21
time.horizon = 1
time.dt = 0.01
model.beta.kind = linear
model.epsilon = 0.2, 0.1, 0.05
study.reference = direct
"""
    out = tmp_path / "r"
    assert main(["rate-study", write(tmp_path, text), "--output-dir", str(out)]) == 0
    rows, footer = read_csv(out / "rate.csv")
    errors = [float(r["error"]) for r in rows]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    # scalar closed form: constant field, linear beta
    t = np.linspace(0, 1, 101)
    for r in rows:
        e = float(r["eps"])
        exact = np.max(np.abs(np.exp(-(1 + e / 2) * t) / (1 + e) - np.exp(-t)))
        assert float(r["error"]) == pytest.approx(exact, abs=5e-2 * e + 1e-3)
    keys = [l.split("=")[0] for l in footer]
    assert keys == ["C_star", "p"]
    assert np.isfinite(float(footer[1].split("=")[1]))


def test_truncation_constant(tmp_path):
    text = """
domain.kind = radial_exterior
domain.a = 1
domain.b = 3
domain.dimension = 2
grid.nodes = 9
time.horizon = 0.1
time.dt = 0.01
model.mode = direct
initial.value = 2
study.radii = 3, 5, 7
"""
    out = tmp_path / "t"
    assert main(["truncation-study", write(tmp_path, text), "--output-dir", str(out)]) == 2
    rows, _ = read_csv(out / "truncation.csv")
    assert [float(r["sup_diff"]) for r in rows] == pytest.approx([0.0, 0.0], abs=1e-12)
    assert "FAIL sup_diff strictly decreasing" in (out / "report.txt").read_text()


def test_truncation_requires_radii(tmp_path, capsys):
    assert main(["truncation-study", write(tmp_path, SMALL.format(ladder="0.1")), "--output-dir", str(tmp_path)]) == 1
    assert "study.radii" in capsys.readouterr().err


def test_validate(tmp_path):
    out = tmp_path / "v"
    assert main(["validate", write(tmp_path, SMALL.format(ladder="0.2, 0.1")), "--output-dir", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "FAIL" not in report and "beta monotone" in report
    assert sorted(p.name for p in out.iterdir()) == ["report.txt"]


def test_config_error_exit(tmp_path, capsys):
    out = tmp_path / "x"
    assert main(["solve", write(tmp_path, "model.epsilon = 1.5\n"), "--output-dir", str(out)]) == 1
    assert "model.epsilon" in capsys.readouterr().err
    assert not out.exists()


def test_step_error_exit(tmp_path, capsys):
    text = SMALL.format(ladder="0.1") + "solver.newton_max_iters = 1\nsolver.newton_tol = 1e-15\n"
    out = tmp_path / "s"
    assert main(["solve", write(tmp_path, text), "--output-dir", str(out)]) == 1
    assert "step" in capsys.readouterr().err
    assert not out.exists()


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    target = tmp_path / "from_cfg"
    cfg = write(tmp_path, SMALL.format(ladder="0.1") + f"output.dir = {target}\n")
    assert main(["validate", cfg]) == 0
    assert (target / "report.txt").exists()


def test_solve_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL.format(ladder="0.2, 0.1"))
    main(["solve", cfg, "--output-dir", str(tmp_path / "1")])
    main(["solve", cfg, "--output-dir", str(tmp_path / "2"), "--jobs", "2"])
    assert (tmp_path / "1" / "trajectory.csv").read_bytes() == (tmp_path / "2" / "trajectory.csv").read_bytes()
