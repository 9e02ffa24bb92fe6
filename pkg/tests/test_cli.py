import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from lk_sharp.cli import fmt_float, main, to_csv


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.update(env or {})
    return subprocess.run([sys.executable, "-m", "lk_sharp", *args], capture_output=True, text=True,
                          env=full_env, timeout=600)


def records(stdout):
    doc = json.loads(stdout)
    return doc["meta"], doc["records"]


# --------------------------------------------------------------------------- formatting


def test_fmt_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 2.0**60, -0.0):
        assert float(fmt_float(x)) == x
    assert fmt_float(0.1) == "0.10000000000000001"


def test_csv_newlines_and_header():
    text = to_csv([{"a": 1.0, "b": True}, {"a": 0.5, "c": None}])
    assert "\r" not in text
    assert text.splitlines() == ["a,b,c", "1,true,", "0.5,,"]


# --------------------------------------------------------------------------- omega


def test_omega_json():
    p = run("omega", "--r", "1", "--k", "0", "--t", "-1", "--delta", "1")
    assert p.returncode == 0, p.stderr
    meta, rows = records(p.stdout)
    assert meta["r"] == 1 and meta["k"] == 0
    assert set(meta["versions"]) == {"lk_sharp", "numpy", "scipy", "python"}
    assert "tol" in meta["tolerances"]
    (row,) = rows
    assert isinstance(row["omega"], str)
    assert float(row["omega"]) > 0
    assert row["best_recovery_equal"] is True
    tol = float(meta["tolerances"]["tol"])
    assert float(row["residual"]) <= tol
    for key in ("defect_norm_f", "defect_norm_fr", "defect_value_fk"):
        assert float(row[key]) <= 1e-7


def test_omega_csv():
    p = run("omega", "--r", "2", "--k", "1", "--t", "0.3", "--delta", "0.25", "--format", "csv")
    assert p.returncode == 0, p.stderr
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    assert len(rows) == 1
    assert float(rows[0]["omega"]) > 0
    assert rows[0]["t"] == fmt_float(0.3)


def test_omega_k_too_large():
    p = run("omega", "--r", "1", "--k", "1", "--delta", "1")
    assert p.returncode == 2
    assert "k must satisfy" in p.stderr


def test_omega_missing_delta():
    assert run("omega", "--r", "1", "--k", "0").returncode == 2


def test_omega_out_of_range_is_numerical_failure():
    p = run("omega", "--r", "2", "--k", "0", "--delta", "1e-9")
    assert p.returncode == 3
    assert "reachable range" in p.stderr


def test_omega_grids_and_negative_t():
    p = run("omega", "--r", "2", "--k", "0", "--t-grid", "-1:1:3", "--delta-grid", "0.1:10:3", "--format", "csv")
    assert p.returncode == 0, p.stderr
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    assert [float(r["t"]) for r in rows] == [-1, -1, -1, 0, 0, 0, 1, 1, 1]
    assert [float(r["delta"]) for r in rows[:3]] == pytest.approx([0.1, 1.0, 10.0])
    assert rows[6]["problem"] == "endpoint(+1)"
    # endpoint symmetry
    assert float(rows[0]["omega"]) == pytest.approx(float(rows[6]["omega"]), rel=1e-10)


def test_omega_uniform():
    p = run("omega", "--uniform", "--r", "1", "--k", "0", "--delta", "1", "--t-grid-size", "11")
    assert p.returncode == 0, p.stderr
    _, (row,) = records(p.stdout)
    assert row["at_endpoint"] is True


def test_t_out_of_range():
    assert run("markov", "--r", "2", "--k", "0", "--t", "1.5").returncode == 2


# --------------------------------------------------------------------------- gamma


def test_gamma_default_grid():
    p = run("gamma", "--r", "2", "--k", "0", "--t", "0.5")
    assert p.returncode == 0, p.stderr
    _, rows = records(p.stdout)
    assert len(rows) == 41
    assert float(rows[0]["lambda"]) == 0.0
    assert float(rows[0]["A"]) == pytest.approx(float(run("markov", "--r", "2", "--k", "0", "--t", "0.5",
                                                          "--format", "csv").stdout.splitlines()[1].split(",")[-1]))
    B = [float(r["B"]) for r in rows]
    ex = [float(r["A_excess2"]) for r in rows]
    assert all(b2 < b1 for b1, b2 in zip(B, B[1:]))
    assert all(e2 > e1 for e1, e2 in zip(ex, ex[1:]))


def test_gamma_empty_list():
    p = run("gamma", "--r", "2", "--k", "0", "--lambdas", "")
    assert p.returncode == 2
    assert "empty" in p.stderr


def test_gamma_unsorted_list():
    assert run("gamma", "--r", "2", "--k", "0", "--lambdas", "1,0.5").returncode == 2


def test_gamma_cross_check():
    p = run("gamma", "--r", "1", "--k", "0", "--lambdas", "0.1,1,10", "--cross-check", "--modes", "200")
    _, rows = records(p.stdout)
    for r in rows:
        assert float(r["A_series"]) == pytest.approx(float(r["A"]), rel=1e-6)


# --------------------------------------------------------------------------- stechkin


def test_stechkin_infinite():
    p = run("stechkin", "--r", "2", "--k", "0", "--N", "0.5")
    assert p.returncode == 0, p.stderr
    _, (row,) = records(p.stdout)
    assert row["E_N"] == "infinite"
    assert row["status"] == "infinite"


def test_stechkin_uniform_r1(tmp_path):
    out = tmp_path / "kernel.csv"
    p = run("stechkin", "--uniform", "--r", "1", "--k", "0", "--N", "0.7071068", "--export-figure", str(out),
            "--samples", "101")
    assert p.returncode == 0, p.stderr
    meta, (row,) = records(p.stdout)
    # N is M = 1/sqrt(2) rounded to 7 digits; E_N is sqrt-sensitive to N - M, so the
    # reference is the closed-form r = 1 solution at N (mpmath, 20 digits)
    assert float(row["E_N"]) == pytest.approx(0.81641235098278568513, rel=1e-10)
    assert float(row["E_N"]) == pytest.approx(math.sqrt(2 / 3), rel=2e-4)
    assert meta["notes"]
    lines = out.read_text().splitlines()
    assert lines[0].startswith("x,kernel_N=")
    assert len(lines) == 102


# --------------------------------------------------------------------------- markov / eigen / conjecture


def test_markov_csv():
    p = run("markov", "--r", "1", "--k", "0", "--format", "csv")
    assert p.stdout.splitlines() == ["r,k,t,markov", f"1,0,-1,{fmt_float(math.sqrt(0.5))}"]


def test_eigen_cross_check():
    p = run("eigen", "--r", "2", "--modes", "8", "--cross-check")
    _, rows = records(p.stdout)
    assert len(rows) == 8
    assert all(float(r["rel_diff"]) < 1e-8 for r in rows)


def test_conjecture_r2_holds():
    p = run("conjecture", "--r", "2", "--k", "1", "--modes", "10")
    _, rows = records(p.stdout)
    assert [r["verdict"] for r in rows] == ["holds"] * 10


def test_conjecture_r1_eigenvalues():
    p = run("conjecture", "--r", "1", "--k", "0", "--modes", "20", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    for r in rows:
        n = int(r["n"])
        assert float(r["eigenvalue"]) == pytest.approx(math.pi**2 * n**2 / 4, rel=1e-10)


def test_conjecture_figure_export(tmp_path):
    fig = tmp_path / "fig1.csv"
    p = run("conjecture", "--r", "4", "--k", "0", "--modes", "6", "--export-figure", str(fig), "--format", "csv")
    assert p.returncode == 0, p.stderr
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    assert all(float(r["margin"]) >= 0 for r in rows)
    data = list(csv.reader(io.StringIO(fig.read_text())))
    assert data[0] == ["x"] + [f"phi_{n}_d4" for n in range(1, 7)]
    assert len(data) == 2002
    # column values at x = -1 are the endpoint values reported per mode
    for n, r in enumerate(rows, start=1):
        assert abs(float(data[1][n])) == pytest.approx(float(r["endpoint_value"]), rel=1e-12)


# --------------------------------------------------------------------------- determinism / selftest


def test_byte_identical_across_runs_and_threads(tmp_path):
    args = ["omega", "--r", "2", "--k", "0", "--t-grid", "-1:1:5", "--delta", "0.7"]
    a = run(*args).stdout
    b = run(*args, env={"LK_SHARP_THREADS": "4"}).stdout
    out = tmp_path / "o.json"
    assert run(*args, "--out", str(out)).returncode == 0
    assert a == b == out.read_text()


def test_selftest_subset():
    p = run("selftest", "--only", "1,2,3")
    assert p.returncode == 0, p.stdout + p.stderr
    assert p.stdout.count("[PASS]") == 3


def test_selftest_unknown_id():
    assert run("selftest", "--only", "42").returncode == 2


def test_help_documents_defaults():
    p = run("gamma", "--help")
    assert p.returncode == 0
    assert "default" in p.stdout


def test_main_in_process(capsys):
    assert main(["markov", "--r", "3", "--k", "2", "--t", "0.0", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("r,k,t,markov\n3,2,0,")
    assert main(["bogus"]) == 2
