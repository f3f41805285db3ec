import csv
import io
import json

import jsonschema
import numpy as np
import pytest
from referencing import Registry, Resource

from conftest import exact_rank
from sketchycore.cli import ALL_METHODS, main
from sketchycore.io import save_matrix
from sketchycore.reports import dumps, load_schema


def _validator(name):
    run = load_schema("run")
    registry = Registry().with_resource("run_report.schema.json", Resource.from_contents(run))
    return jsonschema.Draft202012Validator(load_schema(name), registry=registry)


@pytest.fixture
def low_rank_file(tmp_path):
    path = tmp_path / "a.skcm"
    save_matrix(path, exact_rank(120, 90, 4, seed=1))
    return path


@pytest.fixture
def noisy_file(tmp_path):
    A = exact_rank(120, 90, 60, seed=2, spectrum=np.arange(1, 61, dtype=float) ** -1.0)
    path = tmp_path / "n.csv"
    save_matrix(path, A)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------- approx


@pytest.mark.parametrize("method", ALL_METHODS)
def test_approx_exact_rank(capsys, low_rank_file, method):
    code, out, _ = run(capsys, "approx", "--input", low_rank_file, "-r", 4, "-p", 0.5, "--method", method, "--trials", 2)
    assert code == 0
    report = json.loads(out)
    _validator("run").validate(report)
    assert report["err"]["mean"] <= 1e-10
    assert report["trials"] == 2 and len(report["err"]["values"]) == 2


def test_approx_echo_and_extras(capsys, noisy_file, tmp_path):
    out_path = tmp_path / "r.json"
    code, out, _ = run(capsys, "approx", "-i", noisy_file, "-r", 3, "-p", 0.6, "--trials", 20, "--seed", 7,
                       "--optimal", "--incoherence", "--theory", "--json", out_path)
    assert code == 0 and "mean err" in out
    report = json.loads(out_path.read_text())
    _validator("run").validate(report)
    assert report["trials"] == 20
    assert report["config"] == {"r": 3, "k": 13, "s": 27, "p": 0.6, "q": 0.6, "seed": 7, "map_kind": "gaussian"}
    s = np.arange(1, 61, dtype=float) ** -1.0
    assert report["optimal_err"] == pytest.approx(np.sum(s[3:] ** 2) / np.sum(s**2), rel=1e-9)
    assert report["incoherence"]["mu"] >= 1
    assert report["theory"]["bound_final"] >= report["theory"]["bound_initial"]
    assert all(v >= 0 for v in report["times"].values())


def test_approx_deterministic(capsys, noisy_file):
    argv = ("approx", "-i", noisy_file, "-r", 3, "-p", 0.6, "--trials", 3, "--seed", 5)
    a = json.loads(run(capsys, *argv)[1])
    b = json.loads(run(capsys, *argv)[1])
    assert a["err"]["values"] == b["err"]["values"]


def test_approx_infeasible_config(capsys, low_rank_file):
    code, _, err = run(capsys, "approx", "-i", low_rank_file, "-r", 4, "-p", 0.2)
    assert code == 2 and "s <= min(m, n, m', n') violated" in err
    code, _, err = run(capsys, "approx", "-i", low_rank_file, "-r", 4, "-k", 3)
    assert code == 2 and "r <= k violated" in err


def test_io_errors(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\nx,4\n")
    code, _, err = run(capsys, "approx", "-i", bad, "-r", 1)
    assert code == 3 and "line 2, column 1" in err
    code, _, err = run(capsys, "approx", "-i", tmp_path / "missing.skcm", "-r", 1)
    assert code == 3


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "--suite", "lemma9")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "--help")[0] == 0


# ---------------------------------------------------------------- compare


def test_compare_all(capsys, noisy_file, tmp_path):
    jpath, cpath = tmp_path / "c.json", tmp_path / "c.csv"
    code, _, _ = run(capsys, "compare", "-i", noisy_file, "-r", 3, "--p-sweep", "0.3,0.35,0.4", "--trials", 2,
                     "--json", jpath, "--csv", cpath, "--optimal")
    assert code == 0
    report = json.loads(jpath.read_text())
    _validator("compare").validate(report)
    assert {r["method"] for r in report["rows"]} == set(ALL_METHODS)
    rows = list(csv.DictReader(io.StringIO(cpath.read_text())))
    core = [r for r in rows if r["method"] == "sketchy_core_svd"]
    assert [r["p"] for r in core] == ["0.3", "0.35", "0.4"]
    assert all(r["p"] == "-" for r in rows if r["method"] != "sketchy_core_svd")
    assert len(rows) == 3 + 6


def test_compare_deterministic(capsys, noisy_file):
    argv = ("compare", "-i", noisy_file, "-r", 3, "-p", 0.5, "--method", "sketchy_core_svd,hmt", "--trials", 2)
    strip = lambda text: [row.split(",")[:9] for row in text.splitlines()]
    assert strip(run(capsys, *argv)[1]) == strip(run(capsys, *argv)[1])


def test_compare_unknown_method(capsys, noisy_file):
    assert run(capsys, "compare", "-i", noisy_file, "-r", 3, "--method", "hmt,svd")[0] == 2


# ---------------------------------------------------------------- scree


def test_scree_diag(capsys, tmp_path):
    path = tmp_path / "d.csv"
    save_matrix(path, np.diag([3.0, 2.0, 1.0]))
    code, out, _ = run(capsys, "scree", "-i", path)
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    assert [int(r) for r, _ in rows] == [0, 1, 2, 3]
    assert [float(v) for _, v in rows] == pytest.approx([1, 5 / 14, 1 / 14, 0], abs=1e-15)


def test_scree_guard(capsys, noisy_file):
    code, _, err = run(capsys, "scree", "-i", noisy_file, "--max-dense", 100)
    assert code == 2 and "--max-dense" in err


def test_scree_yale_like(capsys, tmp_path):
    path = tmp_path / "y.skcm"
    assert run(capsys, "synth", "--preset", "yale", "-o", path)[0] == 0
    code, out, _ = run(capsys, "scree", "-i", path, "--r-max", 25)
    values = [float(line.split(",")[1]) for line in out.strip().splitlines()[1:]]
    assert values[20] == pytest.approx(0.033, abs=1e-9)
    assert all(b <= a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------- verify


@pytest.mark.parametrize("suite", ["lemma7", "lemma5", "lemma3"])
def test_verify_suites(capsys, tmp_path, suite):
    path = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--suite", suite, "--json", path)
    assert code == 0 and f"PASS {suite}" in out
    report = json.loads(path.read_text())
    _validator("verify").validate(report)
    assert report["passed"] is True


def test_verify_thm1(capsys):
    code, _, err = run(capsys, "verify", "--suite", "thm1", "--trials", 500)
    assert code == 0 and "PASS thm1" in err


def test_verify_failure_exit_code(capsys, monkeypatch):
    import sketchycore.cli as cli

    monkeypatch.setattr(cli, "run_suites", lambda names, seed, trials: [
        {"suite": "lemma5", "passed": False, "criterion": "x", "measured": {}}])
    assert run(capsys, "verify", "--suite", "lemma5")[0] == 1


# ---------------------------------------------------------------- bench / synth


def test_bench(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, _, _ = run(capsys, "bench", "--M", 400, "--N", 300, "-r", 4, "--p-sweep", "0.5,1.0", "--reps", 2, "--csv", path)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert [r["method"] for r in rows] == ["sketchy_core_svd", "sketchy_core_svd", "sketchy_svd"]
    assert all(float(r["sketch"]) >= 0 for r in rows)


def test_bench_guard(capsys):
    assert run(capsys, "bench", "--M", 5000, "--N", 2000, "-r", 4, "--max-dense", 1000)[0] == 2


def test_synth_spec_file(capsys, tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"M": 20, "N": 10, "family": "explicit", "values": [3, 2, 1]}))
    out = tmp_path / "m.csv"
    assert run(capsys, "synth", "--spec", spec, "-o", out)[0] == 0
    A = np.loadtxt(out, delimiter=",")
    assert np.allclose(np.linalg.svd(A, compute_uv=False)[:3], [3, 2, 1])
    spec.write_text("{bad json")
    code, _, err = run(capsys, "synth", "--spec", spec, "-o", out)
    assert code == 2 and "line 1" in err


def test_synth_video_guarded(capsys, tmp_path):
    code, _, err = run(capsys, "synth", "--preset", "video", "-o", tmp_path / "v.skcm")
    assert code == 2 and "--max-dense" in err


def test_inf_serialized_as_string():
    assert json.loads(dumps({"psnr": float("inf")})) == {"psnr": "inf"}


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "sketchycore", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "approx" in proc.stdout
