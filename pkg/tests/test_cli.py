import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from warpfield import catalog, specfile
from warpfield.cli import main

FLAT = {"dim": 2, "metric": [[{"const": 1}, {"const": 0}], [{"const": 0}, {"const": 1}]],
        "domain": [[-1, 1], [-1, 1]], "potential": {"op": "mul", "args": [{"const": 0.5}, {"coord": 0}]},
        "rho": 0}


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)


@pytest.fixture
def flat_file(tmp_path):
    p = tmp_path / "flat.json"
    p.write_text(json.dumps(FLAT))
    return p


def _points_file(tmp_path, rows, names):
    p = tmp_path / "points.csv"
    p.write_text(",".join(names) + "\n" + "".join(",".join(repr(float(v)) for v in r) + "\n" for r in rows))
    return p


def _read_csv(text):
    lines = text.splitlines()
    return lines[0].split(","), np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


# ---- verify ----------------------------------------------------------------------

def test_verify_cigar_correct_candidate(runner):
    res = run(runner, "verify", "--example", "cigar", "--potential-index", "1")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["schema"] == 1 and doc["passed"] and doc["max_residual"] <= 1e-6


def test_verify_cigar_recorded_candidate_fails(runner):
    res = run(runner, "verify", "--example", "cigar", "--potential-index", "0")
    assert res.exit_code == 1
    assert json.loads(res.output)["max_residual"] > 0.1


def test_verify_hyperbolic_product_trivial(runner):
    res = run(runner, "verify", "--example", "hyperbolic-product", "--grid", "2")
    assert res.exit_code == 0
    assert json.loads(res.output)["triviality"] is True


def test_verify_tight_tolerance_fails(runner):
    assert run(runner, "verify", "--example", "exm6", "--tol", "1e-12").exit_code == 1


def test_verify_conformal_passes_at_default(runner):
    assert run(runner, "verify", "--example", "exm6").exit_code == 0


def test_verify_fits_rho_when_missing(runner, tmp_path):
    doc = json.loads(json.dumps(FLAT))
    del doc["rho"]
    p = tmp_path / "norho.json"
    p.write_text(json.dumps(doc))
    res = run(runner, "verify", p)
    out = json.loads(res.output)
    assert res.exit_code == 0 and out["rho_fitted"] and out["rho"] == 0.0


@pytest.mark.parametrize("args", [
    ["verify"],
    ["verify", "--example", "no-such-entry"],
    ["verify", "--example", "cigar", "--potential-index", "5"],
    ["curvature", "--example", "cigar", "--grid", "0"],
])
def test_input_errors_exit_2(runner, args):
    assert run(runner, *args).exit_code == 2


def test_malformed_spec_exit_2(runner, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({**FLAT, "colour": "red"}))
    res = run(runner, "verify", p)
    assert res.exit_code == 2 and "colour" in res.output


def test_verify_writes_files(runner, tmp_path, flat_file):
    out, csv = tmp_path / "r.json", tmp_path / "r.csv"
    res = run(runner, "verify", flat_file, "--grid", "2", "--out", out, "--csv", csv)
    assert res.exit_code == 0 and res.output == ""
    assert json.loads(out.read_text())["passed"]
    assert csv.read_text().startswith("x0,x1,R,grad_h_norm,residual\n")


# ---- curvature ---------------------------------------------------------------------

def test_curvature_golden_csv(runner, flat_file):
    res = run(runner, "curvature", flat_file, "--grid", "2")
    assert res.output == "x0,x1,R\n-0.999,-0.999,0\n-0.999,0.999,0\n0.999,-0.999,0\n0.999,0.999,0\n"


def test_curvature_cigar_points(runner, tmp_path):
    rs = np.linspace(0.1, 5.0, 50)
    pts = _points_file(tmp_path, [[r, 1.0] for r in rs], ["r", "theta"])
    res = run(runner, "curvature", "--example", "cigar", "--points", pts)
    header, data = _read_csv(res.output)
    assert header == ["x0", "x1", "R"]
    np.testing.assert_allclose(data[:, 2], 4 / np.cosh(rs) ** 2, atol=1e-8)


def test_curvature_conformal_along_diagonal(runner, tmp_path):
    s = np.linspace(1.0, 10.0, 10)
    rows = [[v / 3, v / 3, v / 3, 0.1, 0.2, 0.3] for v in s]
    res = run(runner, "curvature", "--example", "exm6", "--points", _points_file(tmp_path, rows, list("abcdef")))
    _, data = _read_csv(res.output)
    np.testing.assert_allclose(data[:, -1], -1.5 / s, atol=1e-8)


def test_curvature_points_column_mismatch(runner, tmp_path):
    pts = _points_file(tmp_path, [[1.0]], ["r"])
    assert run(runner, "curvature", "--example", "cigar", "--points", pts).exit_code == 2


def test_curvature_samples_json(runner, tmp_path, flat_file):
    samples = tmp_path / "s.json"
    run(runner, "curvature", flat_file, "--grid", "1", "--samples", samples)
    doc = json.loads(samples.read_text())
    assert doc["schema"] == 1 and len(doc["samples"]) == 1


def test_thread_count_does_not_change_output(runner):
    args = ["curvature", "--example", "cigar", "--grid", "6", "--seed", "3"]
    one = run(runner, *args, env={"WARPFIELD_THREADS": "1"}).output
    four = run(runner, *args, env={"WARPFIELD_THREADS": "4"}).output
    assert one == four


def test_bad_thread_count(runner):
    res = run(runner, "curvature", "--example", "cigar", env={"WARPFIELD_THREADS": "many"})
    assert res.exit_code == 2


def test_json_is_byte_stable(runner):
    args = ["verify", "--example", "cigar", "--potential-index", "1", "--grid", "4", "--seed", "7"]
    assert run(runner, *args).output == run(runner, *args).output


# ---- reconstruct -----------------------------------------------------------------

def test_reconstruct_golden_csv(runner):
    res = run(runner, "reconstruct", "--n", 2, "--RN", 0, "--rho", 0, "--phi0", 1, "--dphi0", 0,
              "--r0", 0, "--rmax", 0.003)
    assert res.exit_code == 0
    assert res.output == "r,phi,phi_prime,h\n0,1,0,0\n0.001,1,0,0.001\n0.002,1,0,0.002\n0.003,1,0,0.003\n"


@pytest.mark.parametrize("args, tol", [
    (["--n", 3, "--RN", 2, "--rho", -1, "--phi0", 1, "--dphi0", 1, "--r0", 1, "--rmax", 5], 1e-7),
    (["--n", 2, "--RN", 0, "--rho", 0, "--phi0", 1, "--dphi0", 0, "--r0", 0, "--rmax", 3], 1e-10),
    (["--n", 2, "--RN", 0, "--rho", 0, "--phi0", 4 * math.tanh(1), "--dphi0", 4 / math.cosh(1) ** 2,
      "--r0", 1, "--rmax", 4], 1e-5),
])
def test_reconstruct_examples(runner, tmp_path, args, tol):
    out, report = tmp_path / "p.csv", tmp_path / "r.json"
    res = run(runner, "reconstruct", *args, "--tol", tol, "--out", out, "--report", report)
    assert res.exit_code == 0
    doc = json.loads(report.read_text())
    assert doc["passed"] and doc["roundtrip"]["max_residual"] <= tol
    assert out.read_text().startswith("r,phi,phi_prime,h\n")


def test_reconstruct_with_slice_file(runner, tmp_path):
    sphere = catalog.get("punctured-euclidean-3").spec.fiber
    p = tmp_path / "s2.json"
    p.write_text(specfile.dumps(specfile.ManifoldSpec(sphere, ("a", "b"))))
    res = run(runner, "reconstruct", "--n", 3, "--RN", 2, "--rho", -1, "--phi0", 1, "--dphi0", 1,
              "--r0", 1, "--rmax", 2, "--slice", p, "--out", tmp_path / "o.csv")
    assert res.exit_code == 0 and json.loads(res.output)["passed"]


def test_reconstruct_invalid(runner):
    res = run(runner, "reconstruct", "--n", 3, "--RN", 2, "--rho", 0, "--phi0", 0, "--dphi0", 1, "--rmax", 2)
    assert res.exit_code == 2


# ---- bounds -------------------------------------------------------------------------

def test_bounds_cosh_hyperbolic(runner, tmp_path):
    csv = tmp_path / "b.csv"
    res = run(runner, "bounds", "--example", "exm7", "--C", 1, "--csv", csv)
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert (doc["A"], doc["bound"], doc["inf_R"], doc["margin"]) == (0.0, -12.0, -12.0, 0.0)
    assert doc["satisfied"] and doc["upper_bound"]["upper_holds"]
    assert csv.read_text().startswith("x0,x1,R,ric_uu,hess_uu\n")


def test_bounds_flags_incomplete_base(runner):
    res = run(runner, "bounds", "--example", "exm6")
    doc = json.loads(res.output)
    assert doc["hypotheses"]["complete_base"] is False
    assert res.exit_code in (0, 1)


def test_bounds_needs_warped_spec(runner, flat_file):
    assert run(runner, "bounds", flat_file).exit_code == 2


# ---- export ---------------------------------------------------------------------

def test_export_catalog(runner, tmp_path):
    res = run(runner, "export-catalog", tmp_path / "cat")
    assert res.exit_code == 0
    assert res.output.split() == catalog.list_ids()
    for entry_id in catalog.list_ids():
        path = tmp_path / "cat" / f"{entry_id}.json"
        verify = run(runner, "verify", path, "--grid", "2")
        assert verify.exit_code == 0, entry_id


def test_catalog_samples_are_current(runner, tmp_path):
    run(runner, "export-catalog", tmp_path)
    samples = Path(__file__).parent.parent / "samples" / "catalog"
    for entry_id in catalog.list_ids():
        assert (samples / f"{entry_id}.json").read_text() == (tmp_path / f"{entry_id}.json").read_text()
