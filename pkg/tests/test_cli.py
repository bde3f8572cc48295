import json
import shutil
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from hessquot.cli import jsonable, main
from hessquot.schema import REPORT_SCHEMA


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    doc = json.loads(out) if out else None
    if doc is not None:
        jsonschema.validate(doc, REPORT_SCHEMA)
    return code, doc, err


def test_verify_pass(capsys):
    code, doc, _ = run_json(capsys, "verify", "--n", "3", "--k", "1", "--delta-tilde", "0.5", "--samples", "20000", "--seed", "7")
    assert code == 0
    assert doc["summary"]["passed"] and doc["summary"]["verdict"] == "pass"
    assert doc["params"]["seed"] == 7 and "timestamp" in doc
    assert len(doc["witness"]["lam"]) == 3


def test_verify_k_equal_n_points_to_counterexample(capsys):
    code, out, err = run(capsys, "verify", "--n", "3", "--k", "3")
    assert code == 2 and out == ""
    assert "counterexample" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--n", "3", "--k", "1", "--samples", "0"],
        ["verify", "--n", "3"],
        ["verify", "--n", "3", "--k", "1", "--bogus"],
        ["estimate-eps", "--n", "2", "--k", "1", "--delta-tilde", "2"],
        ["identities", "--n-range", "5-2"],
        ["counterexample", "--n", "3", "--lam", "1,2,3"],
        ["jacobi", "--field", "cosine:a="],
        ["jacobi", "--field", "spiral:a=1"],
        ["jacobi", "--field", "cosine", "--c", "1", "--solve-c"],
        ["jacobi", "--field", "cosine", "--n", "4"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2 and out == ""


def test_estimate_eps(capsys):
    code, doc, _ = run_json(capsys, "estimate-eps", "--n", "2", "--k", "1", "--samples", "5000", "--no-timestamp")
    assert code == 0
    assert doc["summary"]["epsilon_estimate"] > 0.0
    assert doc["summary"]["epsilon_unconstrained"] is False
    assert "timestamp" not in doc


def test_estimate_eps_monge_ampere(capsys):
    code, doc, _ = run_json(capsys, "estimate-eps", "--n", "3", "--k", "3", "--samples", "500", "--no-timestamp")
    assert code == 0 and doc["summary"]["monge_ampere"]
    assert doc["summary"]["epsilon_estimate"] <= 1e-12
    xi = np.array(doc["witness"]["xi"])
    assert np.count_nonzero(xi) == 1 and xi[0, 0] != 0.0


def test_unconstrained_serialised_as_null(capsys):
    doc = jsonable({"epsilon_estimate": float("inf"), "x": np.float64("nan"), "v": np.arange(2)})
    assert doc == {"epsilon_estimate": None, "x": None, "v": [0, 1]}


def test_counterexample(capsys):
    code, doc, _ = run_json(capsys, "counterexample", "--n", "3", "--lam", "3,2,1", "--eps0", "0.01", "--no-timestamp")
    assert code == 0
    s = doc["summary"]
    assert abs(s["value"]) <= 1e-12
    assert s["strengthened_margin"] == pytest.approx(-0.01 * s["a11_term"])
    assert s["strengthened_margin"] < 0.0


def test_identities_and_sign_flip(capsys):
    code, doc, _ = run_json(capsys, "identities", "--n-range", "1-4", "--samples", "300", "--no-timestamp")
    assert code == 0 and doc["summary"]["passed"] and "witness" not in doc
    code, doc, _ = run_json(capsys, "identities", "--n-range", "1-3", "--samples", "100", "--inject-sign-flip", "--no-timestamp")
    assert code == 1
    assert any(f["name"] == "quadratic_split" for f in doc["summary"]["failures"])


def test_sign_flip_flag_is_hidden(capsys):
    assert main(["identities", "--help"]) == 0
    out = capsys.readouterr().out
    assert "--samples" in out and "inject" not in out


def test_oc_and_glz(capsys):
    code, doc, _ = run_json(capsys, "oc-check", "--n-range", "2-3", "--samples", "40", "--no-timestamp")
    assert code == 0 and len(doc["summary"]["cases"]) == 5
    code, doc, _ = run_json(capsys, "glz-check", "--n-range", "1-4", "--samples", "500", "--no-timestamp")
    assert code == 0 and len(doc["summary"]["cases"]) == 10


def test_jacobi_constant(capsys):
    code, doc, _ = run_json(capsys, "jacobi", "--field", "constant:c=2", "--n", "2", "--k", "1", "--eps", "0.1", "--c", "1", "--no-timestamp")
    assert code == 0 and doc["summary"]["min_residual"] > 0.0


def test_jacobi_cosine_solve_c_with_outputs(capsys, tmp_path):
    pts, wcsv = tmp_path / "pts.csv", tmp_path / "w.csv"
    code, doc, _ = run_json(
        capsys, "jacobi", "--field", "cosine:a=0.3", "--solve-c", "--refine", "--grid", "16",
        "--out", str(pts), "--field-out", str(wcsv), "--no-timestamp",
    )
    assert code == 0
    s = doc["summary"]
    assert np.isfinite(s["c_min"]) and len(s["levels"]) == 2
    assert s["codazzi_order"] > 3.5
    assert pts.read_text().splitlines()[0].startswith("x1,x2,lambda1")
    assert len(pts.read_text().splitlines()) == 1 + 16 * 16
    code, again, _ = run_json(capsys, "jacobi", "--field", f"file:{wcsv}", "--solve-c", "--no-timestamp")
    assert code == 0 and again["summary"]["c_min"] == s["c_min"]


def test_jacobi_gamma_violation_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    rows = ["x1,x2,w11,w12,w22"]
    h = 2 * np.pi / 8
    for i in range(8):
        for j in range(8):
            w22 = -1.0 if (i, j) == (2, 6) else 1.0
            rows.append(f"{i * h!r},{j * h!r},2.0,0.0,{w22}")
    p.write_text("\n".join(rows) + "\n")
    code, out, err = run(capsys, "jacobi", "--field", f"file:{p}", "--solve-c")
    assert code == 1 and "(2, 6)" in err and "x =" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--n", "4", "--k", "2", "--samples", "3000", "--seed", "5"],
        ["estimate-eps", "--n", "3", "--k", "2", "--samples", "3000", "--workers", "2"],
        ["counterexample", "--n", "4"],
        ["identities", "--n-range", "2-3", "--samples", "200"],
        ["oc-check", "--n-range", "2", "--samples", "20"],
        ["glz-check", "--n-range", "2-3", "--samples", "500"],
        ["jacobi", "--field", "bumps:a=0.4", "--solve-c", "--grid", "12"],
    ],
)
def test_byte_identical_reruns(capsys, argv):
    _, a, _ = run(capsys, *argv, "--no-timestamp")
    _, b, _ = run(capsys, *argv, "--no-timestamp")
    assert a and a == b


def test_seed_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("HESSQUOT_SEED", "123")
    _, doc, _ = run_json(capsys, "verify", "--n", "2", "--k", "1", "--samples", "100", "--no-timestamp")
    assert doc["params"]["seed"] == 123
    _, doc2, _ = run_json(capsys, "verify", "--n", "2", "--k", "1", "--samples", "100", "--seed", "123", "--no-timestamp")
    assert doc == doc2
    monkeypatch.setenv("HESSQUOT_SEED", "abc")
    code, _, err = run(capsys, "verify", "--n", "2", "--k", "1", "--samples", "100")
    assert code == 2 and "HESSQUOT_SEED" in err


def test_witness_roundtrip_is_exact(capsys):
    from hessquot.inequality import residual_from_records
    from hessquot.kernels import layout as L
    from hessquot.operator import quad_records

    _, doc, _ = run_json(capsys, "verify", "--n", "5", "--k", "3", "--samples", "4000", "--seed", "9", "--no-timestamp")
    lam = np.array(doc["witness"]["lam"])
    xi = np.array(doc["witness"]["xi"])
    rec = quad_records(lam[None], xi[None], 3)
    assert residual_from_records(rec, 5, 3, 1.0)[0] / rec[0, L.SCALE] == doc["summary"]["min_residual"]


def test_module_and_script_entry_points():
    out = subprocess.run(
        [sys.executable, "-m", "hessquot", "counterexample", "--n", "2", "--no-timestamp"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0 and json.loads(out.stdout)["command"] == "counterexample"
    exe = shutil.which("hessquot")
    if exe is None:
        pytest.skip("console script not installed")
    out = subprocess.run([exe, "verify", "--n", "3", "--k", "3"], capture_output=True, text=True)
    assert out.returncode == 2
