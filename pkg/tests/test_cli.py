import csv
import io
import json
import subprocess
import sys

import pytest

from wslab import schemas
from wslab.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_row(fixtures, capsys):
    code, out, _ = run(["check", fixtures / "row_example.json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["valid"]
    rep = doc["report"]
    assert rep["row_contractive"] and not rep["spherical_contractive"]
    assert rep["worst_spherical"]["I"] == [0, 0]
    assert rep["worst_spherical"]["defect"] == pytest.approx(0.5625, abs=1e-12)
    schemas.validate_report(schemas.CONTRACTIVITY_REPORT, doc)


def test_check_doubly_example(fixtures, capsys):
    code, out, _ = run(["check", fixtures / "doubly_example.json"], capsys)
    assert code == 0 and json.loads(out)["report"]["doubly_contractive"]


def test_check_missing_weight(tmp_path, fixtures, capsys):
    doc = json.loads((fixtures / "row_example.json").read_text())
    doc["weights"].pop(3)
    path = tmp_path / "w.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(["check", path], capsys)
    assert code == 1 and "missing weight" in err


def test_check_bad_json(tmp_path, capsys):
    path = tmp_path / "w.json"
    path.write_text("{not json")
    code, _, err = run(["check", path], capsys)
    assert code == 1 and "malformed JSON" in err
    code, _, err = run(["check", tmp_path / "absent.json"], capsys)
    assert code == 1


def test_check_commutation_failure(tmp_path, capsys):
    doc = {
        "d": 2, "N": 1,
        "weights": [
            {"I": [0, 0], "j": 1, "w": 1}, {"I": [0, 0], "j": 2, "w": 1},
            {"I": [1, 0], "j": 1, "w": 1}, {"I": [1, 0], "j": 2, "w": 1},
            {"I": [0, 1], "j": 1, "w": 0.5}, {"I": [0, 1], "j": 2, "w": 1},
        ],
    }
    path = tmp_path / "w.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(["check", path], capsys)
    rep = json.loads(out)
    assert code == 1 and not rep["valid"] and rep["report"] is None
    assert rep["violations"][0]["residual"] == pytest.approx(0.5)
    assert "I=[0, 0]" in err


def test_check_csv(fixtures, capsys):
    code, out, _ = run(["check", fixtures / "column_example.json", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 15 * 2
    assert rows[0]["I"] == "(0,0)" and float(rows[0]["re"]) == pytest.approx(2**-0.5)


@pytest.mark.parametrize(
    "name,gap",
    [("column_example.json", 2**0.5 * 0.8 - 1), ("row_example.json", 0.2), ("constant_06_08.json", -0.04)],
)
def test_vn(fixtures, capsys, name, gap):
    code, out, _ = run(["vn", fixtures / name, fixtures / "p_2z1z2.json", "--levels", 4], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["gap"] == pytest.approx(gap, abs=1e-8)
    schemas.validate_report(schemas.VN_GAP_REPORT, doc)


def test_vn_dimension_mismatch(tmp_path, fixtures, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"d": 1, "terms": [{"I": [1], "re": 1.0}]}))
    code, _, err = run(["vn", fixtures / "row_example.json", p], capsys)
    assert code == 1 and "d=1" in err


def test_normalize(fixtures, capsys):
    code, out, _ = run(["normalize", fixtures / "constant_06_06.json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["steps"] == []
    assert doc["rescale"]["direction"] == 1 and doc["rescale"]["to"] == pytest.approx(0.8)
    code, out, _ = run(["normalize", fixtures / "constant_06_08.json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["steps"] == [] and doc["rescale"] is None and doc["reached_x0"]


def test_normalize_large_bounds(fixtures, capsys):
    code, _, err = run(["normalize", fixtures / "constant_06_08.json", "--bounds", "0.8,0.8"], capsys)
    assert code == 1


def test_normalize_csv(fixtures, capsys):
    code, out, _ = run(["normalize", fixtures / "constant_06_06.json", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["kind"] for r in rows] == ["rescale"]


def test_gen_and_check(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run(["gen", "--family", "column_example", "--params", "alpha=0.8", "eps=0.6", "--out", out], capsys)[0] == 0
    _, txt, _ = run(["check", out], capsys)
    rep = json.loads(txt)["report"]
    assert rep["spherical_contractive"] and not rep["row_contractive"]

    out = tmp_path / "da.json"
    run(["gen", "--family", "drury_arveson", "--params", "d=2", "N=5", "--out", out], capsys)
    rep = json.loads(run(["check", out], capsys)[1])["report"]
    assert rep["row_contractive"] and not rep["spherical_contractive"]


def test_gen_bad_params(capsys):
    assert run(["gen", "--family", "constant", "--params", "m"], capsys)[0] == 1
    assert run(["gen", "--family", "constant", "--params", "m=0.6,0.8", "N=x"], capsys)[0] == 1


def test_random_doubly(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["random", "--seed", 7, "--d", 2, "--levels", 3, "--target", "doubly", "--out", out], capsys)[0] == 0
    rep = json.loads(run(["check", out], capsys)[1])["report"]
    assert rep["doubly_contractive"]


def test_quadnorm(fixtures, capsys):
    for name, sigma in (("swap_matrix.json", [1, 1]), ("diag_3_m2.json", [3, 2]), ("identity3.json", [1, 1, 1])):
        code, out, _ = run(["quadnorm", fixtures / name], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["sigma"] == pytest.approx(sigma, abs=1e-12)
        schemas.validate_report(schemas.TAKAGI_SUMMARY, doc)


def test_quadnorm_nonsymmetric(tmp_path, capsys):
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"rows": [[0, 1], [2, 0]]}))
    code, _, err = run(["quadnorm", path], capsys)
    assert code == 1 and "symmetric" in err


def test_nonpositive_tol(fixtures, capsys):
    assert run(["check", fixtures / "row_example.json", "--tol", "0"], capsys)[0] == 1


def test_numeric_failure_exit_code(fixtures, capsys, monkeypatch):
    from wslab import cli
    from wslab.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr(cli, "vn_gap", boom)
    code, _, err = run(["vn", fixtures / "row_example.json", fixtures / "p_2z1z2.json"], capsys)
    assert code == 2 and "no convergence" in err


def test_output_deterministic(tmp_path, fixtures):
    cmd = [sys.executable, "-m", "wslab", "vn", str(fixtures / "column_example.json"), str(fixtures / "p_2z1z2.json")]
    a = subprocess.run(cmd + ["--sup", "optimize"], capture_output=True, check=True).stdout
    b = subprocess.run(cmd + ["--sup", "optimize"], capture_output=True, check=True).stdout
    assert a == b and a.endswith(b"\n")


def test_gen_matches_fixtures(tmp_path, fixtures, capsys):
    out = tmp_path / "row.json"
    run(["gen", "--family", "row_example", "--out", out], capsys)
    assert out.read_bytes() == (fixtures / "row_example.json").read_bytes()


def test_env_tolerance(fixtures, capsys, monkeypatch):
    monkeypatch.setenv("WSLAB_TOL", "abc")
    assert run(["check", fixtures / "row_example.json"], capsys)[0] == 1
    monkeypatch.setenv("WSLAB_TOL", "0.6")
    code, out, _ = run(["check", fixtures / "row_example.json"], capsys)
    assert code == 0 and json.loads(out)["report"]["spherical_contractive"]
