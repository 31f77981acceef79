import json

import jsonschema
import numpy as np
import pytest

from symphonic.cli import main
from symphonic.specfile import load_schema, load_spec, SpecFileError

REPORT_SCHEMA = load_schema("report.schema.json")


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_verify_single_case(capsys):
    code, out, _ = run(["verify", "--case", "scalar-symphonic"], capsys)
    assert code == 0
    assert "[PASS] scalar-symphonic" in out


def test_verify_unknown_case(capsys):
    code, _, err = run(["verify", "--case", "nope"], capsys)
    assert code == 2
    assert "unknown case" in err


def test_verify_json_report_valid_and_deterministic(tmp_path, capsys):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    for out in (out1, out2):
        code, _, _ = run(["verify", "--case", "power-curves", "--seed", "7",
                          "--json", str(out)], capsys)
        assert code == 0
    doc1 = json.loads(out1.read_text())
    jsonschema.validate(doc1, REPORT_SCHEMA)
    doc2 = json.loads(out2.read_text())
    del doc1["timing"]
    del doc2["timing"]
    assert json.dumps(doc1, sort_keys=True) == json.dumps(doc2,
                                                          sort_keys=True)


def test_verify_tol_scale_can_fail_controls(capsys, tmp_path):
    # shrinking tolerances by a huge factor trips the exact-value checks
    code, out, _ = run(["verify", "--case", "power-curves",
                        "--tol-scale", "1e-20"], capsys)
    assert code == 1
    assert "FAIL" in out


def test_eval_sphere_tension(tmp_path, capsys):
    out = tmp_path / "vals.csv"
    code, _, _ = run(["eval", "--spec", "builtin:sphere-2",
                      "--op", "symphonic-tension", "--grid", "5",
                      "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t1,t2,symphonic-tension_1,symphonic-tension_2," \
                       "symphonic-tension_3"
    import math
    for line in lines[1:]:
        vals = [float(v) for v in line.split(",")]
        t1, t2 = vals[:2]
        pos = [math.sin(t1) * math.cos(t2), math.sin(t1) * math.sin(t2),
               math.cos(t1)]
        # embedding convention: (cos t1, sin t1 cos t2, sin t1 sin t2)
        pos = [math.cos(t1), math.sin(t1) * math.cos(t2),
               math.sin(t1) * math.sin(t2)]
        for got, p in zip(vals[2:], pos):
            assert got == pytest.approx(-2 * p, abs=1e-9)


def test_eval_linear_bi_tension_zero(capsys):
    code, out, _ = run(["eval", "--spec", "builtin:linear-torus",
                        "--op", "bi-tension", "--grid", "3"], capsys)
    assert code == 0
    for line in out.strip().splitlines()[1:]:
        vals = [float(v) for v in line.split(",")]
        assert all(abs(v) <= 1e-10 for v in vals[2:])


def test_eval_power_curve_bi_tension_value(tmp_path, capsys):
    pts = tmp_path / "pts.txt"
    pts.write_text("1.0\n")
    code, out, _ = run(["eval", "--spec", "builtin:power-curve:2",
                        "--op", "bi-tension", "--points", str(pts)], capsys)
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    # reduced variant: three times the classical curve condition (448)
    assert float(row[1]) == pytest.approx(1344.0, rel=1e-12)
    code, out, _ = run(["eval", "--spec", "builtin:power-curve:2",
                        "--op", "bi-tension", "--variant", "full",
                        "--points", str(pts)], capsys)
    assert float(out.strip().splitlines()[1].split(",")[1]) == pytest.approx(
        1728.0, rel=1e-12)


def test_eval_jacobi_requires_field(capsys):
    code, _, err = run(["eval", "--spec", "builtin:torus-test",
                        "--op", "jacobi"], capsys)
    assert code == 2
    assert "--field" in err


def test_eval_jacobi_with_field(capsys):
    code, out, _ = run(["eval", "--spec", "builtin:torus-test",
                        "--op", "jacobi", "--field", "v", "--grid", "3"],
                       capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 10


def test_eval_missing_spec_file(capsys):
    code, _, err = run(["eval", "--spec", "/nonexistent.json",
                        "--op", "tension"], capsys)
    assert code == 3
    assert "cannot read" in err


def test_eval_domain_error_rows(tmp_path, capsys):
    pts = tmp_path / "pts.txt"
    pts.write_text("1.0\n9.5\n")  # second point outside [0.5, 4]
    code, out, err = run(["eval", "--spec", "builtin:power-curve:2",
                          "--op", "tension", "--points", str(pts)], capsys)
    assert code == 4
    lines = out.strip().splitlines()
    assert "nan" in lines[2]
    assert "domain" in err


def test_spec_file_round_trip(tmp_path, capsys):
    doc = {
        "source": {
            "dim": 1, "coords": ["t"], "metric": [["1"]],
            "domain": {"intervals": [[0.5, 4.0]]},
        },
        "target": {
            "dim": 1, "coords": ["y"], "metric": [["1"]],
            "domain": {"intervals": [[None, None]]},
        },
        "map": {"components": ["t^2"]},
        "fields": [{"name": "u", "components": ["1"],
                    "bump": {"center": [2.0], "radius": 1.0}}],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    spec, fields = load_spec(str(path))
    assert spec.target.dim == 1
    assert "u" in fields
    code, out, _ = run(["eval", "--spec", str(path), "--op", "tension",
                        "--grid", "3"], capsys)
    assert code == 0
    assert out.startswith("t,tension_1")


def test_spec_file_schema_error_has_pointer(tmp_path):
    doc = {"source": {"dim": 1}, "target": {}, "map": {}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SpecFileError) as err:
        load_spec(str(path))
    assert "$." in str(err.value)


def test_spec_file_dimension_mismatch(tmp_path):
    doc = {
        "source": {"dim": 2, "coords": ["a"], "metric": [["1"]],
                   "domain": {"intervals": [[0, 1]]}},
        "target": {"dim": 1, "coords": ["y"], "metric": [["1"]],
                   "domain": {"intervals": [[None, None]]}},
        "map": {"components": ["a"]},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SpecFileError) as err:
        load_spec(str(path))
    assert "/source/coords" in str(err.value)


def test_variation_defaults(capsys):
    code, out, _ = run(["variation", "--spec", "builtin:torus-test",
                        "--field", "v", "--grid", "16"], capsys)
    assert code == 0
    assert "analytic pairing" in out


def test_variation_symphonic_map_near_zero(capsys):
    code, out, _ = run(["variation", "--spec", "builtin:linear-torus",
                        "--field", "v", "--grid", "12"], capsys)
    assert code == 0


def test_variation_second(capsys):
    code, out, _ = run(["variation", "--spec", "builtin:linear-torus",
                        "--field", "v", "--field2", "w", "--second",
                        "--grid", "16"], capsys)
    assert code == 0
    assert "mixed second variation" in out


def test_variation_step_too_large(tmp_path, capsys):
    doc = {
        "source": {"dim": 1, "coords": ["t"], "metric": [["1"]],
                   "domain": {"intervals": [[0.5, 1.4]]}},
        "target": {"dim": 1, "coords": ["y"], "metric": [["1"]],
                   "domain": {"intervals": [[0.0, 2.05]]}},
        "map": {"components": ["t^2"]},
        "fields": [{"name": "u", "components": ["1"]}],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(["variation", "--spec", str(path), "--field", "u",
                        "--grid", "8", "--fd-step", "0.2"], capsys)
    assert code == 4
    assert "step too large" in err


def test_flow_refuses_nonperiodic(capsys):
    code, _, err = run(["flow", "--spec", "builtin:power-curve:2"], capsys)
    assert code == 2
    assert "periodic" in err


def test_flow_budget_exhausted(capsys):
    code, out, _ = run(["flow", "--spec", "builtin:torus-test",
                        "--grid", "16", "--steps", "3", "--tol", "1e-12"],
                       capsys)
    assert code == 1
    assert "budget-exhausted" in out


def test_flow_converges_and_traces(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(["flow", "--spec", "builtin:linear-torus",
                        "--grid", "16", "--steps", "10", "--tol", "1e-8",
                        "--trace", str(trace)], capsys)
    assert code == 0
    assert "converged-symphonic" in out
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == "step,epsilon,E_sym,max_tau_s_norm"


def test_seed_env_override(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("SYMPHONIC_SEED", "99")
    out = tmp_path / "r.json"
    code, _, _ = run(["verify", "--case", "scalar-symphonic",
                      "--json", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["seed"] == 99


def test_docs_schemas_match_shipped_schemas():
    from pathlib import Path
    docs = Path(__file__).resolve().parent.parent / "docs"
    for name in ("spec.schema.json", "report.schema.json"):
        shipped = load_schema(name)
        published = json.loads((docs / name).read_text())
        assert shipped == published
