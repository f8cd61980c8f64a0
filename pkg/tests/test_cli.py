import io
import json
import subprocess
import sys

import pytest

from t2geom.cli import config_digest, run


def invoke(command, config, *flags, raw=None):
    out, err = io.StringIO(), io.StringIO()
    text = raw if raw is not None else json.dumps(config)
    code = run([command, *flags], stdin=io.StringIO(text), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def results(stdout):
    return {r["name"]: r for r in json.loads(stdout)["results"]}


FLAT = {"kind": "builtin", "name": "flat"}
CONF = {"kind": "builtin", "name": "conformal1d"}


def test_inspect_flat():
    code, out, _ = invoke("inspect", {"n": 1, "lagrangian": FLAT, "point": {"x": [0], "y1": [1], "y2": [1]}})
    assert code == 0
    r = results(out)
    assert r["point0.G"]["value"] == [0.0]
    assert r["point0.g"]["value"] == [[1.0]]
    assert r["point0.theta2"]["value"] == [2.0, 0.0, 0.0]


def test_inspect_conformal():
    code, out, _ = invoke("inspect", {"n": 1, "lagrangian": CONF, "point": {"x": [0], "y1": [1], "y2": [0]}})
    r = results(out)
    assert code == 0
    assert r["point0.G"]["value"][0] == pytest.approx(0.16666666666666666, abs=1e-15)
    assert r["point0.N1"]["value"] == [[pytest.approx(1.0)]]
    for key in ("g_inv", "N2", "M1", "M2", "theta1", "condition_number"):
        assert f"point0.{key}" in r


def test_inspect_expression():
    cfg = {"n": 1, "lagrangian": {"kind": "expression", "formula": "y2_1^2 + y1_1^4"}, "point": {"x": [0], "y1": [1], "y2": [1]}}
    r = results(invoke("inspect", cfg)[1])
    assert r["point0.g"]["value"] == [[1.0]]
    assert r["point0.G"]["value"][0] == pytest.approx(-2 / 3)


def test_inspect_degenerate_exits_2():
    cfg = {"n": 1, "lagrangian": {"kind": "expression", "formula": "y1_1*y2_1"}, "point": {"x": [0], "y1": [1], "y2": [1]}}
    code, out, err = invoke("inspect", cfg)
    assert code == 2 and "DegenerateLagrangian" in err and out == ""


@pytest.mark.parametrize(
    "raw",
    [
        "{not json",
        json.dumps({"n": 1}),
        json.dumps({"n": 0, "lagrangian": FLAT}),
        json.dumps({"n": 1, "lagrangian": {"kind": "builtin", "name": "nope"}}),
        json.dumps({"n": 1, "lagrangian": {"kind": "expression", "formula": "y2_1^2 +"}}),
        json.dumps({"n": 1, "lagrangian": {"kind": "expression", "formula": "y2_2^2"}}),
        json.dumps({"n": 1, "lagrangian": FLAT, "bogus": 1}),
        json.dumps({"n": 1, "lagrangian": FLAT, "point": {"x": [0, 1], "y1": [1, 0]}}),
        json.dumps({"n": 3, "lagrangian": {"kind": "builtin", "name": "conformal1d"}}),
    ],
)
def test_config_errors_exit_1(raw):
    code, out, err = invoke("inspect", None, raw=raw)
    assert code == 1 and err.startswith("error:")


def test_verify_flat():
    code, out, _ = invoke("verify", {"n": 2, "lagrangian": FLAT, "points": {"random": 100, "seed": 3}})
    assert code == 0
    r = results(out)
    assert all(v["value"] <= 1e-12 for v in r.values())
    names = list(r)
    assert names[:11] == [
        "prop1.1", "prop1.2", "prop1.3", "thm1.lstheta", "cor.isomega", "cor.lieomega",
        "thm2.cond1", "thm2.nabla2g", "thm2.dhtheta", "prop2.n1", "sl2",
    ]


def test_verify_conformal():
    code, out, _ = invoke("verify", {"n": 1, "lagrangian": CONF, "points": {"random": 100, "seed": 0}})
    assert code == 0
    assert all(v["pass"] and v["value"] <= 1e-8 for v in results(out).values())


def test_verify_perturbed_fails():
    code, out, err = invoke("verify", {"n": 1, "lagrangian": CONF, "points": {"random": 10}}, "--perturb", "1e-3")
    assert code == 1
    r = results(out)
    assert r["thm2.nabla2g"]["value"] >= 1e-5 and not r["thm2.nabla2g"]["pass"]
    assert "thm2.nabla2g" in err


def test_integrate_flat(tmp_path):
    out = tmp_path / "traj.csv"
    cfg = {"n": 1, "lagrangian": FLAT, "point": {"x": [0], "y1": [1], "y2": [1]},
           "integrate": {"t0": 0, "t1": 1, "dt": 1e-3}, "output": str(out)}
    code, stdout, _ = invoke("integrate", cfg, "--quiet")
    assert code == 0 and stdout == ""
    last = out.read_text().splitlines()[-1].split(",")
    assert abs(float(last[1]) - 2.0) <= 1e-10


def test_integrate_conformal_monitor_column():
    cfg = {"n": 1, "lagrangian": CONF, "point": {"x": [0], "y1": [1], "y2": [0]},
           "integrate": {"t1": 1, "dt": 1e-3, "monitors": ["nabla2_xdot", "energy_identity"]}}
    code, out, _ = invoke("integrate", cfg)
    assert code == 0
    lines = out.splitlines()
    col = lines[0].split(",").index("nabla2_xdot")
    assert max(abs(float(l.split(",")[col])) for l in lines[1:]) <= 1e-5


def test_integrate_json_format():
    cfg = {"n": 1, "lagrangian": FLAT, "point": {"x": [0], "y1": [1], "y2": [0]},
           "integrate": {"t1": 0.1, "dt": 0.05}, "format": "json"}
    code, out, _ = invoke("integrate", cfg)
    doc = json.loads(out)
    assert code == 0 and doc["columns"][:2] == ["t", "x_1"] and len(doc["rows"]) == 3


@pytest.mark.parametrize("dt", [0, -0.1])
def test_integrate_bad_dt(dt):
    cfg = {"n": 1, "lagrangian": FLAT, "point": {"x": [0], "y1": [1]}, "integrate": {"t1": 1, "dt": dt}}
    code, _, err = invoke("integrate", cfg)
    assert code == 1 and "dt" in err


def test_integrate_mid_flight_keeps_partial(tmp_path):
    out = tmp_path / "partial.csv"
    cfg = {"n": 2, "lagrangian": {"kind": "expression", "formula": "y2_1^2 + x_1^2*y2_2^2"},
           "point": {"x": [-1, 0], "y1": [1, 0], "y2": [0, 0]},
           "integrate": {"t1": 2, "dt": 1e-2}, "output": str(out)}
    code, _, err = invoke("integrate", cfg)
    assert code == 3 and "partial" in err
    rows = out.read_text().splitlines()
    assert rows[0].startswith("t,x_1") and 50 < len(rows) < 202


def test_integrate_degenerate_start_exits_2():
    cfg = {"n": 2, "lagrangian": {"kind": "expression", "formula": "y2_1^2 + x_1^2*y2_2^2"},
           "point": {"x": [0, 0], "y1": [1, 0], "y2": [0, 0]}, "integrate": {"t1": 1, "dt": 1e-2}}
    assert invoke("integrate", cfg)[0] == 2


def test_transform_identity():
    cfg = {"n": 2, "lagrangian": {"kind": "builtin", "name": "diag-exp"}, "diffeo": ["x_1", "x_2"], "points": {"random": 5}}
    code, out, _ = invoke("transform-check", cfg)
    r = results(out)
    assert code == 0 and r["metric_law"]["value"] == 0.0 and r["z2_law"]["value"] == 0.0


def test_transform_cubic():
    cfg = {"n": 1, "lagrangian": CONF, "diffeo": ["x_1 + x_1^3/10"], "points": {"random": 20, "seed": 1}}
    code, out, _ = invoke("transform-check", cfg)
    assert code == 0 and all(v["value"] <= 1e-8 for v in results(out).values())


def test_transform_square_across_zero():
    cfg = {"n": 1, "lagrangian": CONF, "diffeo": ["x_1^2"], "points": {"random": 20}}
    code, _, err = invoke("transform-check", cfg)
    assert code == 2 and "SingularJacobian" in err


def test_transform_at_zero_exactly():
    cfg = {"n": 1, "lagrangian": CONF, "diffeo": ["x_1^2"], "point": {"x": [0], "y1": [1], "y2": [0]}}
    assert invoke("transform-check", cfg)[0] == 2


def test_report_round_trip_and_digest():
    cfg = {"n": 1, "lagrangian": CONF, "points": {"random": 3, "seed": 5}}
    _, out, _ = invoke("verify", cfg)
    doc = json.loads(out)
    assert json.loads(json.dumps(doc)) == doc
    assert set(doc) == {"command", "config_digest", "results", "exit"}
    assert doc["config_digest"] == config_digest(cfg)
    reordered = {"points": cfg["points"], "lagrangian": cfg["lagrangian"], "n": 1}
    assert config_digest(reordered) == doc["config_digest"]


def test_csv_report_format():
    cfg = {"n": 1, "lagrangian": CONF, "points": {"random": 2}, "format": "csv"}
    code, out, _ = invoke("verify", cfg)
    assert code == 0 and out.splitlines()[0] == "name,value,tolerance,pass"


def test_config_from_file_and_missing_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 1, "lagrangian": FLAT, "point": {"x": [0], "y1": [1], "y2": [1]}}))
    out = io.StringIO()
    assert run(["inspect", "--config", str(path)], stdout=out, stderr=io.StringIO()) == 0
    assert run(["inspect", "--config", str(tmp_path / "none.json")], stdout=io.StringIO(), stderr=io.StringIO()) == 1


def test_console_entry_point(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 1, "lagrangian": CONF, "points": {"random": 4, "seed": 2}}))
    proc = subprocess.run(
        [sys.executable, "-m", "t2geom", "verify", "--config", str(path)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["exit"] == 0
