"""Command-line front end.

Every run is described by one JSON config (a path, or stdin when the path is
``-`` or omitted). Exit codes: 0 pass, 1 config/parse error or failed check,
2 mathematical precondition violated, 3 integration failed mid-flight.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys

import jsonschema
import numpy as np

from . import registry
from .connection import connection
from .dtensor import check_orientation, metric_law_deviation, z2_law_deviation
from .dynamics import MONITORS, attach_monitors, geodesic_initial_point, integrate_craig_synge
from .errors import (
    ConfigError,
    DegenerateLagrangian,
    DomainError,
    SingularJacobian,
    SingularMetric,
    StepError,
    T2GeomError,
)
from .jets import Diffeo2, Jet2Point
from .lagrangian import ExpressionLagrangian, check_regularity, theta1, theta2
from .local import REGULARITY_TOL, local_jets
from .semiriemann import pullback_metric
from .verify import VERIFY_NAMES, suite_max

EXIT_OK, EXIT_CONFIG, EXIT_MATH, EXIT_RUNTIME = 0, 1, 2, 3
COMMANDS = ("inspect", "verify", "integrate", "transform-check")

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_BOUNDS = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {"oneOf": [{"type": "number"}, _VEC]},
}
_POINT = {
    "type": "object",
    "properties": {"x": _VEC, "y1": _VEC, "y2": _VEC},
    "required": ["x", "y1"],
    "additionalProperties": False,
}
_RANDOM = {
    "type": "object",
    "properties": {
        "random": {"type": "integer", "minimum": 1, "maximum": 10000},
        "seed": {"type": "integer", "minimum": 0},
        "box": {
            "type": "object",
            "properties": {"x": _BOUNDS, "y1": _BOUNDS, "y2": _BOUNDS},
            "additionalProperties": False,
        },
    },
    "required": ["random"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 3},
        "lagrangian": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["expression", "builtin"]},
                "formula": {"type": "string", "minLength": 1},
                "name": {"type": "string", "minLength": 1},
                "parameters": {"type": "object", "additionalProperties": {"type": "number"}},
            },
            "required": ["kind"],
            "additionalProperties": False,
            "if": {"properties": {"kind": {"const": "expression"}}},
            "then": {"required": ["formula"]},
            "else": {"required": ["name"]},
        },
        "point": _POINT,
        "points": {"oneOf": [{"type": "array", "items": _POINT, "minItems": 1}, _RANDOM]},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "regularity_tolerance": {"type": "number", "exclusiveMinimum": 0},
        "integrate": {
            "type": "object",
            "properties": {
                "t0": {"type": "number"},
                "t1": {"type": "number"},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "monitors": {"type": "array", "items": {"enum": list(MONITORS)}, "uniqueItems": True},
            },
            "required": ["t1", "dt"],
            "additionalProperties": False,
        },
        "diffeo": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 1},
        "output": {"type": "string", "minLength": 1},
        "format": {"enum": ["csv", "json"]},
    },
    "required": ["n", "lagrangian"],
    "additionalProperties": False,
}


# -- configuration ----------------------------------------------------------------


def load_config(text: str) -> dict:
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    validate_config(config)
    return config


def validate_config(config) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise ConfigError(f"invalid config at {err.json_path}: {err.message}")


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def build_lagrangian(config: dict):
    spec = config["lagrangian"]
    n = config["n"]
    params = spec.get("parameters", {})
    if spec["kind"] == "expression":
        return ExpressionLagrangian.parse(spec["formula"], n, params=params)
    if params:
        raise ConfigError("builtin Lagrangians take no parameters")
    try:
        return registry.builtin(spec["name"], n)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _explicit_point(L, entry: dict, n: int) -> Jet2Point:
    x, y1 = entry["x"], entry["y1"]
    if "y2" in entry:
        y2 = entry["y2"]
    elif getattr(L, "metric_spec", None) is not None:
        return geodesic_initial_point(L.metric_spec, x, y1)
    else:
        y2 = [0.0] * n
    if not (len(x) == len(y1) == len(y2) == n):
        raise ConfigError(f"point components must have length n={n}")
    return Jet2Point(x, y1, y2)


def build_points(L, config: dict) -> list:
    n = config["n"]
    if "point" in config and "points" in config:
        raise ConfigError("give either 'point' or 'points', not both")
    if "point" in config:
        return [_explicit_point(L, config["point"], n)]
    spec = config.get("points", {"random": 1})
    if isinstance(spec, list):
        return [_explicit_point(L, e, n) for e in spec]
    box = {}
    for key, (lo, hi) in spec.get("box", {}).items():
        for b in (lo, hi):
            if isinstance(b, list) and len(b) != n:
                raise ConfigError(f"box bound for {key} must have length n={n}")
        box[key] = (lo, hi)
    return L.sample_points(spec["random"], seed=spec.get("seed", 0), box=box)


# -- reports ----------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(u) for u in v.tolist()] if v.ndim else _jsonable(v.item())
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def result(name: str, value, tolerance=None, passed=None) -> dict:
    if passed is None:
        passed = True if tolerance is None else bool(value <= tolerance)
    return {"name": name, "value": _jsonable(value), "tolerance": tolerance, "pass": bool(passed)}


def make_report(command: str, config: dict, results: list, code: int) -> dict:
    return {"command": command, "config_digest": config_digest(config), "results": results, "exit": code}


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value", "tolerance", "pass"])
    for r in report["results"]:
        w.writerow([r["name"], json.dumps(r["value"]), "" if r["tolerance"] is None else repr(r["tolerance"]), r["pass"]])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------------


def cmd_inspect(config: dict, perturb: float = 0.0):
    L = build_lagrangian(config)
    rtol = config.get("regularity_tolerance", REGULARITY_TOL)
    results = []
    for i, p in enumerate(build_points(L, config)):
        m = check_regularity(L, p, rtol)
        loc = local_jets(L, p)
        c = connection(L, p, perturb)
        pre = f"point{i}."
        results += [
            result(pre + "point", p.as_array()),
            result(pre + "g", m.g),
            result(pre + "g_inv", m.ginv),
            result(pre + "condition_number", 1.0 / m.rcond),
            result(pre + "G", np.array(loc.G.value)),
            result(pre + "N1", c.N1),
            result(pre + "N2", c.N2),
            result(pre + "M1", c.M1),
            result(pre + "M2", c.M2),
            result(pre + "theta1", theta1(L, p).components()),
            result(pre + "theta2", theta2(L, p).components()),
        ]
    return results, EXIT_OK


def cmd_verify(config: dict, perturb: float = 0.0):
    L = build_lagrangian(config)
    tol = config.get("tolerance", 1e-8)
    rtol = config.get("regularity_tolerance", REGULARITY_TOL)
    points = build_points(L, config)
    worst = suite_max(L, points, perturb, rtol)
    results = [result(name, worst[name], tol) for name in VERIFY_NAMES]
    return results, EXIT_OK if all(r["pass"] for r in results) else EXIT_CONFIG


def cmd_transform_check(config: dict, perturb: float = 0.0):
    if "diffeo" not in config:
        raise ConfigError("transform-check needs a 'diffeo' entry")
    L = build_lagrangian(config)
    n = config["n"]
    tol = config.get("tolerance", 1e-8)
    phi = Diffeo2(config["diffeo"], n)
    points = build_points(L, config)
    check_orientation(phi, points)
    results = [result("metric_law", max(metric_law_deviation(L, phi, p) for p in points), tol)]
    spec = getattr(L, "metric_spec", None)
    if spec is not None:
        pulled = pullback_metric(spec, phi)
        dev = max(z2_law_deviation(spec, phi, p, pulled) for p in points)
        results.append(result("z2_law", dev, tol))
    return results, EXIT_OK if all(r["pass"] for r in results) else EXIT_CONFIG


def _trajectory_text(traj, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(traj.to_dict()), indent=2) + "\n"
    return traj.to_csv()


def cmd_integrate(config: dict, perturb: float = 0.0):
    """Returns (results, code, trajectory text)."""
    if "integrate" not in config:
        raise ConfigError("integrate needs an 'integrate' entry")
    L = build_lagrangian(config)
    spec = config["integrate"]
    rtol = config.get("regularity_tolerance", REGULARITY_TOL)
    points = build_points(L, config)
    if len(points) != 1:
        raise ConfigError("integrate needs exactly one initial point")
    t_span = (spec.get("t0", 0.0), spec["t1"])
    if not t_span[1] > t_span[0]:
        raise ConfigError("invalid config at $.integrate.t1: must exceed t0")
    check_regularity(L, points[0], rtol)
    try:
        traj = integrate_craig_synge(L, points[0], t_span, spec["dt"], rtol)
    except ValueError as exc:
        if isinstance(exc, T2GeomError):
            raise
        raise ConfigError(f"invalid config at $.integrate: {exc}") from exc
    except (DegenerateLagrangian, StepError) as exc:
        partial = getattr(exc, "trajectory", None)
        if partial is None:
            raise
        text = _trajectory_text(partial, config.get("format", "csv"))
        res = [result("steps", len(partial) - 1), result("error", str(exc), passed=False)]
        return res, EXIT_RUNTIME, text
    traj = attach_monitors(L, traj, spec.get("monitors", []))
    res = [result("steps", len(traj) - 1), result("final_state", traj.states[-1])]
    for name, values in traj.monitors.items():
        res.append(result(f"max_abs.{name}", float(np.max(np.abs(values)))))
    return res, EXIT_OK, _trajectory_text(traj, config.get("format", "csv"))


_HANDLERS = {
    "inspect": cmd_inspect,
    "verify": cmd_verify,
    "transform-check": cmd_transform_check,
}


# -- entry point ------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="t2geom", description="Second-order Lagrangian geometry on T²M.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", default="-", help="JSON config path, '-' for stdin (default)")
    ap.add_argument("--perturb", type=float, default=0.0, help="add this to every N2 entry (test hook)")
    ap.add_argument("--quiet", action="store_true", help="print nothing on success")
    return ap


def _read_config_text(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = _parser().parse_args(argv)
    config: dict | None = None
    with np.errstate(all="ignore"):
        try:
            config = load_config(_read_config_text(args.config, stdin))
            fmt = config.get("format", "json" if args.command != "integrate" else "csv")
            if args.command == "integrate":
                results, code, text = cmd_integrate(config, args.perturb)
                if "output" in config:
                    _write(config["output"], text)
                else:
                    stdout.write(text)
                if code == EXIT_RUNTIME:
                    print(f"error: {results[-1]['value']} (partial trajectory written)", file=stderr)
                elif "output" in config and not args.quiet:
                    stdout.write(report_to_json(make_report(args.command, config, results, code)))
                return code
            results, code = _HANDLERS[args.command](config, args.perturb)
        except (SingularJacobian, SingularMetric, DegenerateLagrangian, DomainError) as exc:
            code, message = EXIT_MATH, f"{type(exc).__name__}: {exc}"
        except (ConfigError, ValueError, KeyError, IndexError) as exc:
            code, message = EXIT_CONFIG, f"{type(exc).__name__}: {exc}"
        except (StepError, FloatingPointError, OverflowError, ZeroDivisionError) as exc:
            code, message = EXIT_RUNTIME, f"{type(exc).__name__}: {exc}"
        else:
            report = make_report(args.command, config, results, code)
            text = report_to_csv(report) if fmt == "csv" else report_to_json(report)
            if "output" in config:
                _write(config["output"], text)
            if not args.quiet and ("output" not in config or code != EXIT_OK):
                stdout.write(text)
            if code != EXIT_OK:
                failed = [r["name"] for r in results if not r["pass"]]
                print(f"failed: {', '.join(failed)}", file=stderr)
            return code
    print(f"error: {message}", file=stderr)
    return code


def main(argv=None) -> int:
    sys.exit(run(argv))
