"""The narrative scripts and sample configs in demos/ keep working."""
import pathlib
import subprocess
import sys

import pytest

DEMOS = pathlib.Path(__file__).resolve().parent.parent / "demos"

COMMANDS = {
    "inspect_conformal.json": "inspect",
    "verify_expression.json": "verify",
    "integrate_polar.json": "integrate",
    "transform_cubic.json": "transform-check",
}


@pytest.mark.parametrize("script", sorted(p.name for p in DEMOS.glob("*.py")))
def test_demo_script_runs(script):
    out = subprocess.run([sys.executable, str(DEMOS / script)], capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr


@pytest.mark.parametrize("config", sorted(COMMANDS))
def test_demo_config_runs(config):
    cmd = [sys.executable, "-m", "t2geom", COMMANDS[config], "--config", str(DEMOS / "configs" / config)]
    out = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr
