import pathlib

import pytest

from visclab.config import build_scenario
from visclab.harness import run_ladder

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def small_config(**overrides):
    """A fast 1-D Burgers config for unit tests."""
    text = f"""
[grid]
dimension = 1
cells = {overrides.get('cells', 100)}
extent = 0,1
time_horizon = {overrides.get('time_horizon', 0.2)}

[flux]
preset = {overrides.get('flux', 'burgers')}
a = {overrides.get('a', 1.0)}

[viscosity]
preset = {overrides.get('viscosity', 'constant')}
b = {overrides.get('b', 1.0)}

[initial]
preset = bump
center = 0.5
width = 0.25
amplitude = 1.0

[ladder]
epsilons = {overrides.get('epsilons', '0.1,0.05,0.025')}
mollifier_width = {overrides.get('mollifier_width', '0.02')}

[scheme]
cfl = 0.4
snapshots = {overrides.get('snapshots', 10)}
young_window_cells = {overrides.get('young_window_cells', 10)}
young_window_snaps = {overrides.get('young_window_snaps', 11)}
young_bins = 32
weak_window_cells = 5
weak_window_snaps = 4

[output]
directory = {overrides.get('outdir', 'runs/small')}
"""
    return build_scenario(text)


@pytest.fixture(scope="session")
def run1d(tmp_path_factory):
    """Full default 1-D scenario, run once and shared by the acceptance tests."""
    cfg = build_scenario((SCENARIOS / "burgers1d.cfg").read_text())
    out = tmp_path_factory.mktemp("acc1d") / "run"
    return cfg, run_ladder(cfg, outdir=out)


@pytest.fixture(scope="session")
def run2d(tmp_path_factory):
    """Full 2-D scenario for the compensated-quadratic criterion."""
    cfg = build_scenario((SCENARIOS / "burgers2d.cfg").read_text())
    out = tmp_path_factory.mktemp("acc2d") / "run"
    return cfg, run_ladder(cfg, outdir=out)
