import math

import numpy as np
import pytest

from visclab.domain import Field, Grid
from visclab.mollify import make_initial_data, make_kernel, mollify
from visclab.norms import (SpaceTimeField, dirichlet_dual_norm,
                           dirichlet_grad_norm, dirichlet_poisson_solve,
                           h_minus_one_norm, lp_norm, measure_norm,
                           total_variation)


def stf_unit_box(nt=65, nx=200, values=None):
    g = Grid((nx,), (0.0,), (1.0,), 1.0)
    t = np.linspace(0.0, 1.0, nt)
    v = np.ones((nt, nx)) if values is None else values
    return SpaceTimeField(g, t, v)


# --- Lp ---------------------------------------------------------------------

def test_lp_zero_field():
    s = stf_unit_box(values=np.zeros((65, 200)))
    assert lp_norm(s, 1) == 0.0 and lp_norm(s, 2) == 0.0 and lp_norm(s, np.inf) == 0.0


def test_lp_constant_unit_box():
    s = stf_unit_box()
    # trapezoid weights in time make the unit box integrate to exactly one
    assert lp_norm(s, 1) == pytest.approx(1.0, rel=1e-13)
    assert lp_norm(s, 2) == pytest.approx(1.0, rel=1e-13)
    assert lp_norm(s, np.inf) == 1.0


def test_lp_sine():
    g = Grid((200,), (0.0,), (1.0,), 1.0)
    t = np.linspace(0, 1, 65)
    v = np.broadcast_to(np.sin(np.pi * g.centers(0)), (65, 200)).copy()
    s = SpaceTimeField(g, t, v)
    assert lp_norm(s, 2) == pytest.approx(1.0 / math.sqrt(2.0), rel=0.02)


def test_measure_norm_is_l1_alias():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(9, 40))
    s = stf_unit_box(9, 40, v)
    assert measure_norm(s) == lp_norm(s, 1)


def test_measure_norm_nonpositive_field():
    rng = np.random.default_rng(4)
    v = -np.abs(rng.normal(size=(9, 40)))
    s = stf_unit_box(9, 40, v)
    integral = float(np.sum(v * s.time_weights()[:, None])) * s.grid.cell_volume
    assert measure_norm(s) == pytest.approx(-integral, rel=1e-12)


# --- TV ---------------------------------------------------------------------

def test_tv_constant():
    g = Grid((50,), (0.0,), (1.0,), 1.0)
    assert total_variation(Field(g, np.full(50, 0.7))) == 0.0


def test_tv_single_step():
    g = Grid((50,), (0.0,), (1.0,), 1.0)
    v = np.where(g.centers(0) < 0.5, 0.0, 1.0)
    assert total_variation(Field(g, v)) == pytest.approx(1.0)


def test_tv_mollified_step():
    g = Grid((400,), (0.0,), (1.0,), 1.0)
    data = make_initial_data(g, "box", (0.5,), 0.2, 1.0)
    out = mollify(data, make_kernel(0.03, g.spacing))
    assert total_variation(out) <= data.tv * (1 + 10.0 * g.spacing[0])


def test_tv_2d_anisotropic():
    g = Grid((4, 4), (0.0, 0.0), (1.0, 1.0), 1.0)
    v = np.zeros((4, 4))
    v[2:, :] = 1.0  # one jump along x across every y-line
    assert total_variation(Field(g, v)) == pytest.approx(1.0)


# --- negative-order norm ----------------------------------------------------

def test_dual_norm_zero():
    s = stf_unit_box(9, 40, np.zeros((9, 40)))
    assert h_minus_one_norm(s) == 0.0


def test_dual_norm_sine_oracle():
    # pure spatial problem: g = sin(pi x) on (0,1) gives 1/(sqrt(2) pi)
    n = 200
    h = 1.0 / n
    x = (np.arange(n) + 0.5) * h
    val = dirichlet_dual_norm(np.sin(np.pi * x), (h,), ("cell",))
    assert val == pytest.approx(1.0 / (math.sqrt(2.0) * math.pi), rel=0.01)


def test_dual_norm_linearity_exact():
    rng = np.random.default_rng(11)
    g = rng.normal(size=(7, 30))
    s1 = stf_unit_box(7, 30, g)
    s2 = stf_unit_box(7, 30, 2.0 * g)
    assert h_minus_one_norm(s2) == pytest.approx(2.0 * h_minus_one_norm(s1),
                                                 rel=1e-14)


def test_dual_norm_homogeneity_and_triangle():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(9, 25))
    b = rng.normal(size=(9, 25))
    na = h_minus_one_norm(stf_unit_box(9, 25, a))
    nb = h_minus_one_norm(stf_unit_box(9, 25, b))
    nab = h_minus_one_norm(stf_unit_box(9, 25, a + b))
    assert nab <= na + nb + 1e-12
    n3 = h_minus_one_norm(stf_unit_box(9, 25, -3.0 * a))
    assert n3 == pytest.approx(3.0 * na, rel=1e-12)


def test_energy_identity_and_duality():
    # <g, phi> = |grad phi|^2 for the solve, and the dual-norm bound holds
    rng = np.random.default_rng(7)
    spacings = (0.05, 0.1)
    kinds = ("cell", "node")
    g = rng.normal(size=(12, 9))
    phi = dirichlet_poisson_solve(g, spacings, kinds)
    energy = dirichlet_grad_norm(phi, spacings, kinds)
    inner = float(np.sum(g * phi)) * spacings[0] * spacings[1]
    assert inner == pytest.approx(energy**2, rel=1e-11)
    gnorm = dirichlet_dual_norm(g, spacings, kinds)
    for _ in range(5):
        test_fn = rng.normal(size=(12, 9))
        pairing = abs(float(np.sum(g * test_fn))) * spacings[0] * spacings[1]
        bound = gnorm * dirichlet_grad_norm(test_fn, spacings, kinds)
        assert pairing <= bound * (1.0 + 1e-6)


def test_dual_norm_mesh_consistency():
    # a fixed smooth source changes by under 2% when the grid is refined 2x
    vals = []
    for n in (100, 200):
        h = 1.0 / n
        x = (np.arange(n) + 0.5) * h
        vals.append(dirichlet_dual_norm(np.sin(2 * np.pi * x) + 0.3 * x * (1 - x),
                                        (h,), ("cell",)))
    assert abs(vals[1] - vals[0]) / vals[0] < 0.02


def test_dual_norm_needs_three_snapshots():
    with pytest.raises(ValueError, match="3 snapshots"):
        h_minus_one_norm(stf_unit_box(2, 10, np.ones((2, 10))))
