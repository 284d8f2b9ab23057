import math

import numpy as np
import pytest

from visclab.compactness import (attach_c_field, build_compensated_quad,
                                 choose_c, compensated_D, compensated_D_field,
                                 decompose_production, dirac_concentration,
                                 div_curl_test, entropy_production_total,
                                 flux_identity_gap, time_derivative_l1,
                                 young_histograms)
from visclab.domain import FieldTrajectory, Grid, make_entropy_pair, \
    make_flux, make_viscosity
from visclab.norms import SpaceTimeField, lp_norm
from visclab.tables import interp
from visclab.viscous import integrate, snapshot_times


def make_traj(values, T=1.0, eps=0.1, extent=1.0):
    nt = values.shape[0]
    cells = values.shape[1:]
    lo = (0.0,) * len(cells)
    hi = (extent,) * len(cells)
    g = Grid(cells, lo, hi, T)
    return FieldTrajectory(g, np.linspace(0, T, nt), values, eps, dt=T / (nt - 1))


@pytest.fixture(scope="module")
def burgers():
    return make_flux(("burgers",), (-1.0, 1.0), 1e-8)


@pytest.fixture(scope="module")
def bconst():
    return make_viscosity("constant", (-1.0, 1.0))


# --- production field --------------------------------------------------------

def test_production_zero_for_steady_zero_flux(burgers, bconst):
    spec = make_flux(("linear",), (-1.0, 1.0), 1e-8, {"a": 0.0})
    pair = make_entropy_pair("square", spec, 1e-8)
    traj = make_traj(np.tile(0.4 * np.ones(32), (5, 1)))
    field = entropy_production_total(traj, pair)
    # interior cells: steady in time and constant in space
    assert np.max(np.abs(field.values[:, 1:-1])) < 1e-14


def test_production_vanishes_on_smooth_translation():
    # exact traveling profile of the linear equation: eta_t + q_x = 0
    spec = make_flux(("linear",), (-1.0, 1.0), 1e-8, {"a": 0.5})
    pair = make_entropy_pair("square", spec, 1e-8)
    norms = []
    for n, nt in ((100, 26), (200, 51), (400, 101)):
        g = Grid((n,), (0.0,), (1.0,), 0.4)
        t = np.linspace(0, 0.4, nt)
        x = g.centers(0)
        vals = np.empty((nt, n))
        for k, tk in enumerate(t):
            r = (x - 0.3 - 0.5 * tk) / 0.15
            vals[k] = np.where(np.abs(r) < 1, (1 - np.minimum(np.abs(r), 1) ** 2) ** 3, 0.0)
        traj = FieldTrajectory(g, t, vals, 0.0, dt=0.4 / (nt - 1))
        norms.append(lp_norm(entropy_production_total(traj, pair), 1))
    assert norms[0] > norms[1] > norms[2]


def test_split_consistency_on_heat_oracle(bconst):
    # T_eta and A + M are discretizations of the same quantity; their gap
    # shrinks under simultaneous refinement
    spec = make_flux(("linear",), (-1.0, 1.0), 1e-8, {"a": 0.0})
    pair = make_entropy_pair("square", spec, 1e-8)
    eps = 0.1
    gaps = []
    for n, nt in ((50, 9), (100, 17), (200, 33)):
        g = Grid((n,), (0.0,), (1.0,), 0.5)
        t = np.linspace(0, 0.5, nt)
        x = g.centers(0)
        vals = np.exp(-eps * math.pi**2 * t)[:, None] * np.sin(math.pi * x)[None, :]
        traj = FieldTrajectory(g, t, vals, eps, dt=0.5 / (nt - 1))
        total = entropy_production_total(traj, pair)
        split = decompose_production(traj, pair, bconst, eps)
        gap = SpaceTimeField(g, t, total.values - split.divergence_part.values
                             - split.dissipation_part.values)
        gaps.append(lp_norm(gap, 1))
    assert gaps[0] > gaps[1] > gaps[2]


def test_split_constant_trajectory(bconst, burgers):
    pair = make_entropy_pair("square", burgers, 1e-8)
    traj = make_traj(np.tile(0.3 * np.ones(24), (5, 1)))
    split = decompose_production(traj, pair, bconst, 0.1)
    assert np.max(np.abs(split.divergence_part.values[:, 1:-1])) < 1e-12
    assert np.max(np.abs(split.dissipation_part.values[:, 1:-1])) < 1e-12


@pytest.mark.parametrize("entropy", ["square", "kruzkov"])
def test_dissipation_part_nonpositive(entropy, burgers):
    visc = make_viscosity("quadratic", (-1.0, 1.0))
    pair = make_entropy_pair(entropy, burgers, 1e-8, k=0.2, delta=1e-3)
    g = Grid((64,), (0.0,), (1.0,), 0.2)
    x = g.centers(0)
    u0 = np.where(np.abs(x - 0.5) < 0.25, (1 - ((x - 0.5) / 0.25) ** 2) ** 3, 0.0)
    traj = integrate(g, u0, burgers, visc, 0.05, 0.4, snapshot_times(0.2, 8))
    split = decompose_production(traj, pair, visc, 0.05)
    assert np.max(split.dissipation_part.values) <= 0.0


def test_measure_part_uniform_bound(burgers, bconst):
    pair = make_entropy_pair("square", burgers, 1e-8)
    g = Grid((100,), (0.0,), (1.0,), 0.2)
    x = g.centers(0)
    u0 = np.where(np.abs(x - 0.5) < 0.25, (1 - ((x - 0.5) / 0.25) ** 2) ** 3, 0.0)
    bound = 1.05 * bconst.upper_bound * pair.etapp_sup * 1.0 / (2 * bconst.lower_bound)
    for eps in (0.1, 0.05, 0.025):
        traj = integrate(g, u0, burgers, bconst, eps, 0.4, snapshot_times(0.2, 8))
        split = decompose_production(traj, pair, bconst, eps)
        assert split.measure_norm_M <= bound


def test_time_derivative_heat_oracle():
    # closed-form: (2/pi)(1 - exp(-eps pi^2 T)) for the decaying sine mode
    eps, T = 0.1, 1.0
    g = Grid((200,), (0.0,), (1.0,), T)
    t = np.linspace(0, T, 65)
    vals = np.exp(-eps * math.pi**2 * t)[:, None] * \
        np.sin(math.pi * g.centers(0))[None, :]
    traj = FieldTrajectory(g, t, vals, eps, dt=T / 64)
    expect = (2.0 / math.pi) * (1.0 - math.exp(-eps * math.pi**2 * T))
    assert time_derivative_l1(traj) == pytest.approx(expect, rel=0.03)


def test_time_derivative_steady():
    traj = make_traj(np.tile(np.linspace(-0.5, 0.5, 20), (4, 1)))
    assert time_derivative_l1(traj) == 0.0


# --- windowed value distributions --------------------------------------------

def test_young_constant_point_mass():
    traj = make_traj(np.full((4, 16), 0.25))
    hs = young_histograms(traj, (-1.0, 1.0), 4, 2, 16)
    assert np.allclose(hs.probabilities.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((hs.probabilities > 0).sum(axis=1) == 1)
    assert dirac_concentration(hs) == pytest.approx(0.0, abs=1e-12)


def test_young_checkerboard_half_half():
    i, n = np.meshgrid(np.arange(4), np.arange(16), indexing="ij")
    vals = np.where((i + n) % 2 == 0, 1.0, -1.0)
    traj = make_traj(vals.astype(float))
    hs = young_histograms(traj, (-1.0, 1.0), 4, 2, 64)
    occupied = hs.probabilities > 0
    assert np.all(occupied.sum(axis=1) == 2)
    assert np.all(np.isclose(hs.probabilities[occupied], 0.5))
    # symmetric two-point mass: variance 1, normalized by |I|^2 = 4
    assert dirac_concentration(hs) == pytest.approx(0.25, abs=3 * 2.0 / 64)


def test_young_moments_match_window_means():
    rng = np.random.default_rng(2)
    vals = rng.uniform(-1, 1, size=(6, 24))
    traj = make_traj(vals)
    hs = young_histograms(traj, (-1.0, 1.0), 8, 3, 128)
    raw_means = vals.reshape(2, 3, 3, 8).transpose(0, 2, 1, 3).reshape(6, -1).mean(axis=1)
    assert np.allclose(np.sort(hs.means), np.sort(raw_means), atol=2.0 / 128)


def test_young_rejects_bad_window_and_range():
    traj = make_traj(np.zeros((5, 16)))
    with pytest.raises(ValueError, match="divide"):
        young_histograms(traj, (-1, 1), 3, 5, 8)
    traj2 = make_traj(np.full((5, 16), 1.5))
    with pytest.raises(ValueError, match="invariant interval"):
        young_histograms(traj2, (-1, 1), 4, 5, 8)


def test_dirac_smoothing_contracts():
    i, n = np.meshgrid(np.arange(4), np.arange(32), indexing="ij")
    checker = np.where((i + n) % 2 == 0, 1.0, -1.0).astype(float)
    smooth = np.zeros_like(checker)
    smooth[:, 1:-1] = (checker[:, :-2] + 2 * checker[:, 1:-1] + checker[:, 2:]) / 4
    d_checker = dirac_concentration(young_histograms(make_traj(checker), (-1, 1), 8, 2, 64))
    d_smooth = dirac_concentration(young_histograms(make_traj(smooth), (-1, 1), 8, 2, 64))
    assert d_smooth < d_checker


def test_flux_identity_gap_definition(burgers):
    traj = make_traj(np.full((4, 16), 0.5))
    hs = young_histograms(traj, (-1, 1), 4, 2, 256)
    assert flux_identity_gap(hs, burgers) == pytest.approx(0.0, abs=1e-4)


# --- div-curl -----------------------------------------------------------------

def _stf(vals, T=1.0):
    t = make_traj(vals, T)
    return SpaceTimeField(t.grid, t.times, t.values)


def test_divcurl_constant_zero():
    c = np.full((8, 32), 0.7)
    z = np.zeros((8, 32))
    dev = div_curl_test((_stf(c), _stf(z)), (_stf(c), _stf(z)), (4, 8))
    assert dev == pytest.approx(0.0, abs=1e-12)


def test_divcurl_orthogonal_pair_compact():
    x = (np.arange(256) + 0.5) / 256
    s = np.tile(np.sin(2 * np.pi * 64 * x), (8, 1))
    z = np.zeros_like(s)
    dev = div_curl_test((_stf(s), _stf(z)), (_stf(z), _stf(s)), (4, 8))
    assert dev <= 1e-2
    # deviation cannot grow as the window grows
    dev_big = div_curl_test((_stf(s), _stf(z)), (_stf(z), _stf(s)), (8, 32))
    assert dev_big <= 1e-2


def test_divcurl_sin_squared_violation():
    x = (np.arange(256) + 0.5) / 256
    s = np.tile(np.sin(2 * np.pi * 64 * x), (8, 1))
    z = np.zeros_like(s)
    dev = div_curl_test((_stf(s), _stf(z)), (_stf(s), _stf(z)), (4, 8))
    assert dev >= 0.4


def test_divcurl_lattice_mismatch():
    a = _stf(np.zeros((4, 16)))
    b = _stf(np.zeros((4, 8)))
    with pytest.raises(ValueError, match="lattice"):
        div_curl_test((a, a), (b, b), (2, 4))


# --- compensated quadratic ------------------------------------------------------

@pytest.fixture(scope="module")
def flux2d():
    return make_flux(("burgers", "linear"), (-1.0, 1.0), 1e-8, {"a": 1.0})


def test_compensated_tables_symbolic(flux2d):
    quad = build_compensated_quad(flux2d, 1e-10)
    lat = quad.lattice
    # F11 = u^3/3, F12 = u^2/2, F22 = u for f1 = u^2/2, f2 = u
    for w in (-0.8, -0.2, 0.5, 1.0):
        assert float(interp(lat, quad.F11, w)) == pytest.approx(w**3 / 3, abs=1e-6)
        assert float(interp(lat, quad.F12, w)) == pytest.approx(w**2 / 2, abs=1e-6)
        assert float(interp(lat, quad.F22, w)) == pytest.approx(w, abs=1e-6)
    # D(w=1, c=0) = (1/3)(1) - (1/2)^2 = 1/12
    d = (float(interp(lat, quad.F11, 1.0)) - float(interp(lat, quad.F11, 0.0))) \
        * (float(interp(lat, quad.F22, 1.0)) - float(interp(lat, quad.F22, 0.0))) \
        - (float(interp(lat, quad.F12, 1.0)) - float(interp(lat, quad.F12, 0.0))) ** 2
    assert d == pytest.approx(1.0 / 12.0, abs=1e-5)


def test_cauchy_schwarz_pointwise(flux2d):
    quad = build_compensated_quad(flux2d, 1e-10)
    lat = quad.lattice
    rng = np.random.default_rng(9)
    w = rng.uniform(-1, 1, 500)
    c = rng.uniform(-1, 1, 500)
    d11 = interp(lat, quad.F11, w) - interp(lat, quad.F11, c)
    d22 = interp(lat, quad.F22, w) - interp(lat, quad.F22, c)
    d12 = interp(lat, quad.F12, w) - interp(lat, quad.F12, c)
    assert np.min(d11 * d22 - d12**2) >= -1e-12


def test_choose_c_inverse(flux2d):
    quad = build_compensated_quad(flux2d, 1e-10)
    c, clamped = choose_c(np.array([1.0 / 3.0]), quad)
    assert c[0] == pytest.approx(1.0, abs=1e-5)
    assert clamped == 0
    c0, _ = choose_c(np.array([0.0]), quad)
    assert c0[0] == pytest.approx(0.0, abs=1e-5)
    targets = np.linspace(-0.3, 0.3, 7) ** 3 / 3.0
    cs, _ = choose_c(targets, quad)
    assert np.all(np.diff(cs) > 0)
    _, clamp2 = choose_c(np.array([10.0]), quad)
    assert clamp2 == 1


def test_compensated_D_constant_field(flux2d):
    vals = np.full((4, 8, 8), 0.4)
    traj = make_traj(vals, T=0.5)
    quad = build_compensated_quad(flux2d, 1e-10)
    quad = attach_c_field(quad, traj, (2, 4, 4))
    assert compensated_D(traj, quad) == pytest.approx(0.0, abs=1e-10)
    field = compensated_D_field(traj, quad)
    assert np.min(field.values) >= -1e-12


def test_compensated_D_requires_2d(flux2d):
    traj = make_traj(np.zeros((4, 8)))
    quad = build_compensated_quad(flux2d, 1e-10)
    with pytest.raises(ValueError, match="d = 2"):
        compensated_D_field(traj, quad)
