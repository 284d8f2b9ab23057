import numpy as np
import pytest

from visclab.convergence import fit_rate
from visclab.domain import Grid
from visclab.mollify import (kernel_mass, make_initial_data, make_kernel,
                             mollify)
from visclab.norms import total_variation


def grid1d(n=400):
    return Grid((n,), (0.0,), (1.0,), 1.0)


@pytest.mark.parametrize("width", [0.02, 0.05, 0.1])
def test_kernel_mass_is_one(width):
    k = make_kernel(width, (1.0 / 400,))
    assert kernel_mass(k) == pytest.approx(1.0, abs=1e-12)
    assert np.all(k.weights >= 0.0)


def test_kernel_mass_2d():
    k = make_kernel(0.05, (1.0 / 64, 1.0 / 64))
    assert kernel_mass(k) == pytest.approx(1.0, abs=1e-12)


def test_kernel_support_radius():
    h = 1.0 / 400
    k = make_kernel(0.02, (h,))
    half = (k.weights.size - 1) // 2
    assert half * h < 0.02


def test_mollify_zero_is_zero():
    g = grid1d()
    data = make_initial_data(g, "bump", (0.5,), 0.2, 0.0)
    out = mollify(data, make_kernel(0.05, g.spacing))
    assert np.all(out.values == 0.0)


@pytest.mark.parametrize("preset,width", [("bump", 0.02), ("bump", 0.08),
                                          ("box", 0.02), ("box", 0.08),
                                          ("twobump", 0.02)])
def test_sup_bound(preset, width):
    g = grid1d()
    data = make_initial_data(g, preset, (0.5,), 0.15, 1.0,
                             amplitude2=-0.5, separation=0.2)
    out = mollify(data, make_kernel(width, g.spacing))
    assert np.max(np.abs(out.values)) <= data.sup_norm + 1e-12


def test_gradient_bound_step_profile():
    # step-like profile on 400 cells, width 0.02; both sides numerical
    g = grid1d(400)
    data = make_initial_data(g, "box", (0.5,), 0.2, 1.0)
    out = mollify(data, make_kernel(0.02, g.spacing))
    h = g.spacing[0]
    assert total_variation(out) <= data.tv * (1.0 + 10.0 * h)
    assert total_variation(out) <= data.tv  # discrete Young inequality is exact here


def test_support_stays_inside():
    g = grid1d(200)
    data = make_initial_data(g, "bump", (0.5,), 0.2, 1.0)
    out = mollify(data, make_kernel(0.05, g.spacing))
    x = g.centers(0)
    outside = (x < 0.2) | (x > 0.8)
    assert np.all(out.values[outside] == 0.0)
    assert out.values[0] == 0.0 and out.values[-1] == 0.0


def test_too_wide_kernel_rejected():
    g = grid1d(200)
    data = make_initial_data(g, "bump", (0.5,), 0.45, 1.0)  # margin 0.05
    with pytest.raises(ValueError, match="margin"):
        mollify(data, make_kernel(0.1, g.spacing))


def test_laplacian_scaling_box_data():
    # discrete Laplacian mass grows like 1/width for rough data
    g = grid1d(800)
    h = g.spacing[0]
    data = make_initial_data(g, "box", (0.5,), 0.25, 1.0)
    pts = []
    for width in (0.08, 0.04, 0.02):
        out = mollify(data, make_kernel(width, g.spacing))
        lap = np.abs(np.diff(out.values, 2)) / h**2
        pts.append((width, float(lap.sum() * h)))
    fit = fit_rate(pts)
    assert fit.rate <= -0.8


def test_l1_convergence_to_data():
    g = grid1d(800)
    h = g.spacing[0]
    data = make_initial_data(g, "bump", (0.5,), 0.25, 1.0)
    errs = []
    for width in (0.1, 0.05, 0.025):
        out = mollify(data, make_kernel(width, g.spacing))
        errs.append(float(np.sum(np.abs(out.values - data.field.values)) * h))
    assert errs[0] > errs[1] > errs[2]


def test_2d_mollify_sup_and_support():
    g = Grid((64, 64), (0.0, 0.0), (1.0, 1.0), 1.0)
    data = make_initial_data(g, "bump", (0.5, 0.5), 0.25, 1.0)
    out = mollify(data, make_kernel(0.1, g.spacing))
    assert np.max(np.abs(out.values)) <= 1.0 + 1e-12
    assert out.values[0, :].max() == 0.0 and out.values[:, 0].max() == 0.0
