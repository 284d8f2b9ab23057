"""Diagnostics for the compactness program.

Instruments: the entropy-production field and its split into a divergence
part (measured in the negative-order norm) and a signed dissipation part
(measured in the total-mass norm), the time-derivative bound, windowed value
histograms standing in for the parametrized limit measures, a div-curl
deviation test, and the two-dimensional compensated quadratic.

Weak limits have no finite-data counterpart, so coarse space-time window
averages of the finest ladder member stand in for them throughout; window
sizes are configuration knobs and are reported with the outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tables
from .domain import EntropyPair, FieldTrajectory, FluxSpec, ViscositySpec
from .norms import SpaceTimeField, h_minus_one_norm, measure_norm
from .tables import TableLattice


# ---------------------------------------------------------------------------
# entropy production


def _time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Centered in the interior, one-sided at the first and last snapshots."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    out[0] = (values[1] - values[0]) / dt
    out[-1] = (values[-1] - values[-2]) / dt
    return out


def _centered_space(values: np.ndarray, axis: int, h: float,
                    boundary_value: float) -> np.ndarray:
    """(v_{i+1} - v_{i-1}) / 2h with Dirichlet ghost values outside."""
    ext_shape = list(values.shape)
    ext_shape[axis] += 2
    ext = np.full(ext_shape, boundary_value, dtype=np.float64)
    sl = [slice(None)] * values.ndim
    sl[axis] = slice(1, -1)
    ext[tuple(sl)] = values
    up = [slice(None)] * values.ndim
    up[axis] = slice(2, None)
    dn = [slice(None)] * values.ndim
    dn[axis] = slice(0, -2)
    return (ext[tuple(up)] - ext[tuple(dn)]) / (2.0 * h)


def entropy_production_total(traj: FieldTrajectory, pair: EntropyPair) -> SpaceTimeField:
    """Discrete field d/dt eta(u) + sum_j d/dx_j q_j(u) on the snapshot lattice."""
    if traj.num_snapshots < 3:
        raise ValueError("need at least 3 snapshots for the production field")
    steps = np.diff(traj.times)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=1e-14):
        raise ValueError("snapshots must be uniform in time")
    dt = float(steps[0])
    grid = traj.grid
    eta_u = np.asarray(pair.eta(traj.values), dtype=np.float64)
    total = _time_derivative(eta_u, dt)
    for axis in range(grid.dim):
        q_u = tables.interp(pair.lattice, pair.q[axis], traj.values)
        q_ghost = float(tables.interp(pair.lattice, pair.q[axis], 0.0))
        total += _centered_space(q_u, axis + 1, grid.spacing[axis], q_ghost)
    return SpaceTimeField(grid, traj.times, total)


@dataclass(frozen=True)
class EntropyProductionSplit:
    eps: float
    divergence_part: SpaceTimeField   # flux-form, vanishes in the dual norm
    dissipation_part: SpaceTimeField  # signed, bounded in total mass
    h1_norm_A: float
    measure_norm_M: float


def decompose_production(traj: FieldTrajectory, pair: EntropyPair,
                         visc: ViscositySpec, eps: float) -> EntropyProductionSplit:
    """Split the production into divergence and dissipation parts.

    A = eps sum_j D_j(B(face mean) D_j eta(u)) in flux form, M = -eps sum_j
    B(u) (centered gradient)^2 eta''(u).  M is nonpositive for every convex
    entropy because B has a positive floor.
    """
    if eps <= 0:
        raise ValueError("the split is defined for positive viscosity")
    grid = traj.grid
    u = traj.values
    eta_u = np.asarray(pair.eta(u), dtype=np.float64)
    eta_ghost = float(np.asarray(pair.eta(0.0)))
    A = np.zeros_like(u)
    M = np.zeros_like(u)
    b_of_u = np.asarray(visc.B(u), dtype=np.float64)
    etapp_u = np.asarray(pair.etapp(u), dtype=np.float64)
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        ax = axis + 1
        ext_shape = list(u.shape)
        ext_shape[ax] += 2
        u_ext = np.zeros(ext_shape)
        sl = [slice(None)] * u.ndim
        sl[ax] = slice(1, -1)
        u_ext[tuple(sl)] = u
        eta_ext = np.full(ext_shape, eta_ghost)
        eta_ext[tuple(sl)] = eta_u
        lo_sl = [slice(None)] * u.ndim
        lo_sl[ax] = slice(0, -1)
        hi_sl = [slice(None)] * u.ndim
        hi_sl[ax] = slice(1, None)
        ul, ur = u_ext[tuple(lo_sl)], u_ext[tuple(hi_sl)]
        el, er = eta_ext[tuple(lo_sl)], eta_ext[tuple(hi_sl)]
        face = np.asarray(visc.B(0.5 * (ul + ur)), dtype=np.float64) * (er - el) / h
        fl = [slice(None)] * u.ndim
        fl[ax] = slice(0, -1)
        fh = [slice(None)] * u.ndim
        fh[ax] = slice(1, None)
        A += eps * (face[tuple(fh)] - face[tuple(fl)]) / h
        gc = _centered_space(u, ax, h, 0.0)
        M += b_of_u * gc * gc
    M = -eps * M * etapp_u
    fa = SpaceTimeField(grid, traj.times, A)
    fm = SpaceTimeField(grid, traj.times, M)
    return EntropyProductionSplit(eps, fa, fm, h_minus_one_norm(fa),
                                  measure_norm(fm))


def time_derivative_l1(traj: FieldTrajectory) -> float:
    """L1 norm over the cylinder of the forward-difference time derivative."""
    if traj.num_snapshots < 2:
        raise ValueError("need at least 2 snapshots")
    diffs = np.abs(np.diff(traj.values, axis=0))
    return float(np.sum(diffs)) * traj.grid.cell_volume


# ---------------------------------------------------------------------------
# windowed value distributions


@dataclass(frozen=True)
class YoungHistogramSet:
    interval: tuple[float, float]
    window: tuple[int, ...]       # snapshots, cells per axis
    bin_edges: np.ndarray
    probabilities: np.ndarray     # (num_windows, bins)
    means: np.ndarray
    variances: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


BIN_SLACK = 1e-8


def young_histograms(traj: FieldTrajectory, interval: tuple[float, float],
                     window_cells: int, window_snaps: int,
                     bins: int) -> YoungHistogramSet:
    """Per space-time window, the normalized histogram of u values over I."""
    grid = traj.grid
    nt = traj.num_snapshots
    if nt % window_snaps != 0:
        raise ValueError(f"window of {window_snaps} snapshots does not divide "
                         f"{nt} snapshots")
    for n in grid.cells:
        if n % window_cells != 0:
            raise ValueError(f"window of {window_cells} cells does not divide "
                             f"{n} cells")
    lo, hi = interval
    v = traj.values
    if v.min() < lo - BIN_SLACK or v.max() > hi + BIN_SLACK:
        raise ValueError("values fall outside the invariant interval; the "
                         "empirical measures require the maximum principle")
    v = np.clip(v, lo, hi)
    # reshape into blocks: (T, t, X, x[, Y, y]) then flatten block contents
    if grid.dim == 1:
        nx = grid.cells[0]
        blocks = v.reshape(nt // window_snaps, window_snaps,
                           nx // window_cells, window_cells)
        blocks = blocks.transpose(0, 2, 1, 3).reshape(-1, window_snaps * window_cells)
    else:
        nx, ny = grid.cells
        blocks = v.reshape(nt // window_snaps, window_snaps,
                           nx // window_cells, window_cells,
                           ny // window_cells, window_cells)
        blocks = blocks.transpose(0, 2, 4, 1, 3, 5).reshape(
            -1, window_snaps * window_cells * window_cells)
    edges = np.linspace(lo, hi, bins + 1)
    width = edges[1] - edges[0]
    idx = np.minimum(((blocks - lo) / width).astype(np.int64), bins - 1)
    probs = np.zeros((blocks.shape[0], bins))
    rows = np.repeat(np.arange(blocks.shape[0]), blocks.shape[1])
    np.add.at(probs, (rows, idx.ravel()), 1.0)
    probs /= blocks.shape[1]
    centers = 0.5 * (edges[:-1] + edges[1:])
    means = probs @ centers
    variances = probs @ centers**2 - means**2
    return YoungHistogramSet((lo, hi), (window_snaps, window_cells),
                             edges, probs, means, variances)


def dirac_concentration(hset: YoungHistogramSet) -> float:
    """Mean per-window variance, normalized by |I|^2; zero iff point masses."""
    lo, hi = hset.interval
    return float(np.mean(hset.variances)) / (hi - lo) ** 2


def flux_identity_gap(hset: YoungHistogramSet, flux: FluxSpec,
                      axis: int = 0) -> float:
    """Mean over windows of |<nu, f> - f(<nu, lambda>)|."""
    comp = flux.components[axis]
    f_centers = np.asarray(comp.f(hset.bin_centers), dtype=np.float64)
    nu_f = hset.probabilities @ f_centers
    f_mean = np.asarray(comp.f(hset.means), dtype=np.float64)
    return float(np.mean(np.abs(nu_f - f_mean)))


# ---------------------------------------------------------------------------
# div-curl deviation


def _block_means(arr: np.ndarray, window: tuple[int, ...]) -> np.ndarray:
    """Mean over coarse blocks; trailing ragged blocks keep their own mean."""
    out = arr
    for axis, w in enumerate(window):
        n = out.shape[axis]
        stops = list(range(w, n + 1, w))
        if not stops or stops[-1] != n:
            stops.append(n)
        starts = [0] + stops[:-1]
        segs = [out[(slice(None),) * axis + (slice(a, b),)].mean(axis=axis,
                                                                  keepdims=True)
                for a, b in zip(starts, stops)]
        out = np.concatenate(segs, axis=axis)
    return out


def _block_expand(coarse: np.ndarray, window: tuple[int, ...],
                  shape: tuple[int, ...]) -> np.ndarray:
    """Broadcast coarse block values back onto the fine lattice."""
    out = coarse
    for axis, (w, n) in enumerate(zip(window, shape)):
        reps = np.full(out.shape[axis], w, dtype=np.int64)
        pad = n - int(reps[:-1].sum())
        reps[-1] = pad
        out = np.repeat(out, reps, axis=axis)
    return out


def div_curl_test(G: tuple[SpaceTimeField, SpaceTimeField],
                  H: tuple[SpaceTimeField, SpaceTimeField],
                  window: tuple[int, ...]) -> float:
    """max over coarse windows of |avg(G.H) - avg(G).avg(H)|."""
    g1, g2 = G
    h1, h2 = H
    base = g1.values.shape
    for f in (g2, h1, h2):
        if f.values.shape != base:
            raise ValueError("div-curl fields must share one lattice")
    dot = g1.values * h1.values + g2.values * h2.values
    avg_dot = _block_means(dot, window)
    avg = lambda f: _block_means(f.values, window)
    prod = avg(g1) * avg(h1) + avg(g2) * avg(h2)
    return float(np.max(np.abs(avg_dot - prod)))


# ---------------------------------------------------------------------------
# compensated quadratic (two space dimensions)


@dataclass(frozen=True)
class CompensatedQuad:
    """Tabulated integrals of (f1')^2, f1'f2', (f2')^2 and the window c-field."""

    lattice: TableLattice
    F11: np.ndarray
    F12: np.ndarray
    F22: np.ndarray
    window: tuple[int, ...] | None = None
    c_field: np.ndarray | None = None       # coarse window lattice
    f11_bar: np.ndarray | None = None
    clamp_count: int = 0


def build_compensated_quad(flux: FluxSpec, tol: float) -> CompensatedQuad:
    if flux.dim == 1:
        c1 = c2 = flux.components[0]
    else:
        c1, c2 = flux.components[0], flux.components[1]
    lat = flux.lattice
    F11 = tables.cumulative_table(lambda s: np.asarray(c1.fp(s)) ** 2, lat, tol)
    F12 = tables.cumulative_table(
        lambda s: np.asarray(c1.fp(s)) * np.asarray(c2.fp(s)), lat, tol)
    F22 = tables.cumulative_table(lambda s: np.asarray(c2.fp(s)) ** 2, lat, tol)
    return CompensatedQuad(lat, F11, F12, F22)


def tartar_pair_table(flux: FluxSpec, tol: float) -> np.ndarray:
    """g(lambda) = integral of (f')^2: the 1-D companion flux to f itself."""
    return build_compensated_quad(flux, tol).F11


def _invert_increasing(lattice: TableLattice, values: np.ndarray,
                       target: float, tol: float = 1e-10) -> tuple[float, bool]:
    """Bisection inverse of a monotone table interpolant; clamps outside."""
    lo, hi = lattice.lo, lattice.hi
    vlo, vhi = float(values[0]), float(values[-1])
    if target <= vlo:
        return lo, target < vlo - 1e-15
    if target >= vhi:
        return hi, target > vhi + 1e-15
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if float(tables.interp(lattice, values, mid)) < target:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b), False


def choose_c(f11_bar: np.ndarray, quad: CompensatedQuad) -> tuple[np.ndarray, int]:
    """Per window, c with F11(c) equal to the window average of F11(u).

    Requires F11 strictly increasing on I, i.e. f1' nonzero almost everywhere
    (the genuine-nonlinearity condition).  Targets that fall outside the
    table range by discretization noise are clamped to the endpoint and
    counted.
    """
    dF = np.diff(quad.F11)
    if np.min(dF) < 0 or float(quad.F11[-1] - quad.F11[0]) <= 0:
        raise ValueError("F11 must be strictly increasing on I to pick c")
    flat = f11_bar.ravel()
    out = np.empty_like(flat)
    clamped = 0
    for i, tgt in enumerate(flat):
        c, was_clamped = _invert_increasing(quad.lattice, quad.F11, float(tgt))
        out[i] = c
        clamped += int(was_clamped)
    return out.reshape(f11_bar.shape), clamped


def attach_c_field(quad: CompensatedQuad, finest: FieldTrajectory,
                   window: tuple[int, ...]) -> CompensatedQuad:
    """Fix the comparison field c from coarse-window averages of the finest member."""
    f11_u = tables.interp(quad.lattice, quad.F11, finest.values)
    f11_bar = _block_means(f11_u, window)
    c_field, clamped = choose_c(f11_bar, quad)
    return CompensatedQuad(quad.lattice, quad.F11, quad.F12, quad.F22,
                           window=window, c_field=c_field, f11_bar=f11_bar,
                           clamp_count=clamped)


def compensated_D_field(traj: FieldTrajectory, quad: CompensatedQuad) -> SpaceTimeField:
    """Pointwise nonnegative quadratic D(u) against the window c-field."""
    if traj.grid.dim != 2:
        raise ValueError("the compensated quadratic is a d = 2 diagnostic")
    if quad.c_field is None or quad.window is None:
        raise ValueError("attach_c_field must run before evaluating D")
    lat = quad.lattice
    u = traj.values
    c = _block_expand(quad.c_field, quad.window, u.shape)
    d11 = tables.interp(lat, quad.F11, u) - tables.interp(lat, quad.F11, c)
    d22 = tables.interp(lat, quad.F22, u) - tables.interp(lat, quad.F22, c)
    d12 = tables.interp(lat, quad.F12, u) - tables.interp(lat, quad.F12, c)
    return SpaceTimeField(traj.grid, traj.times, d11 * d22 - d12 * d12)


def compensated_D(traj: FieldTrajectory, quad: CompensatedQuad) -> float:
    """Space-time average of D(u); Cauchy-Schwarz keeps it nonnegative."""
    return float(np.mean(compensated_D_field(traj, quad).values))
