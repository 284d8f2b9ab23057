"""Hot finite-volume update kernels.

Each kernel exists twice: a vectorized pure-numpy implementation and, when
numba is importable, an ``@njit`` twin compiled from explicit loops.  Both
paths use the same scalar arithmetic (same interpolation formula, same
operation order), so their outputs agree bit for bit; tests assert that.

Backend selection: numba when available, unless ``VISCLAB_DISABLE_NUMBA`` is
set.  ``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba missing entirely
    HAVE_NUMBA = False

ENV_FLAG = "VISCLAB_DISABLE_NUMBA"


def numba_enabled() -> bool:
    if not HAVE_NUMBA:
        return False
    return os.environ.get(ENV_FLAG, "").lower() not in ("1", "true", "yes")


def active_backend() -> str:
    return "numba" if numba_enabled() else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations


def _interp_np(tab, lo, inv, u):
    s = (u - lo) * inv
    k = np.clip(np.floor(s), 0.0, tab.shape[0] - 2.0)
    ki = k.astype(np.int64)
    frac = s - k
    return tab[ki] + frac * (tab[ki + 1] - tab[ki])


def visc_step_1d_numpy(u, dt, h, eps, lo, inv, eop, eom, btab, out):
    """One forward-Euler step of the viscous balance, zero ghost cells."""
    n = u.shape[0]
    ext = np.empty(n + 2)
    ext[0] = 0.0
    ext[-1] = 0.0
    ext[1:-1] = u
    ul = ext[:-1]
    ur = ext[1:]
    epsh = eps / h
    lam = dt / h
    conv = _interp_np(eop, lo, inv, ul) + _interp_np(eom, lo, inv, ur)
    bm = _interp_np(btab, lo, inv, 0.5 * (ul + ur))
    flux = conv - epsh * bm * (ur - ul)
    out[:] = u - lam * (flux[1:] - flux[:-1])
    return out


def visc_step_2d_numpy(u, dt, hx, hy, eps, lo, inv,
                       eopx, eomx, eopy, eomy, btab, out):
    nx, ny = u.shape
    lamx = dt / hx
    lamy = dt / hy
    ehx = eps / hx
    ehy = eps / hy
    ex = np.zeros((nx + 2, ny))
    ex[1:-1] = u
    al, ar = ex[:-1], ex[1:]
    fx = (_interp_np(eopx, lo, inv, al) + _interp_np(eomx, lo, inv, ar)
          - ehx * _interp_np(btab, lo, inv, 0.5 * (al + ar)) * (ar - al))
    ey = np.zeros((nx, ny + 2))
    ey[:, 1:-1] = u
    bl, br = ey[:, :-1], ey[:, 1:]
    fy = (_interp_np(eopy, lo, inv, bl) + _interp_np(eomy, lo, inv, br)
          - ehy * _interp_np(btab, lo, inv, 0.5 * (bl + br)) * (br - bl))
    out[:] = (u - lamx * (fx[1:, :] - fx[:-1, :])) - lamy * (fy[:, 1:] - fy[:, :-1])
    return out


def _godunov_face_np(ul, ur, lo, inv, ftab, crit_y, crit_f):
    fl = _interp_np(ftab, lo, inv, ul)
    fr = _interp_np(ftab, lo, inv, ur)
    gmin = np.minimum(fl, fr)
    gmax = np.maximum(fl, fr)
    for cy, cf in zip(crit_y, crit_f):
        gmin = np.where((ul < cy) & (cy < ur), np.minimum(gmin, cf), gmin)
        gmax = np.where((ur < cy) & (cy < ul), np.maximum(gmax, cf), gmax)
    return np.where(ul <= ur, gmin, gmax)


def godunov_step_1d_numpy(u, dt, h, lo, inv, ftab, crit_y, crit_f, out):
    n = u.shape[0]
    ext = np.empty(n + 2)
    ext[0] = 0.0
    ext[-1] = 0.0
    ext[1:-1] = u
    flux = _godunov_face_np(ext[:-1], ext[1:], lo, inv, ftab, crit_y, crit_f)
    out[:] = u - (dt / h) * (flux[1:] - flux[:-1])
    return out


def godunov_sweep_2d_numpy(u, dt, h, axis, lo, inv, ftab, crit_y, crit_f, out):
    """One conservative Godunov sweep along ``axis`` of a 2-D state."""
    if axis == 0:
        nx, ny = u.shape
        ext = np.zeros((nx + 2, ny))
        ext[1:-1] = u
        flux = _godunov_face_np(ext[:-1], ext[1:], lo, inv, ftab, crit_y, crit_f)
        out[:] = u - (dt / h) * (flux[1:, :] - flux[:-1, :])
    else:
        nx, ny = u.shape
        ext = np.zeros((nx, ny + 2))
        ext[:, 1:-1] = u
        flux = _godunov_face_np(ext[:, :-1], ext[:, 1:], lo, inv, ftab, crit_y, crit_f)
        out[:] = u - (dt / h) * (flux[:, 1:] - flux[:, :-1])
    return out


# ---------------------------------------------------------------------------
# loop twins (numba-compiled when available)


def _interp_scalar(tab, lo, inv, u):
    s = (u - lo) * inv
    k = math.floor(s)
    if k < 0.0:
        k = 0.0
    elif k > tab.shape[0] - 2.0:
        k = tab.shape[0] - 2.0
    ki = np.int64(k)
    frac = s - k
    return tab[ki] + frac * (tab[ki + 1] - tab[ki])


def _visc_step_1d_loops(u, dt, h, eps, lo, inv, eop, eom, btab, out):
    n = u.shape[0]
    epsh = eps / h
    lam = dt / h
    fprev = 0.0
    for i in range(n + 1):
        ul = u[i - 1] if i > 0 else 0.0
        ur = u[i] if i < n else 0.0
        conv = _interp_scalar(eop, lo, inv, ul) + _interp_scalar(eom, lo, inv, ur)
        bm = _interp_scalar(btab, lo, inv, 0.5 * (ul + ur))
        f = conv - epsh * bm * (ur - ul)
        if i > 0:
            out[i - 1] = u[i - 1] - lam * (f - fprev)
        fprev = f
    return out


def _visc_step_2d_loops(u, dt, hx, hy, eps, lo, inv,
                        eopx, eomx, eopy, eomy, btab, out):
    nx, ny = u.shape
    lamx = dt / hx
    lamy = dt / hy
    ehx = eps / hx
    ehy = eps / hy
    for j in range(ny):
        fprev = 0.0
        for i in range(nx + 1):
            ul = u[i - 1, j] if i > 0 else 0.0
            ur = u[i, j] if i < nx else 0.0
            conv = _interp_scalar(eopx, lo, inv, ul) + _interp_scalar(eomx, lo, inv, ur)
            bm = _interp_scalar(btab, lo, inv, 0.5 * (ul + ur))
            f = conv - ehx * bm * (ur - ul)
            if i > 0:
                out[i - 1, j] = u[i - 1, j] - lamx * (f - fprev)
            fprev = f
    for i in range(nx):
        fprev = 0.0
        for j in range(ny + 1):
            ul = u[i, j - 1] if j > 0 else 0.0
            ur = u[i, j] if j < ny else 0.0
            conv = _interp_scalar(eopy, lo, inv, ul) + _interp_scalar(eomy, lo, inv, ur)
            bm = _interp_scalar(btab, lo, inv, 0.5 * (ul + ur))
            f = conv - ehy * bm * (ur - ul)
            if j > 0:
                out[i, j - 1] = out[i, j - 1] - lamy * (f - fprev)
            fprev = f
    return out


def _godunov_face_scalar(ul, ur, lo, inv, ftab, crit_y, crit_f):
    fl = _interp_scalar(ftab, lo, inv, ul)
    fr = _interp_scalar(ftab, lo, inv, ur)
    if ul <= ur:
        g = min(fl, fr)
        for c in range(crit_y.shape[0]):
            cy = crit_y[c]
            if ul < cy and cy < ur:
                cf = crit_f[c]
                if cf < g:
                    g = cf
        return g
    g = max(fl, fr)
    for c in range(crit_y.shape[0]):
        cy = crit_y[c]
        if ur < cy and cy < ul:
            cf = crit_f[c]
            if cf > g:
                g = cf
    return g


def _godunov_step_1d_loops(u, dt, h, lo, inv, ftab, crit_y, crit_f, out):
    n = u.shape[0]
    lam = dt / h
    fprev = 0.0
    for i in range(n + 1):
        ul = u[i - 1] if i > 0 else 0.0
        ur = u[i] if i < n else 0.0
        f = _godunov_face_scalar(ul, ur, lo, inv, ftab, crit_y, crit_f)
        if i > 0:
            out[i - 1] = u[i - 1] - lam * (f - fprev)
        fprev = f
    return out


def _godunov_sweep_2d_loops(u, dt, h, axis, lo, inv, ftab, crit_y, crit_f, out):
    nx, ny = u.shape
    lam = dt / h
    if axis == 0:
        for j in range(ny):
            fprev = 0.0
            for i in range(nx + 1):
                ul = u[i - 1, j] if i > 0 else 0.0
                ur = u[i, j] if i < nx else 0.0
                f = _godunov_face_scalar(ul, ur, lo, inv, ftab, crit_y, crit_f)
                if i > 0:
                    out[i - 1, j] = u[i - 1, j] - lam * (f - fprev)
                fprev = f
    else:
        for i in range(nx):
            fprev = 0.0
            for j in range(ny + 1):
                ul = u[i, j - 1] if j > 0 else 0.0
                ur = u[i, j] if j < ny else 0.0
                f = _godunov_face_scalar(ul, ur, lo, inv, ftab, crit_y, crit_f)
                if j > 0:
                    out[i, j - 1] = u[i, j - 1] - lam * (f - fprev)
                fprev = f
    return out


if HAVE_NUMBA:
    _interp_scalar = njit(cache=True)(_interp_scalar)
    visc_step_1d_numba = njit(cache=True)(_visc_step_1d_loops)
    visc_step_2d_numba = njit(cache=True)(_visc_step_2d_loops)
    _godunov_face_scalar = njit(cache=True)(_godunov_face_scalar)
    godunov_step_1d_numba = njit(cache=True)(_godunov_step_1d_loops)
    godunov_sweep_2d_numba = njit(cache=True)(_godunov_sweep_2d_loops)
else:  # pragma: no cover
    visc_step_1d_numba = None
    visc_step_2d_numba = None
    godunov_step_1d_numba = None
    godunov_sweep_2d_numba = None


KERNELS = {
    "numpy": {
        "visc_step_1d": visc_step_1d_numpy,
        "visc_step_2d": visc_step_2d_numpy,
        "godunov_step_1d": godunov_step_1d_numpy,
        "godunov_sweep_2d": godunov_sweep_2d_numpy,
    },
    "numba": {
        "visc_step_1d": visc_step_1d_numba,
        "visc_step_2d": visc_step_2d_numba,
        "godunov_step_1d": godunov_step_1d_numba,
        "godunov_sweep_2d": godunov_sweep_2d_numba,
    },
}


def get_kernel(name: str, backend: str | None = None):
    b = backend or active_backend()
    if b == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    fn = KERNELS[b][name]
    if fn is None:  # pragma: no cover
        raise RuntimeError(f"kernel {name} unavailable for backend {b}")
    return fn
