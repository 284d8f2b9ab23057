"""Explicit finite-volume solver for the viscous balance law.

Scheme: Engquist-Osher upwind convection plus flux-form centered diffusion
with the face viscosity evaluated at the arithmetic mean of the adjacent
cells.  Both ingredients are monotone under the time-step bound below, which
is what gives the discrete maximum principle.  Boundary faces see a ghost
value of zero for both fluxes (homogeneous Dirichlet).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels, tables
from .domain import (Field, FieldTrajectory, FluxSpec, Grid, ViscositySpec,
                     _check_range)

MAX_PRINCIPLE_HARD = 1e-8


class StepError(RuntimeError):
    """Hard failure of a time step (maximum-principle violation)."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


def stable_dt(grid: Grid, flux: FluxSpec, visc: ViscositySpec, eps: float,
              cfl: float) -> float:
    """Explicit-stability step: cfl * min(h/|f'| , h^2/(2 d eps sup B))."""
    if not 0.0 < cfl < 1.0:
        raise ValueError("cfl must lie in (0, 1)")
    hmin = min(grid.spacing)
    candidates = []
    if flux.lipschitz_bound > 0.0:
        candidates.append(hmin / flux.lipschitz_bound)
    if eps > 0.0 and visc.upper_bound > 0.0:
        candidates.append(hmin**2 / (2.0 * grid.dim * eps * visc.upper_bound))
    if not candidates:
        return cfl * grid.time_horizon
    return cfl * min(candidates)


def convective_face_flux(uL: float, uR: float, flux: FluxSpec, axis: int = 0) -> float:
    """Engquist-Osher flux from the tabulated one-sided integrals of f'."""
    _check_range(float(uL), flux.lattice)
    _check_range(float(uR), flux.lattice)
    tab = flux.tables[axis]
    return float(tables.interp(flux.lattice, tab.eo_plus, uL)
                 + tables.interp(flux.lattice, tab.eo_minus, uR))


def diffusive_face_flux(uL: float, uR: float, visc: ViscositySpec, eps: float,
                        h: float) -> float:
    """eps * B((uL+uR)/2) * (uR-uL)/h, the flux form of the viscous term."""
    if h <= 0:
        raise ValueError("spacing must be positive")
    bm = float(np.asarray(visc.B(0.5 * (uL + uR))))
    return eps * bm * (uR - uL) / h


@dataclass(frozen=True)
class SchemeState:
    field: Field
    time: float
    dt: float
    eps: float
    sup_bound: float
    steps_taken: int = 0
    max_abs_seen: float = 0.0


def _euler_apply(u: np.ndarray, dt: float, grid: Grid, flux: FluxSpec,
                 visc: ViscositySpec, eps: float, backend=None) -> np.ndarray:
    out = np.empty_like(u)
    lat = flux.lattice
    if grid.dim == 1:
        k = kernels.get_kernel("visc_step_1d", backend)
        k(u, dt, grid.spacing[0], eps, lat.lo, lat.inv_spacing,
          flux.tables[0].eo_plus, flux.tables[0].eo_minus, visc.table, out)
    else:
        k = kernels.get_kernel("visc_step_2d", backend)
        k(u, dt, grid.spacing[0], grid.spacing[1], eps, lat.lo, lat.inv_spacing,
          flux.tables[0].eo_plus, flux.tables[0].eo_minus,
          flux.tables[1].eo_plus, flux.tables[1].eo_minus, visc.table, out)
    return out


def _advance(u: np.ndarray, dt: float, grid: Grid, flux: FluxSpec,
             visc: ViscositySpec, eps: float, integrator: str,
             backend=None) -> np.ndarray:
    if integrator == "euler":
        return _euler_apply(u, dt, grid, flux, visc, eps, backend)
    if integrator == "heun":
        u1 = _euler_apply(u, dt, grid, flux, visc, eps, backend)
        u2 = _euler_apply(u1, dt, grid, flux, visc, eps, backend)
        return 0.5 * (u + u2)
    raise ValueError(f"unknown integrator {integrator!r}")


def step(state: SchemeState, flux: FluxSpec, visc: ViscositySpec,
         integrator: str = "euler", backend=None) -> SchemeState:
    """One explicit update; fails hard if the new state breaks the sup bound."""
    grid = state.field.grid
    unew = _advance(state.field.values, state.dt, grid, flux, visc, state.eps,
                    integrator, backend)
    m = float(np.max(np.abs(unew)))
    if m > state.sup_bound + MAX_PRINCIPLE_HARD:
        raise StepError(
            f"discrete maximum principle violated: |u| = {m} > "
            f"{state.sup_bound} at t = {state.time + state.dt}",
            step=state.steps_taken + 1, time=state.time + state.dt)
    return replace(state, field=Field(grid, unew), time=state.time + state.dt,
                   steps_taken=state.steps_taken + 1,
                   max_abs_seen=max(state.max_abs_seen, m))


def integrate(grid: Grid, u0: np.ndarray, flux: FluxSpec, visc: ViscositySpec,
              eps: float, cfl: float, snapshot_times: np.ndarray,
              integrator: str = "euler", sup_bound: float | None = None,
              backend=None) -> FieldTrajectory:
    """March to the horizon, landing exactly on each snapshot time."""
    u = np.array(u0, dtype=np.float64)
    if sup_bound is None:
        sup_bound = float(np.max(np.abs(u)))
    dt_base = stable_dt(grid, flux, visc, eps, cfl)
    times = np.asarray(snapshot_times, dtype=np.float64)
    snaps = [u.copy()]
    t = 0.0
    steps = 0
    max_seen = float(np.max(np.abs(u)))
    for target in times[1:]:
        while t < target - 1e-13 * max(1.0, target):
            dt = min(dt_base, target - t)
            u = _advance(u, dt, grid, flux, visc, eps, integrator, backend)
            t += dt
            steps += 1
            m = float(np.max(np.abs(u)))
            if m > sup_bound + MAX_PRINCIPLE_HARD:
                raise StepError(
                    f"discrete maximum principle violated: |u| = {m} > "
                    f"{sup_bound} at step {steps}, t = {t}",
                    step=steps, time=t)
            if m > max_seen:
                max_seen = m
        t = float(target)
        snaps.append(u.copy())
    return FieldTrajectory(grid, times, np.stack(snaps), epsilon=eps,
                           dt=dt_base, steps_taken=steps,
                           max_abs_seen=max_seen)


def snapshot_times(time_horizon: float, intervals: int) -> np.ndarray:
    return np.linspace(0.0, time_horizon, intervals + 1)
