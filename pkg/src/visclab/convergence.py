"""Distances to the reference solution and rate fits across the ladder."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import FieldTrajectory
from .norms import SpaceTimeField, lp_norm


def l1_distance(a: FieldTrajectory, b: FieldTrajectory) -> float:
    """Space-time L1 norm of the difference of two matched trajectories."""
    if a.grid != b.grid:
        raise ValueError("trajectories live on different grids")
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValueError("trajectories have different snapshot times")
    diff = SpaceTimeField(a.grid, a.times, a.values - b.values)
    return lp_norm(diff, 1)


@dataclass(frozen=True)
class RateFit:
    rate: float
    residual: float     # max |log error - fitted line| over the points
    exact: bool = False # some error was zero: exact-convergence sentinel


def fit_rate(pairs) -> RateFit:
    """Least-squares slope of log(error) against log(eps)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 ladder points for a rate fit")
    eps = np.array([p[0] for p in pairs], dtype=np.float64)
    err = np.array([p[1] for p in pairs], dtype=np.float64)
    if np.any(err <= 0.0):
        return RateFit(math.inf, 0.0, exact=True)
    x = np.log(eps)
    y = np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(float(slope), resid)


@dataclass(frozen=True)
class ConvergenceReport:
    epsilons: tuple[float, ...]
    errors_vs_reference: tuple[float, ...]
    cauchy_pairs: tuple[tuple[float, float], ...]  # (eps_k, d(u_k, u_{k+1}))
    reference_fit: RateFit | None
    cauchy_fit: RateFit | None

    @property
    def strictly_decreasing(self) -> bool:
        e = self.errors_vs_reference
        return all(b < a for a, b in zip(e, e[1:]))


def build_convergence_report(trajs: list[FieldTrajectory],
                             reference: FieldTrajectory) -> ConvergenceReport:
    eps = tuple(t.epsilon for t in trajs)
    errors = tuple(l1_distance(t, reference) for t in trajs)
    cauchy = tuple((trajs[k].epsilon, l1_distance(trajs[k], trajs[k + 1]))
                   for k in range(len(trajs) - 1))
    ref_fit = fit_rate(list(zip(eps, errors))) if len(eps) >= 3 else None
    cauchy_fit = fit_rate(list(cauchy)) if len(cauchy) >= 3 else None
    return ConvergenceReport(eps, errors, cauchy, ref_fit, cauchy_fit)
