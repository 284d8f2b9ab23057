"""Estimate evaluation: per-epsilon left/right-hand sides and pass flags.

Estimate ids: max_principle, energy, h1_decay, measure_bound, ut_l1, dirac,
divcurl, d2_quad, convergence.  The divcurl row is an instrument self-test on
the run's own lattice (synthetic compact and violating pairs with known
deviations); the per-member trajectory deviations are reported alongside in
the diagnostics table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compactness import div_curl_test
from .convergence import ConvergenceReport
from .domain import FieldTrajectory
from .norms import SpaceTimeField

ESTIMATE_IDS = ("max_principle", "energy", "h1_decay", "measure_bound",
                "ut_l1", "dirac", "divcurl", "d2_quad", "convergence")

MAX_PRINCIPLE_TOL = 1e-10
ENERGY_SLACK = 1.05
H1_SLOPE_MIN = 0.4
H1_RESID_MAX = 0.15
UT_SLOPE_MIN = -0.1
DIRAC_FACTOR = 0.5
DIVCURL_COMPACT_MAX = 1e-2
DIVCURL_VIOLATION_MIN = 0.4
D2_POINTWISE_FLOOR = -1e-12
CAUCHY_RATE_MIN = 0.3


@dataclass
class MemberDiagnostics:
    eps: float
    eps_label: str
    entropy: dict = field(default_factory=dict)  # id -> (h1_norm_A, measure_norm_M)
    ut_l1: float = 0.0
    dirac: float = 0.0
    divcurl_dev: float = float("nan")
    d_mean: float = float("nan")
    d_min: float = float("nan")
    snapshot_sup: float = 0.0
    energy: float = 0.0
    flux_identity: float = float("nan")


@dataclass(frozen=True)
class EstimateRow:
    estimate: str
    detail: str
    epsilon: str
    lhs: float
    rhs: float
    op: str
    passed: bool


def grad_energy_lhs(traj: FieldTrajectory) -> float:
    """sum_j eps * ||d_j u||^2 over the cylinder, centered differences."""
    stf = SpaceTimeField(traj.grid, traj.times, traj.values)
    w = stf.time_weights()
    grid = traj.grid
    cell = grid.cell_volume
    total = 0.0
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        ax = axis + 1
        ext_shape = list(traj.values.shape)
        ext_shape[ax] += 2
        ext = np.zeros(ext_shape)
        sl = [slice(None)] * traj.values.ndim
        sl[ax] = slice(1, -1)
        ext[tuple(sl)] = traj.values
        up = [slice(None)] * traj.values.ndim
        up[ax] = slice(2, None)
        dn = [slice(None)] * traj.values.ndim
        dn[ax] = slice(0, -2)
        g = (ext[tuple(up)] - ext[tuple(dn)]) / (2.0 * h)
        per_snap = np.sum(g * g, axis=tuple(range(1, g.ndim))) * cell
        total += float(np.sum(per_snap * w))
    return traj.epsilon * total


def _check(rows, estimate, detail, eps_label, lhs, rhs, op):
    if op == "<=":
        ok = lhs <= rhs
    elif op == ">=":
        ok = lhs >= rhs
    elif op == "<":
        ok = lhs < rhs
    else:
        raise ValueError(op)
    rows.append(EstimateRow(estimate, detail, eps_label, float(lhs),
                            float(rhs), op, bool(ok)))


def synthetic_divcurl(grid, times, window) -> tuple[float, float]:
    """Deviation of the compact and of the violating synthetic pairs."""
    nx = grid.cells[0]
    mode = max(nx // 4, 1)
    x = grid.centers(0)
    s1 = np.sin(2.0 * np.pi * mode * x)
    shape = (times.size,) + grid.cells
    s = np.broadcast_to(
        s1.reshape((1, nx) + (1,) * (grid.dim - 1)), shape).copy()
    zero = np.zeros(shape)
    mk = lambda v: SpaceTimeField(grid, times, v)
    compact = div_curl_test((mk(s), mk(zero)), (mk(zero), mk(s)), window)
    violation = div_curl_test((mk(s), mk(zero)), (mk(s), mk(zero)), window)
    return compact, violation


def evaluate_estimates(scenario, members: list[MemberDiagnostics],
                       conv: ConvergenceReport | None,
                       sup0: float, r_floor: float, b_sup: float,
                       volume: float, etapp_sup: dict,
                       divcurl_compact: float, divcurl_violation: float,
                       rate_fits: dict) -> list[EstimateRow]:
    """Assemble the full estimate table for one run."""
    rows: list[EstimateRow] = []
    dim = scenario.dim

    for m in members:
        _check(rows, "max_principle", "snapshot sup", m.eps_label,
               m.snapshot_sup, sup0 + MAX_PRINCIPLE_TOL, "<=")

    energy_rhs = ENERGY_SLACK * sup0 * sup0 * volume / (2.0 * r_floor)
    for m in members:
        _check(rows, "energy", "weighted gradient energy", m.eps_label,
               m.energy, energy_rhs, "<=")

    for ent_id, fitres in rate_fits.items():
        if ent_id == "__ut__":
            continue
        _check(rows, "h1_decay", f"{ent_id} slope", "all",
               fitres.rate, H1_SLOPE_MIN, ">=")
        _check(rows, "h1_decay", f"{ent_id} residual", "all",
               fitres.residual, H1_RESID_MAX, "<=")

    for m in members:
        for ent_id, (_h1, mnorm) in m.entropy.items():
            rhs = ENERGY_SLACK * b_sup * etapp_sup[ent_id] * sup0 * sup0 \
                * volume / (2.0 * r_floor)
            _check(rows, "measure_bound", ent_id, m.eps_label, mnorm, rhs, "<=")

    ut_fit = rate_fits.get("__ut__")
    if ut_fit is not None:
        _check(rows, "ut_l1", "slope", "all", ut_fit.rate, UT_SLOPE_MIN, ">=")

    if len(members) >= 2:
        _check(rows, "dirac", "finest vs coarsest", members[-1].eps_label,
               members[-1].dirac, DIRAC_FACTOR * members[0].dirac, "<=")

    _check(rows, "divcurl", "compact synthetic", "-", divcurl_compact,
           DIVCURL_COMPACT_MAX, "<=")
    _check(rows, "divcurl", "violation synthetic", "-", divcurl_violation,
           DIVCURL_VIOLATION_MIN, ">=")

    if dim == 2:
        for a, b in zip(members, members[1:]):
            _check(rows, "d2_quad", f"mean D decrease {a.eps_label}->{b.eps_label}",
                   b.eps_label, b.d_mean, a.d_mean, "<")
        dmin = min(m.d_min for m in members)
        _check(rows, "d2_quad", "pointwise floor", "all", -dmin,
               -D2_POINTWISE_FLOOR, "<=")
    else:
        rows.append(EstimateRow("d2_quad", "not applicable (d=1)", "-",
                                0.0, 0.0, "<=", True))

    if conv is not None:
        for (ea, eb), (err_a, err_b) in zip(
                zip(conv.epsilons, conv.epsilons[1:]),
                zip(conv.errors_vs_reference, conv.errors_vs_reference[1:])):
            ok = err_b < err_a or (err_a == 0.0 and err_b == 0.0)
            rows.append(EstimateRow("convergence",
                                    f"error decrease {ea:g}->{eb:g}",
                                    f"{eb:g}", err_b, err_a, "<", ok))
        if conv.cauchy_fit is not None:
            _check(rows, "convergence", "cauchy rate", "all",
                   conv.cauchy_fit.rate, CAUCHY_RATE_MIN, ">=")
        else:
            rows.append(EstimateRow("convergence", "cauchy rate (ladder too "
                                    "short for a fit)", "-", 0.0, 0.0, "<=", True))

    present = {r.estimate for r in rows}
    for eid in ESTIMATE_IDS:
        if eid not in present:
            rows.append(EstimateRow(eid, "not evaluated (ladder too short)",
                                    "-", 0.0, 0.0, "<=", True))
    rows.sort(key=lambda r: ESTIMATE_IDS.index(r.estimate))
    return rows


def overall_verdicts(rows: list[EstimateRow]) -> dict:
    out = {}
    for row in rows:
        out.setdefault(row.estimate, True)
        out[row.estimate] = out[row.estimate] and row.passed
    return out


def format_table(rows: list[EstimateRow]) -> str:
    verdicts = overall_verdicts(rows)
    lines = []
    width = max(len(r.estimate) for r in rows) + 2
    for r in rows:
        lines.append(f"{r.estimate:<{width}} {r.detail:<38} eps={r.epsilon:<10} "
                     f"lhs={r.lhs:.6g} {r.op} rhs={r.rhs:.6g}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    lines.append("-" * 60)
    for est, ok in verdicts.items():
        lines.append(f"{est:<{width}} overall: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines)
