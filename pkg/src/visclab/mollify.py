"""Regularization of compactly supported initial data by mollification.

The kernel is the standard bump exp(-1/(1-|z|^2)) scaled to a given width and
normalized so its discrete integral is exactly one.  Because the kernel is
required to be narrower than the distance from the data support to the
boundary, the convolution never needs a boundary extension rule and the sup
and total-variation bounds hold without correction terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .domain import Field, Grid


@dataclass(frozen=True)
class MollifierKernel:
    width: float
    spacing: tuple[float, ...]
    weights: np.ndarray  # dimensionless, sums to 1

    @property
    def density(self) -> np.ndarray:
        """Kernel as a density: weights / cell volume."""
        vol = float(np.prod(self.spacing))
        return self.weights / vol


def _bump_profile(z2: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z2)
    inside = z2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z2[inside]))
    return out


def make_kernel(width: float, spacing: tuple[float, ...]) -> MollifierKernel:
    if width <= 0:
        raise ValueError("mollifier width must be positive")
    if len(spacing) == 1:
        h = spacing[0]
        k = max(int(np.ceil(width / h)) - 1, 0)
        offs = np.arange(-k, k + 1) * h
        z2 = (offs / width) ** 2
        prof = _bump_profile(z2)
    else:
        hx, hy = spacing
        kx = max(int(np.ceil(width / hx)) - 1, 0)
        ky = max(int(np.ceil(width / hy)) - 1, 0)
        ox = np.arange(-kx, kx + 1) * hx
        oy = np.arange(-ky, ky + 1) * hy
        z2 = (ox[:, None] / width) ** 2 + (oy[None, :] / width) ** 2
        prof = _bump_profile(z2)
    total = prof.sum()
    if total <= 0:
        raise ValueError("mollifier width is below one cell; kernel has no mass")
    return MollifierKernel(width, tuple(spacing), prof / total)


def kernel_mass(kernel: MollifierKernel) -> float:
    """Discrete integral of the kernel density; 1 by construction."""
    vol = float(np.prod(kernel.spacing))
    return float(np.sum(kernel.density) * vol)


@dataclass(frozen=True)
class InitialData:
    field: Field
    support_margin: float
    sup_norm: float
    tv: float


def make_initial_data(grid: Grid, name: str, center: tuple[float, ...],
                      width: float, amplitude: float,
                      amplitude2: float = 0.0,
                      separation: float = 0.0) -> InitialData:
    """Initial-data presets: C2 'bump', indicator 'box', and 'twobump'."""
    mesh = grid.meshgrid()

    def radial(c):
        r2 = sum(((x - cj) / width) ** 2 for x, cj in zip(mesh, c))
        return np.sqrt(r2)

    if name == "bump":
        rho = radial(center)
        vals = np.where(rho < 1.0, amplitude * (1.0 - np.minimum(rho, 1.0) ** 2) ** 3, 0.0)
        lo_edge = [c - width for c in center]
        hi_edge = [c + width for c in center]
    elif name == "box":
        inside = np.ones_like(mesh[0], dtype=bool)
        for x, cj in zip(mesh, center):
            inside &= np.abs(x - cj) <= width
        vals = np.where(inside, amplitude, 0.0)
        lo_edge = [c - width for c in center]
        hi_edge = [c + width for c in center]
    elif name == "twobump":
        c1 = (center[0] - separation,) + tuple(center[1:])
        c2 = (center[0] + separation,) + tuple(center[1:])
        r1 = radial(c1)
        r2 = radial(c2)
        vals = (np.where(r1 < 1.0, amplitude * (1.0 - np.minimum(r1, 1.0) ** 2) ** 3, 0.0)
                + np.where(r2 < 1.0, amplitude2 * (1.0 - np.minimum(r2, 1.0) ** 2) ** 3, 0.0))
        lo_edge = [center[0] - separation - width] + [c - width for c in center[1:]]
        hi_edge = [center[0] + separation + width] + [c + width for c in center[1:]]
    else:
        raise ValueError(f"unknown initial-data preset {name!r}")

    margin = min(min(le - lo for le, lo in zip(lo_edge, grid.lo)),
                 min(hi - he for he, hi in zip(hi_edge, grid.hi)))
    fld = Field(grid, vals)
    from .norms import total_variation
    return InitialData(fld, float(margin), fld.sup, total_variation(fld))


def mollify(data: InitialData, kernel: MollifierKernel) -> Field:
    """Discrete convolution of the data with the kernel.

    Rejected when the kernel is at least as wide as the support margin, since
    that would smear mass onto the boundary and break compatibility with the
    homogeneous Dirichlet condition.
    """
    if kernel.width >= data.support_margin:
        raise ValueError(
            f"mollifier width {kernel.width:g} must be smaller than the "
            f"data support margin {data.support_margin:g}")
    grid = data.field.grid
    if tuple(kernel.spacing) != grid.spacing:
        raise ValueError("kernel was built for a different grid spacing")
    u = data.field.values
    if grid.dim == 1:
        out = np.convolve(u, kernel.weights, mode="same")
    else:
        out = convolve2d(u, kernel.weights, mode="same", boundary="fill")
    return Field(grid, out)
