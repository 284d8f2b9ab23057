"""Scenario configuration: parse, validate, render, hash.

One INI-style text file describes a full experiment.  ``build_scenario`` turns
the text into a validated ``ScenarioConfig`` with defaults filled in;
``render_config`` writes the canonical resolved text back out, and
``build_scenario(render_config(cfg))`` reproduces an identical config.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field

__all__ = ["ScenarioConfig", "ConfigError", "build_scenario", "render_config",
           "config_hash", "DEFAULT_CFL", "DEFAULT_TOL"]

DEFAULT_CFL = 0.4
DEFAULT_TOL = 1e-8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    dim: int
    cells: tuple[int, ...]
    extent_lo: tuple[float, ...]
    extent_hi: tuple[float, ...]
    time_horizon: float
    flux_names: tuple[str, ...]
    flux_a: float
    visc_name: str
    visc_b: float
    visc_r: float
    init_name: str
    init_center: tuple[float, ...]
    init_width: float
    init_amplitude: float
    init_amplitude2: float
    init_separation: float
    ladder: tuple[float, ...]
    mollifier_widths: tuple[float, ...]
    cfl: float
    quadrature_tol: float
    integrator: str
    snapshots: int
    kruzkov_count: int
    kruzkov_delta: float
    young_window_cells: int
    young_window_snaps: int
    young_bins: int
    weak_window_cells: int
    weak_window_snaps: int
    outdir: str
    raw_text: str = field(default="", compare=False, repr=False)

    @property
    def sup_u0(self) -> float:
        if self.init_name == "twobump":
            return max(abs(self.init_amplitude), abs(self.init_amplitude2))
        return abs(self.init_amplitude)

    @property
    def support_margin(self) -> float:
        """Distance from the initial-data support to the domain boundary."""
        r = self.init_width
        margins = []
        for j in range(self.dim):
            c = self.init_center[j]
            lo_edge = c - r
            hi_edge = c + r
            if self.init_name == "twobump" and j == 0:
                lo_edge = c - self.init_separation - r
                hi_edge = c + self.init_separation + r
            margins.append(lo_edge - self.extent_lo[j])
            margins.append(self.extent_hi[j] - hi_edge)
        return min(margins)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")


def _require(parser, section, key):
    if not parser.has_option(section, key):
        raise ConfigError(f"missing required key [{section}] {key}")
    return parser.get(section, key)


def build_scenario(config_text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc

    dim = parser.getint("grid", "dimension", fallback=1)
    if dim not in (1, 2):
        raise ConfigError("grid.dimension must be 1 or 2")
    cells = tuple(int(v) for v in _floats(_require(parser, "grid", "cells")))
    if len(cells) == 1 and dim == 2:
        cells = cells * 2
    if len(cells) != dim or any(c <= 0 for c in cells):
        raise ConfigError("grid.cells must list one positive count per axis")
    extent_txt = parser.get("grid", "extent", fallback=";".join(["0,1"] * dim))
    pieces = [p for p in extent_txt.split(";") if p.strip() != ""]
    if len(pieces) == 1 and dim == 2:
        pieces = pieces * 2
    if len(pieces) != dim:
        raise ConfigError("grid.extent must give one lo,hi pair per axis")
    lo, hi = [], []
    for p in pieces:
        vals = _floats(p)
        if len(vals) != 2 or vals[1] <= vals[0]:
            raise ConfigError("grid.extent pairs must be lo,hi with lo < hi")
        lo.append(vals[0])
        hi.append(vals[1])
    time_horizon = float(_require(parser, "grid", "time_horizon"))
    if time_horizon <= 0:
        raise ConfigError("grid.time_horizon must be positive")

    flux_names = tuple(t.strip() for t in _require(parser, "flux", "preset").split(","))
    if len(flux_names) == 1 and dim == 2:
        flux_names = flux_names * 2
    if len(flux_names) != dim:
        raise ConfigError("flux.preset needs one preset per axis")
    flux_a = parser.getfloat("flux", "a", fallback=1.0)

    visc_name = parser.get("viscosity", "preset", fallback="constant")
    visc_b = parser.getfloat("viscosity", "b", fallback=1.0)
    visc_r = parser.getfloat("viscosity", "r", fallback=1.0)

    init_name = _require(parser, "initial", "preset")
    center = _floats(parser.get("initial", "center", fallback="0.5"))
    if len(center) == 1 and dim == 2:
        center = center * 2
    if len(center) != dim:
        raise ConfigError("initial.center needs one value per axis")
    init_width = parser.getfloat("initial", "width", fallback=0.25)
    init_amp = parser.getfloat("initial", "amplitude", fallback=1.0)
    init_amp2 = parser.getfloat("initial", "amplitude2", fallback=-init_amp)
    init_sep = parser.getfloat("initial", "separation", fallback=2.0 * init_width)
    if init_width <= 0:
        raise ConfigError("initial.width must be positive")

    ladder = _floats(_require(parser, "ladder", "epsilons"))
    if len(ladder) == 0 or any(e <= 0 for e in ladder):
        raise ConfigError("ladder.epsilons must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("epsilon ladder must be strictly decreasing")
    width_txt = parser.get("ladder", "mollifier_width", fallback="match")
    if width_txt.strip() == "match":
        widths = ladder
    else:
        widths = _floats(width_txt)
        if len(widths) == 1:
            widths = widths * len(ladder)
        if len(widths) != len(ladder) or any(w <= 0 for w in widths):
            raise ConfigError("ladder.mollifier_width must be 'match', one "
                              "positive value, or one per epsilon")

    cfl = parser.getfloat("scheme", "cfl", fallback=DEFAULT_CFL)
    if not 0.0 < cfl < 1.0:
        raise ConfigError("scheme.cfl must lie in (0, 1)")
    tol = parser.getfloat("scheme", "quadrature_tol", fallback=DEFAULT_TOL)
    if tol <= 0:
        raise ConfigError("scheme.quadrature_tol must be positive")
    integrator = parser.get("scheme", "integrator", fallback="euler")
    if integrator not in ("euler", "heun"):
        raise ConfigError("scheme.integrator must be euler or heun")
    snapshots = parser.getint("scheme", "snapshots", fallback=64)
    if snapshots < 2:
        raise ConfigError("scheme.snapshots must be at least 2")
    kr_count = parser.getint("scheme", "kruzkov_count", fallback=5)
    kr_delta = parser.getfloat("scheme", "kruzkov_delta", fallback=1e-3)
    yw_cells = parser.getint("scheme", "young_window_cells", fallback=8)
    yw_snaps = parser.getint("scheme", "young_window_snaps", fallback=13)
    y_bins = parser.getint("scheme", "young_bins", fallback=64)
    ww_cells = parser.getint("scheme", "weak_window_cells", fallback=8)
    ww_snaps = parser.getint("scheme", "weak_window_snaps", fallback=8)

    outdir = _require(parser, "output", "directory")

    cfg = ScenarioConfig(
        dim=dim, cells=cells, extent_lo=tuple(lo), extent_hi=tuple(hi),
        time_horizon=time_horizon, flux_names=flux_names, flux_a=flux_a,
        visc_name=visc_name, visc_b=visc_b, visc_r=visc_r,
        init_name=init_name, init_center=tuple(center), init_width=init_width,
        init_amplitude=init_amp, init_amplitude2=init_amp2,
        init_separation=init_sep, ladder=tuple(ladder),
        mollifier_widths=tuple(widths), cfl=cfl, quadrature_tol=tol,
        integrator=integrator, snapshots=snapshots, kruzkov_count=kr_count,
        kruzkov_delta=kr_delta, young_window_cells=yw_cells,
        young_window_snaps=yw_snaps, young_bins=y_bins,
        weak_window_cells=ww_cells, weak_window_snaps=ww_snaps,
        outdir=outdir, raw_text=config_text)

    margin = cfg.support_margin
    if margin <= 0:
        raise ConfigError("initial data support reaches the boundary "
                          "(keys: initial.center, initial.width)")
    wmax = max(cfg.mollifier_widths)
    if margin <= wmax:
        raise ConfigError(
            f"initial-data support margin {margin:g} (from initial.center/"
            f"initial.width) must exceed the largest mollifier width {wmax:g} "
            f"(key: ladder.mollifier_width)")
    if cfg.init_name not in ("bump", "box", "twobump"):
        raise ConfigError(f"unknown initial.preset {cfg.init_name!r}")
    return cfg


def render_config(cfg: ScenarioConfig) -> str:
    """Canonical resolved text; parsing it back reproduces the config."""
    parser = configparser.ConfigParser()
    parser["grid"] = {
        "dimension": str(cfg.dim),
        "cells": ",".join(str(c) for c in cfg.cells),
        "extent": ";".join(f"{a!r},{b!r}" for a, b in zip(cfg.extent_lo, cfg.extent_hi)),
        "time_horizon": repr(cfg.time_horizon),
    }
    parser["flux"] = {"preset": ",".join(cfg.flux_names), "a": repr(cfg.flux_a)}
    parser["viscosity"] = {"preset": cfg.visc_name, "b": repr(cfg.visc_b),
                           "r": repr(cfg.visc_r)}
    parser["initial"] = {
        "preset": cfg.init_name,
        "center": ",".join(repr(c) for c in cfg.init_center),
        "width": repr(cfg.init_width),
        "amplitude": repr(cfg.init_amplitude),
        "amplitude2": repr(cfg.init_amplitude2),
        "separation": repr(cfg.init_separation),
    }
    parser["ladder"] = {
        "epsilons": ",".join(repr(e) for e in cfg.ladder),
        "mollifier_width": ",".join(repr(w) for w in cfg.mollifier_widths),
    }
    parser["scheme"] = {
        "cfl": repr(cfg.cfl),
        "quadrature_tol": repr(cfg.quadrature_tol),
        "integrator": cfg.integrator,
        "snapshots": str(cfg.snapshots),
        "kruzkov_count": str(cfg.kruzkov_count),
        "kruzkov_delta": repr(cfg.kruzkov_delta),
        "young_window_cells": str(cfg.young_window_cells),
        "young_window_snaps": str(cfg.young_window_snaps),
        "young_bins": str(cfg.young_bins),
        "weak_window_cells": str(cfg.weak_window_cells),
        "weak_window_snaps": str(cfg.weak_window_snaps),
    }
    parser["output"] = {"directory": cfg.outdir}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
