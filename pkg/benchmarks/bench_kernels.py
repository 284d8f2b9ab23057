#!/usr/bin/env python3
"""Time the hot update kernels: numba against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--cells N] [--steps K]
"""

import argparse
import time

import numpy as np

from visclab import kernels
from visclab.domain import make_flux, make_viscosity


def build_args(n, dim):
    flux = make_flux(("burgers",) * dim, (-1.0, 1.0), 1e-8)
    visc = make_viscosity("constant", (-1.0, 1.0), {"b": 1.0})
    lat = flux.lattice
    rng = np.random.default_rng(7)
    if dim == 1:
        u = 0.8 * np.sin(np.linspace(0, np.pi, n)) * rng.uniform(0.5, 1.0, n)
        h = 1.0 / n
        dt = 0.2 * h * h / 0.02
        visc_args = (u, dt, h, 0.01, lat.lo, lat.inv_spacing,
                     flux.tables[0].eo_plus, flux.tables[0].eo_minus,
                     visc.table, np.empty_like(u))
        god_args = (u, 0.2 * h, h, lat.lo, lat.inv_spacing, flux.tables[0].f,
                    flux.tables[0].crit_y, flux.tables[0].crit_f,
                    np.empty_like(u))
    else:
        m = int(np.sqrt(n))
        u = 0.8 * rng.uniform(-1, 1, (m, m))
        h = 1.0 / m
        dt = 0.1 * h * h / 0.04
        visc_args = (u, dt, h, h, 0.01, lat.lo, lat.inv_spacing,
                     flux.tables[0].eo_plus, flux.tables[0].eo_minus,
                     flux.tables[1].eo_plus, flux.tables[1].eo_minus,
                     visc.table, np.empty_like(u))
        god_args = (u, 0.2 * h, h, 0, lat.lo, lat.inv_spacing,
                    flux.tables[0].f, flux.tables[0].crit_y,
                    flux.tables[0].crit_f, np.empty_like(u))
    return visc_args, god_args


def bench(fn, args, steps):
    fn(*args)  # warm up (JIT compile / cache touch)
    t0 = time.perf_counter()
    for _ in range(steps):
        fn(*args)
    return (time.perf_counter() - t0) / steps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()

    backends = ["numpy"]
    if kernels.HAVE_NUMBA:
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy path only")

    rows = []
    for dim, kname in ((1, "visc_step_1d"), (2, "visc_step_2d"),
                       (1, "godunov_step_1d"), (2, "godunov_sweep_2d")):
        visc_args, god_args = build_args(args.cells, dim)
        call = visc_args if kname.startswith("visc") else god_args
        per = {}
        for b in backends:
            per[b] = bench(kernels.KERNELS[b][kname], call, args.steps)
        speedup = per["numpy"] / per.get("numba", per["numpy"])
        rows.append((kname, per["numpy"], per.get("numba"), speedup))

    print(f"{'kernel':<18} {'numpy (us)':>12} {'numba (us)':>12} {'speedup':>9}")
    for name, tnp, tnb, sp in rows:
        nb = f"{tnb * 1e6:12.1f}" if tnb is not None else " " * 12
        print(f"{name:<18} {tnp * 1e6:12.1f} {nb} {sp:9.2f}x")


if __name__ == "__main__":
    main()
