#!/usr/bin/env python3
"""Benchmark the convolution cores: numba backend vs pure-numpy fallback.

Both implementations live in fpl._fast (the package picks one at import
time from FPL_DISABLE_NUMBA); here they are timed side by side on the
workload that dominates the convergence experiments - the polar-coordinate
convolution of a radial datum against a tabulated kernel - and checked
against each other.

Usage:
    python3 benchmarks/bench_fast.py [--radii 400] [--repeat 3]
"""

import argparse
import time

import numpy as np

from fpl import _fast
from fpl import convergence as cv
from fpl import space as sp
from fpl import spectral as spec


def best_of(repeat, fn, *args):
    out = None
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", type=int, default=400,
                    help="output grid size (default 400)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="best-of repetitions (default 3)")
    args = ap.parse_args()

    desc = spec.calibrate(sp.preset("H3"))
    t, sigma = 4.0, 0.5
    datum = cv.Datum("radial_gaussian", {"width": 1.0})
    rs = np.linspace(0.0, 60.0, args.radii)
    table = cv.build_kernel_table(desc, t, sigma, 0,
                                  float(rs[-1]) + datum.r_support + 5.0)
    s_vals, log_pref = cv._datum_s_quadrature(desc, datum)
    cos_th, log_w = cv.theta_rule(desc, 128)
    targs = (table.x0, table.dx_inv, table.reduced,
             table.rho, table.ce, table.t2, table.mode)
    n_ops = args.radii * s_vals.size * cos_th.size

    print(f"active backend: {_fast.backend_name()}")
    if _fast.HAS_NUMBA:
        import numba
        print(f"numba threads: {numba.get_num_threads()} "
              "(the parallel gain scales with cores)")
    print(f"conv workload: {args.radii} radii x {s_vals.size} shells x "
          f"{cos_th.size} angles = {n_ops / 1e6:.1f}M kernel evals")

    rows = []
    if _fast.HAS_NUMBA:
        _fast._conv_core_nb(rs[:4], s_vals, log_pref, cos_th, log_w, *targs)
        tb, out_nb = best_of(args.repeat, _fast._conv_core_nb, rs, s_vals,
                             log_pref, cos_th, log_w, *targs)
        rows.append(("conv_core", "numba", tb, n_ops))
    tp, out_py = best_of(args.repeat, _fast._conv_core_py, rs, s_vals,
                         log_pref, cos_th, log_w, *targs)
    rows.append(("conv_core", "numpy", tp, n_ops))
    if _fast.HAS_NUMBA:
        delta = float(np.max(np.abs(out_nb - out_py)))
        print(f"backend agreement (log values): max |delta| = {delta:.2e}")

    rd = np.linspace(0.1, 60.0, 4 * args.radii)
    nd_ops = rd.size * cos_th.size
    if _fast.HAS_NUMBA:
        _fast._dirac_diff_core_nb(rd[:4], 1.0, cos_th, log_w, *targs)
        tb, dnb = best_of(args.repeat, _fast._dirac_diff_core_nb, rd, 1.0,
                          cos_th, log_w, *targs)
        rows.append(("dirac_diff_core", "numba", tb, nd_ops))
    tp, dpy = best_of(args.repeat, _fast._dirac_diff_core_py, rd, 1.0,
                      cos_th, log_w, *targs)
    rows.append(("dirac_diff_core", "numpy", tp, nd_ops))
    if _fast.HAS_NUMBA:
        delta = float(np.max(np.abs(dnb - dpy)))
        print(f"backend agreement (dirac diff):  max |delta| = {delta:.2e}")

    print(f"\n{'core':<18}{'backend':<9}{'best s':>9}{'Mevals/s':>11}")
    base = {}
    for name, backend, secs, ops in rows:
        print(f"{name:<18}{backend:<9}{secs:>9.3f}{ops / secs / 1e6:>11.1f}")
        base.setdefault(name, {})[backend] = secs
    for name, d in base.items():
        if "numba" in d and "numpy" in d:
            print(f"{name}: numba is x{d['numpy'] / d['numba']:.1f} faster")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
