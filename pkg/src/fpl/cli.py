"""Command line interface.

Subcommands
    kernel          point values of the fractional Poisson kernels
    asympt          sharp-asymptotic ratios (should sit near 1)
    mass            total and critical-annulus masses
    converge        long-time convergence experiments from a config file
    counterexample  scaled sup norms and the delayed-difference floor
    accept          the acceptance suite (fast or full)

Exit codes: 0 success; 2 invalid request (domain, resolution or argument
errors); 3 numerical failure (quadrature or cancellation floors).

With --out the data is written to the given path and a sibling
"<out>.manifest" records the run: the manifest is byte-identical across
reruns except for its wall_time_s line.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time

from . import __version__
from . import convergence as conv
from . import distinguished as dist
from . import kernels as ker
from . import space as sp
from . import spectral as spec
from .numerics import DomainError, QuadratureError, ResolutionError

__all__ = ["main", "build_parser"]


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad numeric list {text!r}") from exc


def _descriptor(space: str, need_calibration: bool) -> sp.SpaceDescriptor:
    desc = sp.preset(space)
    if need_calibration:
        desc = spec.calibrate(desc)
    return desc


def _resolve_route(space: str, side: str, route: str) -> str:
    if route != "auto":
        return route
    if space.upper() == "H3":
        return "closed"
    # generic x-side auto is dispatched per radius (spectral first,
    # subordination fallback), so the label stays "auto"
    return "subordination" if side == "s" else "auto"


def _emit(args, text: str, meta: dict) -> int:
    """Write data (stdout or --out) plus the run manifest beside --out."""
    if not getattr(args, "out", None):
        sys.stdout.write(text)
        return 0
    with open(args.out, "w") as fh:
        fh.write(text)
    lines = [f"command = {meta.pop('command')}",
             f"version = {__version__}"]
    for key in sorted(meta):
        lines.append(f"{key} = {meta[key]}")
    digest = hashlib.sha256(text.encode()).hexdigest()
    lines.append(f"output = {args.out}")
    lines.append(f"output_sha256 = {digest}")
    lines.append(f"output_rows = {max(text.count(chr(10)) - 1, 0)}")
    lines.append(f"wall_time_s = {time.time() - args._t0:.3f}")
    with open(args.out + ".manifest", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def _cmd_kernel(args) -> int:
    route = args.route
    need_c0 = (route == "spectral"
               or (args.space.upper() != "H3" and route != "closed"))
    desc = _descriptor(args.space, need_c0)
    rows = ["t,sigma,r,log_value,route"]
    resolved = _resolve_route(args.space, args.side, route)
    for r in _floats(args.r):
        if route == "spectral":
            fn = ker.q_spectral if args.side == "x" else dist.q0_spectral
            val = fn(desc, args.t, args.sigma, r, rel_floor=args.rel_tol)
        elif args.side == "x":
            val = ker.q_kernel(desc, args.t, args.sigma, r, route)
        else:
            val = dist.q0_kernel(desc, args.t, args.sigma, r, route)
        rows.append(f"{args.t:.17g},{args.sigma:.17g},{r:.17g},"
                    f"{val.log_mag:.17g},{resolved}")
    return _emit(args, "\n".join(rows) + "\n",
                 {"command": "kernel", "space": args.space,
                  "side": args.side, "route": resolved,
                  "t": f"{args.t:g}", "sigma": f"{args.sigma:g}"})


def _cmd_asympt(args) -> int:
    desc = _descriptor(args.space, True)
    rows = ["t,sigma,r,ratio,side"]
    for r in _floats(args.r):
        if args.side == "x":
            ratio = ker.q_asymptotic_ratio(desc, args.t, args.sigma, r,
                                           args.route)
        else:
            ratio = dist.q0_asymptotic_ratio(desc, args.t, args.sigma, r,
                                             args.route)
        rows.append(f"{args.t:.17g},{args.sigma:.17g},{r:.17g},"
                    f"{ratio:.17g},{args.side}")
    return _emit(args, "\n".join(rows) + "\n",
                 {"command": "asympt", "space": args.space,
                  "side": args.side, "t": f"{args.t:g}",
                  "sigma": f"{args.sigma:g}"})


def _cmd_mass(args) -> int:
    desc = _descriptor(args.space, False)
    rows = ["quantity,value"]
    if args.side == "x":
        mass, tail = ker.q_mass(desc, args.t, args.sigma)
        rows.append(f"mass,{mass:.17g}")
        rows.append(f"tail_bound,{tail:.17g}")
        if args.eps is not None:
            split = ker.critical_region_mass(desc, args.t, args.sigma,
                                             args.eps)
            for key in ("inside", "below", "above", "outside"):
                rows.append(f"{key},{split[key]:.17g}")
    else:
        split = dist.qtilde_critical_mass(
            desc, args.t, args.sigma,
            args.eps if args.eps is not None else 0.5)
        rows.append("mass,1")            # exact Beta split, total mass 1
        rows.append("tail_bound,0")
        for key in ("inside", "below", "above", "outside"):
            rows.append(f"{key},{split[key]:.17g}")
    return _emit(args, "\n".join(rows) + "\n",
                 {"command": "mass", "space": args.space, "side": args.side,
                  "t": f"{args.t:g}", "sigma": f"{args.sigma:g}",
                  "eps": "none" if args.eps is None else f"{args.eps:g}"})


def _cmd_converge(args) -> int:
    with open(args.config) as fh:
        espec = conv.parse_config(fh.read())
    if args.out:
        espec.out = args.out
    elif espec.out:
        args.out = espec.out
    desc = _descriptor(espec.space, False)
    rows = conv.run_experiment(desc, espec)
    text = conv.experiment_rows_to_csv(rows)
    return _emit(args, text,
                 {"command": "converge", "space": espec.space,
                  "side": espec.side, "sigma": f"{espec.sigma:g}",
                  "datum": espec.datum.to_string(),
                  "norms": ",".join(espec.norms),
                  "t_grid": ",".join(f"{t:g}" for t in espec.t_grid)})


def _cmd_counterexample(args) -> int:
    desc = _descriptor(args.space, False)
    t_grid = _floats(args.t_grid)
    sups = conv.scaled_sup_series(desc, args.sigma, t_grid)
    diffs = conv.delayed_diff_series(desc, t_grid, sigma=args.sigma,
                                     delay=args.delay)
    # the delayed difference keeps the sup-norm scale: it can drop below
    # the scaled sup envelope [c, C] only to c/2 (half the lower constant)
    c_lo = min(row["scaled_sup"] for row in sups)
    floor = 0.5 * c_lo
    rows = ["t,scaled_sup,scaled_diff,floor"]
    for su, di in zip(sups, diffs):
        rows.append(f"{su['t']:.17g},{su['scaled_sup']:.17g},"
                    f"{di['scaled_diff']:.17g},{floor:.17g}")
    return _emit(args, "\n".join(rows) + "\n",
                 {"command": "counterexample", "space": args.space,
                  "sigma": f"{args.sigma:g}", "delay": f"{args.delay:g}",
                  "t_grid": ",".join(f"{t:g}" for t in t_grid)})


def _cmd_accept(args) -> int:
    from . import accept
    results = accept.run_acceptance(suite=args.suite)
    text = accept.format_report(results)
    status = 0 if all(r.passed for r in results) else 1
    _emit(args, text, {"command": "accept", "suite": args.suite})
    if getattr(args, "out", None):
        sys.stdout.write(text)
    return status


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpl",
        description="Fractional Poisson kernels on rank-one hyperbolic "
                    "spaces: kernels, asymptotics, masses, convergence.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="cmd", required=True)

    def common(p, t_default=None):
        p.add_argument("--space", default="H3",
                       help="preset name (H2, H3, H4, H5)")
        p.add_argument("--sigma", type=float, default=0.5,
                       help="fractional order in (0, 1)")
        p.add_argument("--t", type=float, default=t_default, required=t_default is None,
                       help="time parameter")
        p.add_argument("--side", choices=("x", "s"), default="x",
                       help="x: ambient kernel, s: distinguished variant")
        p.add_argument("--out", help="write CSV here (plus .manifest)")

    p = subs.add_parser("kernel", help="kernel point values")
    common(p)
    p.add_argument("--r", required=True, help="comma list of radii")
    p.add_argument("--route", default="auto",
                   choices=("auto", "closed", "subordination", "spectral"))
    p.add_argument("--rel-tol", type=float, default=1e-7,
                   help="cancellation floor for the spectral route")
    p.set_defaults(func=_cmd_kernel)

    p = subs.add_parser("asympt", help="sharp-asymptotic ratios")
    common(p)
    p.add_argument("--r", required=True, help="comma list of radii")
    p.add_argument("--route", default="auto",
                   choices=("auto", "closed", "subordination", "spectral"))
    p.set_defaults(func=_cmd_asympt)

    p = subs.add_parser("mass", help="total and critical-annulus masses")
    common(p)
    p.add_argument("--eps", type=float, default=None,
                   help="annulus half-exponent for the critical split")
    p.set_defaults(func=_cmd_mass)

    p = subs.add_parser("converge", help="convergence experiments")
    p.add_argument("--config", required=True,
                   help="experiment file (key = value lines)")
    p.add_argument("--out", help="override the config's output path")
    p.set_defaults(func=_cmd_converge)

    p = subs.add_parser("counterexample",
                        help="sup-norm scaling and delayed-difference floor")
    p.add_argument("--space", default="H3")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--t-grid", default="10,20,40")
    p.add_argument("--delay", type=float, default=3.0)
    p.add_argument("--out", help="write CSV here (plus .manifest)")
    p.set_defaults(func=_cmd_counterexample)

    p = subs.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.add_argument("--out", help="write the report here (plus .manifest)")
    p.set_defaults(func=_cmd_accept)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._t0 = time.time()
    try:
        return args.func(args)
    except (DomainError, ResolutionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
