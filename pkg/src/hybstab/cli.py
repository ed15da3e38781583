"""Command-line front end for simulation, figures, and certification.

Subcommands:
  simulate    integrate one hybrid run and write the trace CSV
  figures     write the standard figure datasets (CSV + PNG)
  verify      evaluate the three sampled hypotheses, emit a JSON report
  sweep       tabulate the inclusion check over a theta grid
  theta-star  bisect for the inclusion threshold inside a bracket

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .controllers import example_hybrid_controller
from .errors import DegenerateRegion, NoBracket, ThetaOutOfRange
from .lyapunov import c_local, max_v_on_A, theta1
from .plant import ExampleSystem
from .sim import SimOptions, Termination, simulate, trace_to_csv
from .verify import find_theta_star, hypothesis_report


def _positive_theta(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid theta {text!r}") from exc
    if not value > 0.0:
        raise argparse.ArgumentTypeError("theta must be positive")
    return value


def _state_pair(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected x0 as 'x1,x2'")
    try:
        return np.array([float(p) for p in parts], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid x0 {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybstab",
        description="Hybrid hysteresis-switched stabilization toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim_p = sub.add_parser("simulate", help="integrate one hybrid run")
    sim_p.add_argument("--theta", type=_positive_theta, default=0.06)
    sim_p.add_argument("--x0", type=_state_pair, default="2,0",
                       help="initial state as 'x1,x2'")
    sim_p.add_argument("--q0", type=int, default=1, choices=(1, 2))
    sim_p.add_argument("--t-max", type=float, default=50.0)
    sim_p.add_argument("--j-max", type=int, default=20)
    sim_p.add_argument("--c-tilde-factor", type=float, default=0.5)
    sim_p.add_argument("--out", type=Path, default=None,
                       help="trace CSV path")
    sim_p.set_defaults(func=_cmd_simulate)

    fig_p = sub.add_parser("figures", help="write figure datasets")
    fig_p.add_argument("--theta", type=_positive_theta, default=0.06)
    fig_p.add_argument("--radius", type=float, default=2.0)
    fig_p.add_argument("--count", type=int, default=5)
    fig_p.add_argument("--c-tilde-factor", type=float, default=0.5)
    fig_p.add_argument("--out-dir", type=Path, default=Path("figures"))
    fig_p.add_argument("--no-plots", action="store_true",
                       help="write only the CSV datasets")
    fig_p.set_defaults(func=_cmd_figures)

    ver_p = sub.add_parser("verify", help="sampled hypothesis report")
    ver_p.add_argument("--theta", type=_positive_theta, default=0.06)
    ver_p.add_argument("--samples", type=int, default=100000)
    ver_p.add_argument("--seed", type=int, default=0)
    ver_p.add_argument("--out", type=Path, default=None,
                       help="JSON path (stdout when omitted)")
    ver_p.set_defaults(func=_cmd_verify)

    swp_p = sub.add_parser("sweep", help="inclusion check over a theta grid")
    swp_p.add_argument("--min", dest="theta_min", type=float, default=0.001)
    swp_p.add_argument("--max", dest="theta_max", type=float, default=0.12)
    swp_p.add_argument("--step", type=float, default=0.001)
    swp_p.add_argument("--out", type=Path, default=None,
                       help="CSV path (stdout when omitted)")
    swp_p.set_defaults(func=_cmd_sweep)

    ts_p = sub.add_parser("theta-star", help="bisect inclusion threshold")
    ts_p.add_argument("--lo", type=float, default=0.05)
    ts_p.add_argument("--hi", type=float, default=0.08)
    ts_p.add_argument("--tol", type=float, default=1e-5)
    ts_p.set_defaults(func=_cmd_theta_star)
    return parser


def _cmd_simulate(args) -> int:
    x0 = args.x0 if isinstance(args.x0, np.ndarray) else _state_pair(args.x0)
    plant = ExampleSystem(args.theta).plant()
    K = example_hybrid_controller(args.theta, args.c_tilde_factor)
    opts = dataclasses.replace(SimOptions(), t_max=args.t_max,
                               j_max=args.j_max)
    trace = simulate(plant, K, x0, args.q0, opts)
    if args.out is not None:
        trace_to_csv(trace, args.out)
    final = trace.points[-1]
    print(f"termination: {trace.termination.value}")
    print(f"jumps: {trace.jump_count}")
    print(f"final_norm: {float(np.linalg.norm(final.x)):.6e}")
    print(f"final_time: {final.t:.6f}")
    return 1 if trace.termination is Termination.INTEGRATOR_FAILURE else 0


def _cmd_figures(args) -> int:
    from .plots import write_figure_outputs

    paths, traces = write_figure_outputs(
        args.out_dir, theta=args.theta, radius=args.radius, count=args.count,
        c_tilde_factor=args.c_tilde_factor, render=not args.no_plots)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    failed = [tr.termination.value for tr in traces
              if tr.termination is Termination.INTEGRATOR_FAILURE]
    return 1 if failed else 0


def _cmd_verify(args) -> int:
    report = hypothesis_report(args.theta, samples=args.samples,
                               seed=args.seed)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out is not None:
        args.out.write_text(text + "\n", encoding="ascii")
    else:
        print(text)
    return 0


def _cmd_sweep(args) -> int:
    if args.step <= 0 or args.theta_max < args.theta_min:
        print("error: sweep grid must have positive step and max >= min",
              file=sys.stderr)
        return 2
    limit = theta1()
    count = int(round((args.theta_max - args.theta_min) / args.step)) + 1
    lines = ["theta,h3_pass,max_A,c_ell"]
    last_pass = None
    bracket = None
    for k in range(count):
        theta = args.theta_min + k * args.step
        if theta <= 0.0 or theta >= limit:
            lines.append(f"{theta:.17g},invalid,,")
            continue
        max_a, _ = max_v_on_A(theta)
        c = c_local(theta)
        ok = max_a < c
        lines.append(f"{theta:.17g},{'true' if ok else 'false'},"
                     f"{max_a:.17g},{c:.17g}")
        if last_pass is not None and last_pass[1] and not ok:
            bracket = (last_pass[0], theta)
        last_pass = (theta, ok)
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    if bracket is not None:
        star = find_theta_star(bracket[0], bracket[1], 1e-6)
        print(f"theta_star: {star:.17g}")
    else:
        print("theta_star: no pass-to-fail transition on the grid",
              file=sys.stderr)
        return 1
    return 0


def _cmd_theta_star(args) -> int:
    star = find_theta_star(args.lo, args.hi, args.tol)
    print(f"theta_star: {star:.17g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ThetaOutOfRange, DegenerateRegion, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoBracket as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
