"""Command-line interface: synthesize, cop, sweep, probe, plot, validate."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .checks import run_validation
from .mdp import InvalidModelError
from .privacy import PrivacyParams, RngStream
from .robust import bounds_finite, bounds_infinite, cost_of_privacy
from .sweep import (
    EXAMPLE1,
    EXAMPLE2,
    SweepConfig,
    resolve_source,
    run_sweep,
    run_trial,
    runtime_probe,
    write_sweep_outputs,
)
from .synthesis import run_pipeline

DEFAULT_K_GRID = "5,20,80,320"
# The investment example has structurally impossible transitions (zero
# probability), so its sweep needs explicit interiority preprocessing.
EXAMPLE1_SMOOTH_FLOOR = 1e-6


def _k_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None
    if not values or any(k <= 0 for k in values):
        raise argparse.ArgumentTypeError("k values must be positive")
    return values


def _add_source_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--example", type=int, choices=(1, 2), help="built-in benchmark MDP")
    group.add_argument("--mdp", metavar="FILE", help="MDP model as JSON")
    parser.add_argument(
        "--smooth-floor",
        type=float,
        default=None,
        metavar="EPS",
        help="explicit interiority preprocessing (1-EPS)p + EPS*uniform applied to the "
        f"source kernel; defaults to {EXAMPLE1_SMOOTH_FLOOR:g} for --example 1 "
        "(its rows contain zeros) and 0 otherwise",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--tol", type=float, default=1e-6,
                        help="value-iteration accuracy for infinite horizons (default 1e-6)")


def _source_string(args) -> str:
    if args.mdp is not None:
        return args.mdp
    return EXAMPLE1 if args.example == 1 else EXAMPLE2


def _smooth_floor(args) -> float:
    if args.smooth_floor is not None:
        return args.smooth_floor
    return EXAMPLE1_SMOOTH_FLOOR if args.example == 1 else 0.0


def _config(args, k_grid, beta: float, trials: int = 1, out=None) -> SweepConfig:
    return SweepConfig(
        source=_source_string(args),
        k_grid=tuple(k_grid),
        beta=beta,
        trials=trials,
        seed=args.seed,
        tol=args.tol,
        smooth_floor=_smooth_floor(args),
        out=out,
    )


def _cmd_synthesize(args) -> int:
    cfg = _config(args, (args.k,), beta=0.05)
    label, m = resolve_source(cfg)
    mbar, synth = run_pipeline(m, args.k, RngStream(args.seed, (0,)), tol=args.tol)
    print(f"# {label}: privatized with k = {args.k:g}, seed {args.seed}")
    if synth.iterations is not None:
        print(f"# value iteration: {synth.iterations} iterations, residual {synth.residual:.3e}")
    print(f"{'state':<12}{'action':<14}{'value':>14}")
    for s, name in enumerate(m.states):
        row = synth.policy.row(0, s)
        action = m.actions[s][int(np.argmax(row))]
        value = synth.value.values[0, s] if m.horizon is not None else synth.value.values[s]
        print(f"{name:<12}{action:<14}{value:>14.6f}")
    return 0


def _cmd_cop(args) -> int:
    cfg = _config(args, (args.k,), beta=args.beta)
    label, m = resolve_source(cfg)
    report, _ = run_trial(m, args.k, args.beta, trial=0, seed=args.seed, tol=args.tol)
    print(f"# {label}: k = {args.k:g}, beta = {args.beta:g}, alpha = {report.alpha:.6f}")
    print(f"v_private      = {report.v_private:.6f}")
    print(f"v_nonprivate   = {report.v_nonprivate:.6f}")
    print(f"v_pessimistic  = {report.v_pessimistic:.6f}")
    print(f"v_optimistic   = {report.v_optimistic:.6f}")
    print(f"cop_bound      = {report.cop_bound:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args, args.k, beta=args.beta, trials=args.trials, out=args.out)
    rows = run_sweep(cfg)
    out = write_sweep_outputs(cfg, rows, args.out)
    print(f"wrote {len(rows)} rows to {out}")
    if not args.no_figures:
        from .figures import render_sweep_figures

        paths = render_sweep_figures([r.__dict__ for r in rows], out)
        for p in paths:
            print(f"wrote {p}")
    return 0


def _cmd_probe(args) -> int:
    cfg = SweepConfig(source=EXAMPLE2, k_grid=(args.k,), beta=args.beta, trials=1,
                      seed=args.seed)
    report = runtime_probe(cfg, n_states=args.states, n_actions=args.actions,
                           horizon=args.horizon)
    print(f"base ({args.states} states, {args.actions} actions, T={args.horizon}): "
          f"{report.base_seconds:.4f} s")
    print(f"double horizon: {report.double_horizon_seconds:.4f} s "
          f"(ratio {report.horizon_ratio:.2f})")
    print(f"double actions: {report.double_actions_seconds:.4f} s "
          f"(ratio {report.actions_ratio:.2f})")
    print(f"half states:    {report.half_states_seconds:.4f} s "
          f"(ratio {report.states_ratio:.2f})")
    return 0


def _cmd_plot(args) -> int:
    from .figures import render_from_csv

    for path in render_from_csv(args.csv, args.out_dir):
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    results = run_validation(quick=args.quick)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        suffix = f"  ({r.detail})" if r.detail else ""
        print(f"[{mark}] {r.name:<{width}}{suffix}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privmdp",
        description="Differentially private MDP policy synthesis and certified "
        "cost-of-privacy bounds.",
    )
    parser.add_argument("--version", action="version", version=f"privmdp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="privatize a model and synthesize its policy")
    _add_source_args(p)
    p.add_argument("--k", type=float, required=True, help="Dirichlet mechanism parameter")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("cop", help="one privatize/synthesize/bound run")
    _add_source_args(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.05, help="tail probability (default 0.05)")
    p.set_defaults(func=_cmd_cop)

    p = sub.add_parser("sweep", help="seeded trials over a k grid, written as CSV + figures")
    _add_source_args(p)
    p.add_argument("--k", type=_k_list, default=_k_list(DEFAULT_K_GRID),
                   help=f"comma-separated k grid (default {DEFAULT_K_GRID})")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("probe", help="runtime scaling of the cost-of-privacy computation")
    p.add_argument("--k", type=float, default=20.0)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--states", type=int, default=20)
    p.add_argument("--actions", type=int, default=5)
    p.add_argument("--horizon", type=int, default=10)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("plot", help="render figures from an existing sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("validate", help="run the invariant and statistical check suites")
    p.add_argument("--quick", action="store_true", help="smaller sample sizes")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidModelError, ValueError, OSError, KeyError) as exc:
        print(f"privmdp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
