"""Seeded experiment sweeps over the privacy level k, CSV emission, and the
runtime-scaling probe."""

from __future__ import annotations

import hashlib
import json
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .examples import build_example1, build_example2
from .mdp import InvalidModelError, Mdp, evaluate_policy_finite, evaluate_policy_infinite
from .mdp_io import load_mdp
from .privacy import BIT_GENERATOR, PrivacyParams, RngStream, privatize_kernel, smooth_kernel
from .robust import CopReport, bounds_finite, bounds_infinite, cost_of_privacy
from .synthesis import synthesize_finite, synthesize_infinite

THREADS_ENV = "PRIVMDP_THREADS"

CSV_HEADER = (
    "example,k,beta,alpha,trial,seed,v_private,v_nonprivate,v_pess,v_opt,"
    "cop_bound,action_s0,t_privatize_ms,t_synth_ms,t_bounds_ms"
)
_TIMING_COLUMNS = 3  # trailing wall-clock columns, excluded from determinism hashes

EXAMPLE1 = "builtin:example1"
EXAMPLE2 = "builtin:example2"


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: an MDP source, a grid of k values, and seeded trials.

    `source` is "builtin:example1", "builtin:example2", or a JSON model path.
    `smooth_floor` > 0 applies the explicit interiority preprocessing to the
    source kernel before anything else; the smoothed model is then the ground
    truth for the whole experiment. `tol` only matters for infinite horizons.
    """

    source: str
    k_grid: tuple[float, ...]
    beta: float = 0.05
    trials: int = 50
    seed: int = 0
    tol: float = 1e-6
    smooth_floor: float = 0.0
    out: str | None = None

    def __post_init__(self):
        if not self.k_grid or any(k <= 0.0 for k in self.k_grid):
            raise ValueError("k grid must be non-empty with positive entries")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    example: str
    k: float
    beta: float
    alpha: float
    trial: int
    seed: int
    v_private: float
    v_nonprivate: float
    v_pess: float
    v_opt: float
    cop_bound: float
    action_s0: str
    t_privatize_ms: float
    t_synth_ms: float
    t_bounds_ms: float


def resolve_source(cfg: SweepConfig) -> tuple[str, Mdp]:
    """Materialize the configured MDP (smoothed if requested) and a short id."""
    if cfg.source == EXAMPLE1:
        label, m = "example1", build_example1()
    elif cfg.source == EXAMPLE2:
        label, m = "example2", build_example2(cfg.seed)
    else:
        label, m = Path(cfg.source).stem, load_mdp(cfg.source)
    if cfg.smooth_floor > 0.0:
        m = smooth_kernel(m, cfg.smooth_floor)
    bad = [
        f"({m.states[s]},{m.actions[s][a]})"
        for s, a in m.sa_pairs()
        if not np.all(m.kernel[s][a] > 0.0)
    ]
    if bad:
        raise InvalidModelError(
            "source kernel has non-interior rows "
            + ", ".join(bad)
            + "; pass a positive smooth_floor (--smooth-floor) to preprocess explicitly"
        )
    return label, m


def run_trial(m: Mdp, k: float, beta: float, trial: int, seed: int, tol: float):
    """One privatize/synthesize/evaluate/bound trial under stream (trial, s, a).

    Only the non-private evaluation touches the true kernel; synthesis and the
    bound recursions see the privatized model exclusively. Returns the report
    together with the synthesized policy.
    """
    rng = RngStream(seed, (trial,))
    s0 = m.states[0]

    t0 = time.perf_counter()
    mbar = privatize_kernel(m, k, rng)
    t1 = time.perf_counter()
    if m.horizon is not None:
        synth = synthesize_finite(mbar)
        v_nonpriv = evaluate_policy_finite(m, synth.policy).at(s0)
    else:
        synth = synthesize_infinite(mbar, tol)
        v_nonpriv = evaluate_policy_infinite(m, synth.policy, tol).at(s0)
    t2 = time.perf_counter()
    params = PrivacyParams.from_k(k, beta)
    if m.horizon is not None:
        bounds = bounds_finite(mbar, synth.policy, params)
    else:
        bounds = bounds_infinite(mbar, synth.policy, params, tol)
    cop = cost_of_privacy(bounds, s0)
    t3 = time.perf_counter()

    report = CopReport(
        k=k,
        beta=beta,
        alpha=params.alpha,
        v_private=synth.value.at(s0),
        v_pessimistic=bounds.pessimistic.at(s0),
        v_optimistic=bounds.optimistic.at(s0),
        cop_bound=cop,
        v_nonprivate=v_nonpriv,
        seed=seed,
        trial=trial,
        t_privatize_ms=(t1 - t0) * 1e3,
        t_synth_ms=(t2 - t1) * 1e3,
        t_bounds_ms=(t3 - t2) * 1e3,
    )
    return report, synth.policy


def _sweep_task(args) -> SweepRow:
    m, label, k, beta, trial, seed, tol = args
    report, policy = run_trial(m, k, beta, trial, seed, tol)
    action_s0 = m.actions[0][int(np.argmax(policy.row(0, 0)))]
    return SweepRow(
        example=label,
        k=k,
        beta=beta,
        alpha=report.alpha,
        trial=trial,
        seed=seed,
        v_private=report.v_private,
        v_nonprivate=report.v_nonprivate,
        v_pess=report.v_pessimistic,
        v_opt=report.v_optimistic,
        cop_bound=report.cop_bound,
        action_s0=action_s0,
        t_privatize_ms=report.t_privatize_ms,
        t_synth_ms=report.t_synth_ms,
        t_bounds_ms=report.t_bounds_ms,
    )


def worker_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        requested = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    if requested == 0:
        requested = os.cpu_count() or 1
    return max(1, min(requested, n_tasks))


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Run every (k, trial) pair and return rows sorted by (k, trial).

    Trials are pure functions of (master seed, trial index), so the worker
    count set through PRIVMDP_THREADS never changes the results.
    """
    label, m = resolve_source(cfg)
    tasks = [
        (m, label, k, cfg.beta, trial, cfg.seed, cfg.tol)
        for k in cfg.k_grid
        for trial in range(cfg.trials)
    ]
    workers = worker_count(len(tasks))
    if workers == 1:
        rows = [_sweep_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    rows.sort(key=lambda r: (r.k, r.trial))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.example,
                    repr(r.k),
                    repr(r.beta),
                    repr(r.alpha),
                    str(r.trial),
                    str(r.seed),
                    repr(r.v_private),
                    repr(r.v_nonprivate),
                    repr(r.v_pess),
                    repr(r.v_opt),
                    repr(r.cop_bound),
                    r.action_s0,
                    f"{r.t_privatize_ms:.3f}",
                    f"{r.t_synth_ms:.3f}",
                    f"{r.t_bounds_ms:.3f}",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def determinism_hash(csv_text: str) -> str:
    """SHA-256 of the CSV with the trailing wall-clock columns dropped."""
    kept = []
    for line in csv_text.strip().split("\n"):
        kept.append(",".join(line.split(",")[:-_TIMING_COLUMNS]))
    return hashlib.sha256("\n".join(kept).encode()).hexdigest()


def write_sweep_outputs(cfg: SweepConfig, rows: list[SweepRow], out_path) -> Path:
    """Write the CSV plus a .meta.json sidecar recording config and generator
    provenance (the pinned CSV schema has no room for either)."""
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_text = rows_to_csv(rows)
    out.write_text(csv_text)
    meta = {
        "config": asdict(cfg),
        "bit_generator": BIT_GENERATOR,
        "privmdp_version": __version__,
        "rows": len(rows),
        "determinism_sha256": determinism_hash(csv_text),
    }
    out.with_suffix(out.suffix + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


@dataclass(frozen=True)
class ProbeReport:
    base_seconds: float
    double_horizon_seconds: float
    double_actions_seconds: float
    half_states_seconds: float

    @property
    def horizon_ratio(self) -> float:
        return self.double_horizon_seconds / self.base_seconds

    @property
    def actions_ratio(self) -> float:
        return self.double_actions_seconds / self.base_seconds

    @property
    def states_ratio(self) -> float:
        return self.half_states_seconds / self.base_seconds


def _time_bounds(m: Mdp, k: float, beta: float, seed: int, min_sample: float = 0.2,
                 samples: int = 5) -> float:
    """Median wall time of the cost-of-privacy computation (bounds recursion)."""
    rng = RngStream(seed, (0,))
    mbar = privatize_kernel(m, k, rng)
    synth = synthesize_finite(mbar)
    params = PrivacyParams.from_k(k, beta)

    def once() -> float:
        t0 = time.perf_counter()
        bounds = bounds_finite(mbar, synth.policy, params)
        cost_of_privacy(bounds, mbar.states[0])
        return time.perf_counter() - t0

    single = once()
    reps = max(1, int(np.ceil(min_sample / max(single, 1e-9))))
    timings = []
    for _ in range(samples):
        t0 = time.perf_counter()
        for _ in range(reps):
            once()
        timings.append((time.perf_counter() - t0) / reps)
    return statistics.median(timings)


def runtime_probe(cfg: SweepConfig, n_states: int = 20, n_actions: int = 5,
                  horizon: int = 10) -> ProbeReport:
    """Cost-of-privacy wall time under doubled horizon, doubled action sets,
    and halved state space, relative to the base shape. Near-linear cost in T
    and |A_s| puts the doubling ratios around 2."""
    if cfg.source != EXAMPLE2:
        raise ValueError("runtime_probe rebuilds the random benchmark; source must be builtin:example2")
    k = cfg.k_grid[0]
    variants = {
        "base": (n_states, n_actions, horizon),
        "double_horizon": (n_states, n_actions, 2 * horizon),
        "double_actions": (n_states, 2 * n_actions, horizon),
        "half_states": (n_states // 2, n_actions, horizon),
    }
    seconds = {}
    for name, (ns, na, T) in variants.items():
        m = build_example2(cfg.seed, n_states=ns, n_actions=na, horizon=T)
        seconds[name] = _time_bounds(m, k, cfg.beta, cfg.seed)
    return ProbeReport(
        base_seconds=seconds["base"],
        double_horizon_seconds=seconds["double_horizon"],
        double_actions_seconds=seconds["double_actions"],
        half_states_seconds=seconds["half_states"],
    )
