"""Optimal policy synthesis on the privatized MDP (dynamic programming)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import (
    STATIONARY,
    TIME_VARYING,
    InvalidModelError,
    Mdp,
    Policy,
    ValueFunction,
    deterministic_policy,
    require_valid,
)
from .privacy import RngStream, privatize_kernel


@dataclass(frozen=True)
class SynthesisResult:
    """Synthesized policy and its value on the MDP it was computed from.
    `iterations`/`residual` are populated for infinite-horizon runs only."""

    policy: Policy
    value: ValueFunction
    iterations: int | None = None
    residual: float | None = None


def _optimality_backup(m: Mdp, v_next: np.ndarray):
    """One max-over-actions Bellman backup; argmax ties go to the lowest
    action index so repeated runs agree exactly."""
    values = np.empty(m.n_states)
    choices = np.empty(m.n_states, dtype=np.int64)
    for s in range(m.n_states):
        q = m.rewards[s] + m.discount * (m.kernel[s] @ v_next)
        a = int(np.argmax(q))
        choices[s] = a
        values[s] = q[a]
    return values, choices


def synthesize_finite(mbar: Mdp) -> SynthesisResult:
    """Backward induction over the full horizon. The maximum over stochastic
    policies is attained at a deterministic one, so the result is a
    time-varying point-mass policy."""
    require_valid(mbar)
    if mbar.horizon is None:
        raise InvalidModelError("synthesize_finite needs a finite-horizon MDP")
    T = mbar.horizon
    values = np.empty((T + 1, mbar.n_states))
    choices = np.empty((T, mbar.n_states), dtype=np.int64)
    values[T] = mbar.terminal
    for t in range(T - 1, -1, -1):
        values[t], choices[t] = _optimality_backup(mbar, values[t + 1])
    return SynthesisResult(
        policy=deterministic_policy(mbar, choices),
        value=ValueFunction(TIME_VARYING, mbar.states, values),
    )


def synthesize_infinite(mbar: Mdp, tol: float) -> SynthesisResult:
    """Value iteration from the zero vector, stopping once the successive
    gap reaches tol*(1-gamma)/(2*gamma) so the value is within tol of optimal;
    the returned stationary policy is greedy for the final iterate."""
    require_valid(mbar)
    if mbar.horizon is not None:
        raise InvalidModelError("synthesize_infinite needs an infinite-horizon MDP")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    threshold = tol * (1.0 - mbar.discount) / (2.0 * mbar.discount)
    v = np.zeros(mbar.n_states)
    iterations = 0
    while True:
        v_next, choices = _optimality_backup(mbar, v)
        gap = float(np.max(np.abs(v_next - v)))
        v = v_next
        iterations += 1
        if gap <= threshold:
            break
    check, _ = _optimality_backup(mbar, v)
    residual = float(np.max(np.abs(check - v)))
    return SynthesisResult(
        policy=deterministic_policy(mbar, choices),
        value=ValueFunction(STATIONARY, mbar.states, v),
        iterations=iterations,
        residual=residual,
    )


def run_pipeline(m: Mdp, k: float, rng: RngStream, tol: float = 1e-8):
    """Privatize, then synthesize on the privatized model only.

    The synthesis stage receives nothing but the privatized MDP, so the whole
    pipeline is post-processing of the mechanism output; the original kernel
    is never read after privatization.
    """
    mbar = privatize_kernel(m, k, rng)
    if mbar.horizon is not None:
        result = synthesize_finite(mbar)
    else:
        result = synthesize_infinite(mbar, tol)
    return mbar, result
