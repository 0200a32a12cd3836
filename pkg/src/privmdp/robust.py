"""Uncertainty sets around privatized rows, inner extrema, and the
pessimistic/optimistic value recursions that certify the cost of privacy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import MAX, MIN
from .mdp import (
    TIME_VARYING,
    STATIONARY,
    InvalidModelError,
    Mdp,
    Policy,
    ProbVector,
    ValueFunction,
    _check_compatible,
    prob_vector,
    require_valid,
)
from .privacy import PrivacyParams

MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class UncertaintySet:
    """The set of beta-mixtures of an arbitrary simplex point with a point in
    the alpha-box around the privatized row `pbar`. Never empty: pbar itself
    is always a member."""

    pbar: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "pbar", prob_vector(self.pbar, "uncertainty-set center").entries)
        if not self.alpha >= 0.0:
            raise InvalidModelError(f"alpha must be non-negative, got {self.alpha}")
        if not 0.0 <= self.beta < 1.0:
            raise InvalidModelError(f"beta must lie in [0, 1), got {self.beta}")

    @property
    def dim(self) -> int:
        return self.pbar.shape[0]


@dataclass(frozen=True)
class BoundPair:
    pessimistic: ValueFunction
    optimistic: ValueFunction


@dataclass(frozen=True)
class CopReport:
    """One privatize/synthesize/bound run, reduced to the numbers the
    experiment sweeps record."""

    k: float
    beta: float
    alpha: float
    v_private: float
    v_pessimistic: float
    v_optimistic: float
    cop_bound: float
    v_nonprivate: float | None = None
    seed: int | None = None
    trial: int | None = None
    t_privatize_ms: float = 0.0
    t_synth_ms: float = 0.0
    t_bounds_ms: float = 0.0


def _box_extremum(values: np.ndarray, pbar: np.ndarray, alpha: float, direction: str):
    """Extremum of values.x over the simplex intersected with the alpha-box
    around pbar, by greedy water-filling.

    Start every coordinate at its lower bound max(pbar_i - alpha, 0), then pour
    the remaining mass into coordinates in ascending (min) or descending (max)
    `values` order, capping each at min(pbar_i + alpha, 1). Always feasible
    because the lower bounds sum to at most 1 and the caps to at least 1.
    """
    lo = np.maximum(pbar - alpha, 0.0)
    hi = np.minimum(pbar + alpha, 1.0)
    budget = max(1.0 - lo.sum(), 0.0)
    if direction == MIN:
        order = np.argsort(values, kind="stable")
    else:
        order = np.argsort(-values, kind="stable")
    caps = (hi - lo)[order]
    started = np.cumsum(caps) - caps
    fill = np.clip(budget - started, 0.0, caps)
    x = lo
    x[order] += fill
    return x


def _mixture_extremum(values: np.ndarray, pbar: np.ndarray, alpha: float, beta: float,
                      direction: str):
    """(extremum value, witness) of values.p over the mixed uncertainty set."""
    box = _box_extremum(values, pbar, alpha, direction)
    if beta == 0.0:
        witness = box
    else:
        vertex = int(np.argmin(values) if direction == MIN else np.argmax(values))
        witness = (1.0 - beta) * box
        witness[vertex] += beta
    return float(witness @ values), witness


def inner_extremum(values, u: UncertaintySet, direction: str) -> tuple[float, ProbVector]:
    """Exact extremum of sum_i p_i values_i over p in the uncertainty set.

    The mass of the free mixture component concentrates on one vertex of the
    simplex, and the box component is solved by water-filling, so no LP is
    needed; `lp.build_inner_lp` + `lp.solve_lp` provide the independent
    cross-check.
    """
    v = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if v.shape != (u.dim,):
        raise ValueError(f"values shape {v.shape} does not match set dimension {u.dim}")
    if direction not in (MIN, MAX):
        raise ValueError(f"direction must be {MIN!r} or {MAX!r}")
    val, witness = _mixture_extremum(v, u.pbar, u.alpha, u.beta, direction)
    return val, prob_vector(witness, where="extremum witness")


def is_member(p, u: UncertaintySet, tol: float = MEMBER_TOL) -> bool:
    """Membership test for the mixed uncertainty set.

    p belongs iff some simplex point P2 inside the alpha-box also satisfies
    (1-beta) P2 <= p coordinatewise; the mixture partner P1 then lands on the
    simplex automatically. Reduces to a box-and-sum feasibility check.
    """
    arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if arr.shape != (u.dim,):
        return False
    if np.any(arr < -tol) or abs(arr.sum() - 1.0) > tol:
        return False
    lo = np.maximum(u.pbar - u.alpha, 0.0)
    cap = np.minimum(u.pbar + u.alpha, np.minimum(1.0, arr / (1.0 - u.beta)))
    return bool(np.all(lo <= cap + tol) and lo.sum() <= 1.0 + tol and cap.sum() >= 1.0 - tol)


def _stage_backup(m: Mdp, pi: Policy, t: int, v_next: np.ndarray, alpha: float,
                  beta: float, direction: str) -> np.ndarray:
    """One robust Bellman backup: per (s, a), the inner extremum replaces the
    nominal expectation over next states."""
    out = np.empty(m.n_states)
    for s in range(m.n_states):
        kernel = m.kernel[s]
        q = np.empty(kernel.shape[0])
        for a in range(kernel.shape[0]):
            val, _ = _mixture_extremum(v_next, kernel[a], alpha, beta, direction)
            q[a] = m.rewards[s][a] + m.discount * val
        out[s] = float(pi.row(t, s) @ q)
    return out


def bounds_finite(mbar: Mdp, pi: Policy, params: PrivacyParams) -> BoundPair:
    """Pessimistic and optimistic backward recursions around the privatized
    kernel; both start from the terminal rewards."""
    require_valid(mbar)
    if mbar.horizon is None:
        raise InvalidModelError("bounds_finite needs a finite-horizon MDP")
    _check_compatible(mbar, pi)
    T = mbar.horizon
    low = np.empty((T + 1, mbar.n_states))
    upp = np.empty((T + 1, mbar.n_states))
    low[T] = mbar.terminal
    upp[T] = mbar.terminal
    for t in range(T - 1, -1, -1):
        low[t] = _stage_backup(mbar, pi, t, low[t + 1], params.alpha, params.beta, MIN)
        upp[t] = _stage_backup(mbar, pi, t, upp[t + 1], params.alpha, params.beta, MAX)
    return BoundPair(
        pessimistic=ValueFunction(TIME_VARYING, mbar.states, low),
        optimistic=ValueFunction(TIME_VARYING, mbar.states, upp),
    )


def robust_value_iteration(mbar: Mdp, pi: Policy, params: PrivacyParams, tol: float,
                           direction: str) -> tuple[np.ndarray, list[float]]:
    """Iterate the robust policy operator from the zero vector until the
    successive-iterate gap reaches tol*(1-gamma)/gamma; returns the fixed-point
    approximation and the gap history (a gamma-contraction certificate)."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    threshold = tol * (1.0 - mbar.discount) / mbar.discount
    v = np.zeros(mbar.n_states)
    gaps: list[float] = []
    while True:
        v_next = _stage_backup(mbar, pi, 0, v, params.alpha, params.beta, direction)
        gap = float(np.max(np.abs(v_next - v)))
        gaps.append(gap)
        v = v_next
        if gap <= threshold:
            return v, gaps


def bounds_infinite(mbar: Mdp, pi: Policy, params: PrivacyParams, tol: float) -> BoundPair:
    """Fixed points of the pessimistic and optimistic robust operators, each
    certified within tol in the infinity norm."""
    require_valid(mbar)
    if mbar.horizon is not None:
        raise InvalidModelError("bounds_infinite needs an infinite-horizon MDP")
    if pi.kind != STATIONARY:
        raise InvalidModelError("infinite-horizon bounds need a stationary policy")
    _check_compatible(mbar, pi)
    low, _ = robust_value_iteration(mbar, pi, params, tol, MIN)
    upp, _ = robust_value_iteration(mbar, pi, params, tol, MAX)
    return BoundPair(
        pessimistic=ValueFunction(STATIONARY, mbar.states, low),
        optimistic=ValueFunction(STATIONARY, mbar.states, upp),
    )


def cost_of_privacy(bounds: BoundPair, s0: str) -> float:
    """Width of the bound interval at the initial state (stage 0 when finite)."""
    if s0 not in bounds.pessimistic.states:
        raise KeyError(f"unknown initial state {s0!r}")
    return bounds.optimistic.at(s0) - bounds.pessimistic.at(s0)
