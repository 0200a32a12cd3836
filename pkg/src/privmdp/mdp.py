"""Core MDP model: simplex vectors, validation, exact policy evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

# Absolute tolerance on probability-row sums. Rows off by more than this are
# rejected; rows within it are renormalized (division by the sum) so that
# file round-trips never reject a model they produced.
SIMPLEX_ATOL = 1e-9

STATIONARY = "stationary"
TIME_VARYING = "time-varying"


class InvalidModelError(ValueError):
    """Raised when an MDP, policy, or probability vector violates its invariants."""


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidModelError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidModelError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ProbVector:
    """A point on the unit simplex. `renormalized` records whether construction
    had to divide by the (near-one) input sum."""

    entries: np.ndarray
    renormalized: bool = False

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def is_interior(self) -> bool:
        return bool(np.all(self.entries > 0.0))


def prob_vector(values, where: str = "probability vector") -> ProbVector:
    """Validate `values` as a simplex point, renormalizing sums within SIMPLEX_ATOL."""
    arr = _as_float_array(values, where)
    if arr.size == 0:
        raise InvalidModelError(f"{where} is empty")
    if np.any(arr < -SIMPLEX_ATOL):
        raise InvalidModelError(f"{where} has negative entry {arr.min():.3g}")
    clipped = np.any(arr < 0.0)
    arr = np.maximum(arr, 0.0)
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_ATOL:
        raise InvalidModelError(f"{where} sums to {total!r}, not 1")
    renorm = clipped or total != 1.0
    if total != 1.0:
        arr = arr / total
    return ProbVector(arr, renormalized=renorm)


@dataclass(frozen=True)
class Mdp:
    """Finite MDP with per-state action sets.

    Internal layout is dense and index-based: `rewards[s]` has shape (|A_s|,)
    and `kernel[s]` has shape (|A_s|, |S|), with next-state columns in `states`
    order. `horizon` is a stage count for finite problems and None for the
    discounted infinite-horizon case.
    """

    states: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    rewards: tuple[np.ndarray, ...]
    kernel: tuple[np.ndarray, ...]
    horizon: int | None
    discount: float
    terminal: np.ndarray | None = None
    renormalized_rows: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for arr in (*self.rewards, *self.kernel):
            arr.setflags(write=False)
        if self.terminal is not None:
            self.terminal.setflags(write=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_finite(self) -> bool:
        return self.horizon is not None

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(f"unknown state {state!r}") from None

    def sa_pairs(self) -> Iterator[tuple[int, int]]:
        for s in range(self.n_states):
            for a in range(len(self.actions[s])):
                yield s, a

    def with_kernel(self, kernel: Sequence[np.ndarray]) -> "Mdp":
        return replace(self, kernel=tuple(kernel), renormalized_rows=())


def make_mdp(
    states: Sequence[str],
    actions: Mapping[str, Sequence[str]],
    rewards: Mapping[tuple[str, str], float],
    kernel: Mapping[tuple[str, str], Sequence[float]],
    horizon: int | None,
    discount: float,
    terminal: Mapping[str, float] | None = None,
) -> Mdp:
    """Build and validate an Mdp from name-keyed inputs.

    State order follows `states`; action order follows each `actions[s]`.
    Kernel rows are passed through `prob_vector`, so sums within SIMPLEX_ATOL
    are renormalized and recorded in `renormalized_rows`.
    """
    state_names = tuple(str(s) for s in states)
    if len(set(state_names)) != len(state_names):
        raise InvalidModelError("duplicate state names")
    if not state_names:
        raise InvalidModelError("MDP needs at least one state")

    action_sets = []
    reward_rows = []
    kernel_rows = []
    renormed = []
    n = len(state_names)
    for s in state_names:
        acts = tuple(str(a) for a in actions.get(s, ()))
        if not acts:
            raise InvalidModelError(f"state {s!r} has no actions")
        if len(set(acts)) != len(acts):
            raise InvalidModelError(f"state {s!r} has duplicate action names")
        action_sets.append(acts)
        r_row = np.empty(len(acts))
        k_row = np.empty((len(acts), n))
        for j, a in enumerate(acts):
            if (s, a) not in rewards:
                raise InvalidModelError(f"missing reward for ({s},{a})")
            r_row[j] = float(rewards[(s, a)])
            if (s, a) not in kernel:
                raise InvalidModelError(f"missing kernel row for ({s},{a})")
            pv = prob_vector(kernel[(s, a)], where=f"kernel row ({s},{a})")
            if pv.dim != n:
                raise InvalidModelError(
                    f"kernel row ({s},{a}) has dimension {pv.dim}, expected {n}"
                )
            if pv.renormalized:
                renormed.append(f"{s}|{a}")
            k_row[j] = pv.entries
        if not np.all(np.isfinite(r_row)):
            raise InvalidModelError(f"non-finite reward at state {s!r}")
        reward_rows.append(r_row)
        kernel_rows.append(k_row)

    discount = float(discount)
    if not 0.0 < discount <= 1.0:
        raise InvalidModelError(f"discount {discount} outside (0, 1]")
    if horizon is None:
        if discount >= 1.0:
            raise InvalidModelError("discount must be < 1 for infinite horizon")
        term_arr = None
    else:
        horizon = int(horizon)
        if horizon < 1:
            raise InvalidModelError(f"finite horizon must be >= 1, got {horizon}")
        if terminal is None:
            raise InvalidModelError("finite horizon requires terminal rewards")
        term_arr = np.array([float(terminal[s]) for s in state_names])
        if not np.all(np.isfinite(term_arr)):
            raise InvalidModelError("non-finite terminal reward")

    return Mdp(
        states=state_names,
        actions=tuple(action_sets),
        rewards=tuple(reward_rows),
        kernel=tuple(kernel_rows),
        horizon=horizon,
        discount=discount,
        terminal=term_arr,
        renormalized_rows=tuple(renormed),
    )


def validate_mdp(m: Mdp) -> list[str]:
    """Total invariant check; returns one message per violation (empty = valid)."""
    issues: list[str] = []
    n = m.n_states
    if n == 0:
        return ["MDP has no states"]
    if len(m.actions) != n or len(m.rewards) != n or len(m.kernel) != n:
        return ["actions/rewards/kernel not aligned with states"]
    for s in range(n):
        name = m.states[s]
        if len(m.actions[s]) == 0:
            issues.append(f"state {name} has no actions")
            continue
        if m.rewards[s].shape != (len(m.actions[s]),):
            issues.append(f"reward row shape mismatch at state {name}")
        if m.kernel[s].shape != (len(m.actions[s]), n):
            issues.append(f"kernel shape mismatch at state {name}")
            continue
        for a, aname in enumerate(m.actions[s]):
            row = m.kernel[s][a]
            total = float(row.sum())
            if abs(total - 1.0) > SIMPLEX_ATOL:
                issues.append(f"row sum {total:.10g} != 1 at ({name},{aname})")
            if np.any(row < -SIMPLEX_ATOL):
                issues.append(f"negative probability at ({name},{aname})")
        if not np.all(np.isfinite(m.rewards[s])):
            issues.append(f"non-finite reward at state {name}")
    if not 0.0 < m.discount <= 1.0:
        issues.append(f"discount {m.discount} outside (0, 1]")
    if m.horizon is None:
        if m.discount >= 1.0:
            issues.append("discount must be < 1 for infinite horizon")
    else:
        if m.horizon < 1:
            issues.append(f"finite horizon must be >= 1, got {m.horizon}")
        if m.terminal is None:
            issues.append("finite horizon requires terminal rewards")
        elif m.terminal.shape != (n,):
            issues.append("terminal reward shape mismatch")
    return issues


def require_valid(m: Mdp) -> None:
    issues = validate_mdp(m)
    if issues:
        raise InvalidModelError("invalid MDP: " + "; ".join(issues))


@dataclass(frozen=True)
class Policy:
    """Markovian policy. `rows[t][s]` is a distribution over `A_s`; stationary
    policies carry a single stage map."""

    kind: str
    rows: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        for stage in self.rows:
            for row in stage:
                row.setflags(write=False)

    @property
    def n_stages(self) -> int:
        return len(self.rows)

    def row(self, t: int, s: int) -> np.ndarray:
        if self.kind == STATIONARY:
            return self.rows[0][s]
        return self.rows[t][s]


def _check_policy_stage(m: Mdp, stage, label: str) -> tuple[np.ndarray, ...]:
    if len(stage) != m.n_states:
        raise InvalidModelError(f"{label} has {len(stage)} rows, expected {m.n_states}")
    out = []
    for s, row in enumerate(stage):
        pv = prob_vector(row, where=f"{label}, state {m.states[s]}")
        if pv.dim != len(m.actions[s]):
            raise InvalidModelError(
                f"{label}, state {m.states[s]}: {pv.dim} action probabilities,"
                f" expected {len(m.actions[s])}"
            )
        out.append(pv.entries)
    return tuple(out)


def stationary_policy(m: Mdp, rows: Sequence[Sequence[float]]) -> Policy:
    return Policy(STATIONARY, (_check_policy_stage(m, rows, "policy"),))


def time_varying_policy(m: Mdp, stages: Sequence[Sequence[Sequence[float]]]) -> Policy:
    if m.horizon is None or len(stages) != m.horizon:
        raise InvalidModelError(
            f"time-varying policy needs exactly {m.horizon} stage maps, got {len(stages)}"
        )
    checked = tuple(
        _check_policy_stage(m, stage, f"policy stage {t}") for t, stage in enumerate(stages)
    )
    return Policy(TIME_VARYING, checked)


def deterministic_policy(m: Mdp, choices) -> Policy:
    """Point-mass policy from action indices; `choices` is (S,) for stationary
    or (T, S) for time-varying."""
    arr = np.asarray(choices, dtype=np.int64)
    if arr.ndim == 1:
        stages = [arr]
        kind = STATIONARY
    else:
        kind = TIME_VARYING
        if m.horizon is None or arr.shape[0] != m.horizon:
            raise InvalidModelError("stage count does not match the horizon")
        stages = list(arr)
    rows = []
    for stage in stages:
        stage_rows = []
        for s, a in enumerate(stage):
            row = np.zeros(len(m.actions[s]))
            row[int(a)] = 1.0
            stage_rows.append(row)
        rows.append(tuple(stage_rows))
    return Policy(kind, tuple(rows))


@dataclass(frozen=True)
class ValueFunction:
    """State values keyed by the owning MDP's state order. Finite-horizon values
    have shape (T+1, S) with stage T equal to the terminal rewards; stationary
    values have shape (S,)."""

    kind: str
    states: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    def at(self, state: str, t: int = 0) -> float:
        s = self.states.index(state)
        if self.kind == STATIONARY:
            return float(self.values[s])
        return float(self.values[t, s])

    def initial(self) -> np.ndarray:
        return self.values[0] if self.kind == TIME_VARYING else self.values


def policy_backup(m: Mdp, pi: Policy, t: int, v_next: np.ndarray) -> np.ndarray:
    """One exact Bellman backup of `v_next` under the policy's stage-t rows."""
    out = np.empty(m.n_states)
    for s in range(m.n_states):
        q = m.rewards[s] + m.discount * (m.kernel[s] @ v_next)
        out[s] = float(pi.row(t, s) @ q)
    return out


def _check_compatible(m: Mdp, pi: Policy) -> None:
    if len(pi.rows[0]) != m.n_states:
        raise InvalidModelError("policy state count does not match the MDP")
    for s in range(m.n_states):
        if pi.rows[0][s].shape[0] != len(m.actions[s]):
            raise InvalidModelError(f"policy row at state {m.states[s]} has wrong arity")
    if pi.kind == TIME_VARYING and (m.horizon is None or pi.n_stages != m.horizon):
        raise InvalidModelError("time-varying policy stage count does not match the horizon")


def evaluate_policy_finite(m: Mdp, pi: Policy) -> ValueFunction:
    """Exact backward recursion V_T = R_T, V_t = pi_t . (r + gamma P V_{t+1})."""
    require_valid(m)
    if m.horizon is None:
        raise InvalidModelError("evaluate_policy_finite needs a finite-horizon MDP")
    _check_compatible(m, pi)
    T = m.horizon
    values = np.empty((T + 1, m.n_states))
    values[T] = m.terminal
    for t in range(T - 1, -1, -1):
        values[t] = policy_backup(m, pi, t, values[t + 1])
    return ValueFunction(TIME_VARYING, m.states, values)


def policy_value_iteration(m: Mdp, pi: Policy, tol: float) -> tuple[np.ndarray, list[float]]:
    """Fixed-point iteration from the zero vector; returns (values, gap history).

    Stops once the successive-iterate gap drops to tol*(1-gamma)/gamma, which
    bounds the distance to the true fixed point by tol.
    """
    threshold = tol * (1.0 - m.discount) / m.discount
    v = np.zeros(m.n_states)
    gaps: list[float] = []
    while True:
        v_next = policy_backup(m, pi, 0, v)
        gap = float(np.max(np.abs(v_next - v)))
        gaps.append(gap)
        v = v_next
        if gap <= threshold:
            return v, gaps


def evaluate_policy_infinite(m: Mdp, pi: Policy, tol: float) -> ValueFunction:
    """Discounted policy evaluation with certified accuracy ||v - v*||_inf <= tol."""
    require_valid(m)
    if m.horizon is not None:
        raise InvalidModelError("evaluate_policy_infinite needs an infinite-horizon MDP")
    if pi.kind != STATIONARY:
        raise InvalidModelError("infinite-horizon evaluation needs a stationary policy")
    _check_compatible(m, pi)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    v, _ = policy_value_iteration(m, pi, tol)
    return ValueFunction(STATIONARY, m.states, v)
