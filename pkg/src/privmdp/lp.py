"""Small dense linear programs: a two-phase simplex solver and the inner-problem encoder."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Centralized tolerances.
FEAS_TOL = 1e-8
OPT_TOL = 1e-8
PIVOT_TOL = 1e-11

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

MIN = "min"
MAX = "max"


@dataclass(frozen=True)
class LinearProgram:
    """minimize c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lo <= x <= hi.

    `bounds[j]` is a (lo, hi) pair; None means unbounded on that side.
    """

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    bounds: tuple[tuple[float | None, float | None], ...]

    @classmethod
    def build(cls, c, a_eq=None, b_eq=None, a_ub=None, b_ub=None, bounds=None) -> "LinearProgram":
        c = np.atleast_1d(np.asarray(c, dtype=np.float64))
        n = c.size
        a_eq = np.zeros((0, n)) if a_eq is None else np.atleast_2d(np.asarray(a_eq, dtype=np.float64))
        b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, dtype=np.float64))
        a_ub = np.zeros((0, n)) if a_ub is None else np.atleast_2d(np.asarray(a_ub, dtype=np.float64))
        b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, dtype=np.float64))
        if bounds is None:
            bounds = ((0.0, None),) * n
        bounds = tuple((lo, hi) for lo, hi in bounds)
        lp = cls(c=c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub, bounds=bounds)
        lp._validate()
        return lp

    def _validate(self) -> None:
        n = self.c.size
        if self.a_eq.shape[1] != n or self.a_ub.shape[1] != n:
            raise ValueError("constraint matrices do not match the variable count")
        if self.a_eq.shape[0] != self.b_eq.size or self.a_ub.shape[0] != self.b_ub.size:
            raise ValueError("constraint matrix and right-hand side row counts differ")
        if len(self.bounds) != n:
            raise ValueError("bounds length does not match the variable count")
        for arr in (self.c, self.a_eq, self.b_eq, self.a_ub, self.b_ub):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite entry in LP data")
        for lo, hi in self.bounds:
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"empty variable bound [{lo}, {hi}]")


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None
    # Feasibility certificate: max violation over all constraints and bounds.
    feasibility_residual: float | None = None


def _simplex_core(tableau: np.ndarray, rhs: np.ndarray, cost: np.ndarray, basis: list[int]):
    """Bland-rule simplex on equality-form data with the given starting basis.

    Mutates tableau/rhs/basis in place; returns "optimal" or "unbounded".
    """
    m = rhs.size
    while True:
        reduced = cost - tableau.T @ cost[basis]
        reduced[basis] = 0.0
        candidates = np.flatnonzero(reduced < -OPT_TOL)
        if candidates.size == 0:
            return OPTIMAL
        enter = int(candidates[0])  # Bland: lowest index, no cycling
        col = tableau[:, enter]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED
        ratios = rhs[rows] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL]
        leave = int(min(tied, key=lambda i: basis[i]))  # Bland tie-break
        piv = tableau[leave, enter]
        tableau[leave] /= piv
        rhs[leave] /= piv
        for i in range(m):
            if i != leave and tableau[i, enter] != 0.0:
                f = tableau[i, enter]
                tableau[i] -= f * tableau[leave]
                rhs[i] -= f * rhs[leave]
        rhs[rhs < 0.0] = 0.0  # clamp roundoff; rhs is invariantly non-negative
        basis[leave] = enter


def _to_standard_form(lp: LinearProgram):
    """Rewrite onto variables y >= 0: returns (A, b, c, recover) with A y = b.

    `recover(y)` maps a standard-form point back to the original variables.
    """
    n = lp.c.size
    cols = []  # per original variable: list of (std index, sign)
    shifts = np.zeros(n)
    extra_ub = []  # (std index, cap) rows for two-sided bounds
    n_std = 0
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            shifts[j] = lo
            cols.append([(n_std, 1.0)])
            if hi is not None:
                extra_ub.append((n_std, hi - lo))
            n_std += 1
        elif hi is not None:
            shifts[j] = hi
            cols.append([(n_std, -1.0)])
            n_std += 1
        else:
            cols.append([(n_std, 1.0), (n_std + 1, -1.0)])
            n_std += 2

    def expand(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((mat.shape[0], n_std))
        for j in range(n):
            for idx, sign in cols[j]:
                out[:, idx] += sign * mat[:, j]
        return out

    a_eq = expand(lp.a_eq)
    b_eq = lp.b_eq - lp.a_eq @ shifts
    a_ub = expand(lp.a_ub)
    b_ub = lp.b_ub - lp.a_ub @ shifts
    if extra_ub:
        rows = np.zeros((len(extra_ub), n_std))
        caps = np.empty(len(extra_ub))
        for i, (idx, cap) in enumerate(extra_ub):
            rows[i, idx] = 1.0
            caps[i] = cap
        a_ub = np.vstack([a_ub, rows])
        b_ub = np.concatenate([b_ub, caps])

    n_slack = a_ub.shape[0]
    a = np.zeros((a_eq.shape[0] + n_slack, n_std + n_slack))
    a[: a_eq.shape[0], :n_std] = a_eq
    a[a_eq.shape[0]:, :n_std] = a_ub
    a[a_eq.shape[0]:, n_std:] = np.eye(n_slack)
    b = np.concatenate([b_eq, b_ub])
    c = np.zeros(n_std + n_slack)
    for j in range(n):
        for idx, sign in cols[j]:
            c[idx] += sign * lp.c[j]
    const = float(lp.c @ shifts)

    def recover(y: np.ndarray) -> np.ndarray:
        x = shifts.copy()
        for j in range(n):
            for idx, sign in cols[j]:
                x[j] += sign * y[idx]
        return x

    return a, b, c, recover, const


def _residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    if lp.a_eq.shape[0]:
        worst = max(worst, float(np.max(np.abs(lp.a_eq @ x - lp.b_eq))))
    if lp.a_ub.shape[0]:
        worst = max(worst, float(np.max(lp.a_ub @ x - lp.b_ub, initial=0.0)))
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            worst = max(worst, lo - x[j])
        if hi is not None:
            worst = max(worst, x[j] - hi)
    return worst


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex. Exact and deterministic on the small instances
    this package produces; not intended for large or sparse problems."""
    a, b, c, recover, const = _to_standard_form(lp)
    m, n = a.shape

    # Phase 1: flip rows to b >= 0, add artificials, minimize their sum.
    flip = b < 0.0
    a[flip] *= -1.0
    b = np.abs(b)
    tableau = np.hstack([a, np.eye(m)])
    rhs = b.copy()
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    _simplex_core(tableau, rhs, cost1, basis)
    if float(rhs[[i for i, bv in enumerate(basis) if bv >= n]].sum() if m else 0.0) > FEAS_TOL:
        return LpSolution(status=INFEASIBLE)

    # Drive any zero-level artificials out of the basis; drop redundant rows.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n:
            pivots = np.flatnonzero(np.abs(tableau[i, :n]) > PIVOT_TOL)
            if pivots.size == 0:
                keep[i] = False
                continue
            enter = int(pivots[0])
            piv = tableau[i, enter]
            tableau[i] /= piv
            rhs[i] /= piv
            for r in range(m):
                if r != i and tableau[r, enter] != 0.0:
                    f = tableau[r, enter]
                    tableau[r] -= f * tableau[i]
                    rhs[r] -= f * rhs[i]
            basis[i] = enter
    tableau = tableau[keep, :n]
    rhs = np.maximum(rhs[keep], 0.0)
    basis = [bv for i, bv in enumerate(basis) if keep[i]]

    # Phase 2 on the original objective.
    status = _simplex_core(tableau, rhs, c, basis)
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED)
    y = np.zeros(n)
    y[basis] = rhs
    x = recover(y)
    return LpSolution(
        status=OPTIMAL,
        x=x,
        objective_value=float(lp.c @ x) ,
        feasibility_residual=_residual(lp, x),
    )


def build_inner_lp(values, pbar, alpha: float, beta: float, direction: str) -> LinearProgram:
    """Encode the inner extremum over the mixed uncertainty set as an LP.

    Variables are stacked [P1, P2, p], each a simplex point of dimension n,
    with the box ||P2 - pbar||_inf <= alpha and the mixing identity
    beta*P1 + (1-beta)*P2 = p. The objective is +/- values.p, minimized.
    For direction "max" the returned LP minimizes -values.p, so the extremum
    equals the negated optimal objective.
    """
    v = np.atleast_1d(np.asarray(values, dtype=np.float64))
    pb = np.atleast_1d(np.asarray(pbar, dtype=np.float64))
    n = v.size
    if pb.size != n:
        raise ValueError("values and pbar dimensions differ")
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if direction not in (MIN, MAX):
        raise ValueError(f"direction must be {MIN!r} or {MAX!r}")

    c = np.zeros(3 * n)
    c[2 * n:] = v if direction == MIN else -v

    a_eq = np.zeros((3 + n, 3 * n))
    b_eq = np.zeros(3 + n)
    a_eq[0, :n] = 1.0
    a_eq[1, n: 2 * n] = 1.0
    a_eq[2, 2 * n:] = 1.0
    b_eq[:3] = 1.0
    for i in range(n):
        a_eq[3 + i, i] = beta
        a_eq[3 + i, n + i] = 1.0 - beta
        a_eq[3 + i, 2 * n + i] = -1.0

    a_ub = np.zeros((2 * n, 3 * n))
    b_ub = np.empty(2 * n)
    for i in range(n):
        a_ub[i, n + i] = 1.0
        b_ub[i] = pb[i] + alpha
        a_ub[n + i, n + i] = -1.0
        b_ub[n + i] = alpha - pb[i]

    return LinearProgram.build(c, a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub)
