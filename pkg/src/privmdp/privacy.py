"""Dirichlet-mechanism privatization, its concentration radius, and seeded streams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mdp import InvalidModelError, Mdp, ProbVector, prob_vector

# Pinned bit generator. Philox is counter-based, so streams keyed by
# (seed, stream id) are independent and reproducible regardless of the
# order in which they are consumed.
BIT_GENERATOR = "philox4x64"

_MAX_REDRAWS = 100


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream id) pair naming one independent random substream.

    The same pair always reproduces the same draws; distinct stream ids give
    statistically independent substreams, so work can be farmed out across
    processes without changing results.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit non-negative integer")
        if any(i < 0 for i in self.stream):
            raise ValueError("stream ids must be non-negative")

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(seed=seq))


def alpha_bound(k: float, beta: float) -> float:
    """Concentration radius sqrt(log(1/beta) / (2(k+1))).

    The Dirichlet mechanism with parameter k stays within inf-norm `alpha` of
    its input except with probability at most `beta`.
    """
    if not k > 0.0:
        raise ValueError(f"k must be positive, got {k}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return math.sqrt(-math.log(beta) / (2.0 * (k + 1.0)))


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy knob k plus the tail probability beta and radius alpha it induces.

    `from_k` derives alpha = alpha_bound(k, beta); building the degenerate
    (alpha=0, beta=0) instance directly is allowed for collapse tests.
    """

    k: float
    beta: float
    alpha: float

    def __post_init__(self):
        if not self.k > 0.0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not self.alpha >= 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")

    @classmethod
    def from_k(cls, k: float, beta: float) -> "PrivacyParams":
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1) to derive alpha, got {beta}")
        return cls(k=float(k), beta=float(beta), alpha=alpha_bound(k, beta))


def gamma_draws(shape, gen: np.random.Generator) -> np.ndarray:
    """Gamma(shape, 1) variates, elementwise over `shape`.

    Marsaglia-Tsang squeeze rejection for shape >= 1; shapes below 1 sample
    shape+1 and apply the uniform-power boost. Vectorized so statistical test
    batches stay cheap.
    """
    a = np.asarray(shape, dtype=np.float64)
    if np.any(a <= 0.0):
        raise ValueError("gamma shape parameters must be positive")
    flat = a.ravel()
    out = np.empty(flat.shape)
    small = flat < 1.0
    d = np.where(small, flat + 1.0, flat) - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    pending = np.arange(flat.size)
    while pending.size:
        x = gen.standard_normal(pending.size)
        u = gen.random(pending.size)
        t = 1.0 + c[pending] * x
        v = t * t * t
        pos = v > 0.0
        x2 = x * x
        accept = pos & (u < 1.0 - 0.0331 * x2 * x2)
        log_v = np.log(np.where(pos, v, 1.0))
        accept |= pos & (np.log(u) < 0.5 * x2 + d[pending] * (1.0 - v + log_v))
        hit = pending[accept]
        out[hit] = d[hit] * v[accept]
        pending = pending[~accept]
    if small.any():
        boost = gen.random(int(small.sum())) ** (1.0 / flat[small])
        out[small] *= boost
    return out.reshape(a.shape)


def _interior_simplex(p, where: str) -> np.ndarray:
    pv = p if isinstance(p, ProbVector) else prob_vector(p, where=where)
    if not pv.is_interior():
        raise InvalidModelError(f"{where} must be strictly interior (all entries > 0)")
    return pv.entries


def dirichlet_draws(p, k: float, rng: RngStream, n_draws: int) -> np.ndarray:
    """`n_draws` privatized copies of interior simplex point `p`, shape (n_draws, dim)."""
    base = _interior_simplex(p, "Dirichlet mechanism input")
    if not k > 0.0:
        raise ValueError(f"k must be positive, got {k}")
    gen = rng.generator()
    conc = np.broadcast_to(k * base, (n_draws, base.size))
    g = gamma_draws(conc, gen)
    totals = g.sum(axis=1)
    for _ in range(_MAX_REDRAWS):
        dead = totals == 0.0
        if not dead.any():
            break
        g[dead] = gamma_draws(conc[dead], gen)
        totals = g.sum(axis=1)
    else:
        raise ArithmeticError("Dirichlet draw underflowed to zero repeatedly")
    return g / totals[:, None]


def dirichlet_sample(p, k: float, rng: RngStream) -> ProbVector:
    """One draw of the Dirichlet mechanism: Dirichlet(k * p) for interior p."""
    row = dirichlet_draws(p, k, rng, 1)[0]
    return prob_vector(row, where="Dirichlet mechanism output")


def privatize_kernel(m: Mdp, k: float, rng: RngStream) -> Mdp:
    """Replace every kernel row with an independent Dirichlet-mechanism draw.

    Row (s, a) uses substream rng.child(s, a), so draws do not depend on
    traversal order. Rewards, horizon, discount, and terminal values pass
    through unchanged.
    """
    offenders = [
        f"({m.states[s]},{m.actions[s][a]})"
        for s, a in m.sa_pairs()
        if not np.all(m.kernel[s][a] > 0.0)
    ]
    if offenders:
        raise InvalidModelError(
            "kernel rows must be strictly interior for the Dirichlet mechanism; "
            "offending (s,a): " + ", ".join(offenders)
        )
    new_kernel = []
    for s in range(m.n_states):
        rows = np.empty_like(m.kernel[s])
        for a in range(len(m.actions[s])):
            rows[a] = dirichlet_draws(m.kernel[s][a], k, rng.child(s, a), 1)[0]
        new_kernel.append(rows)
    return m.with_kernel(new_kernel)


def smooth(p, eps_floor: float) -> ProbVector:
    """Explicit interiority preprocessing: (1 - eps_floor) p + eps_floor * uniform.

    Never applied automatically by the sampling routines; callers opt in.
    """
    if not 0.0 <= eps_floor < 1.0:
        raise ValueError(f"eps_floor must lie in [0, 1), got {eps_floor}")
    pv = p if isinstance(p, ProbVector) else prob_vector(p, where="smooth input")
    mixed = (1.0 - eps_floor) * pv.entries + eps_floor / pv.dim
    return prob_vector(mixed, where="smoothed vector")


def smooth_kernel(m: Mdp, eps_floor: float) -> Mdp:
    """Apply `smooth` to every kernel row of an MDP."""
    new_kernel = []
    for s in range(m.n_states):
        rows = np.empty_like(m.kernel[s])
        for a in range(len(m.actions[s])):
            rows[a] = smooth(m.kernel[s][a], eps_floor).entries
        new_kernel.append(rows)
    return m.with_kernel(new_kernel)


def adjacent_pair(p, b: float, rng: RngStream) -> ProbVector:
    """A b-adjacent neighbor of `p`: differs in exactly two coordinates, with
    1-norm distance at most b and the result still interior."""
    base = _interior_simplex(p, "adjacency input")
    if base.size < 2:
        raise ValueError("adjacency needs at least two coordinates")
    if not 0.0 < b <= 1.0:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    gen = rng.generator()
    i, j = gen.choice(base.size, size=2, replace=False)
    u = gen.random()
    while u == 0.0:
        u = gen.random()
    delta = u * min(b / 2.0, base[j])
    q = base.copy()
    q[i] += delta
    q[j] -= delta
    return prob_vector(q, where="adjacent vector")
