"""Self-contained invariant and statistical checks behind `privmdp validate`.

Each check is deterministic (fixed seeds) and returns a CheckResult; the CLI
prints one pass/fail line per check. The pytest suite covers the same ground
at full acceptance sizes with independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .examples import build_example1
from .lp import MAX, MIN, build_inner_lp, solve_lp
from .mdp import Mdp, make_mdp, evaluate_policy_finite, policy_value_iteration, stationary_policy
from .privacy import PrivacyParams, RngStream, alpha_bound, dirichlet_draws
from .robust import (
    UncertaintySet,
    bounds_finite,
    cost_of_privacy,
    inner_extremum,
    is_member,
    robust_value_iteration,
)
from .sweep import SweepConfig, determinism_hash, rows_to_csv, run_sweep
from .synthesis import synthesize_finite


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_mdp(gen: np.random.Generator, n_states: int, n_actions: int,
               horizon: int | None, discount: float, reward_scale: float = 1.0,
               interior_floor: float = 0.05) -> Mdp:
    """Random dense MDP with interior kernel rows; shared by checks and tests."""
    states = [f"s{i}" for i in range(n_states)]
    actions = {s: [f"a{j}" for j in range(n_actions)] for s in states}
    rewards = {}
    kernel = {}
    for s in states:
        for a in actions[s]:
            row = gen.dirichlet(np.ones(n_states))
            row = (1.0 - interior_floor) * row + interior_floor / n_states
            kernel[(s, a)] = row
            rewards[(s, a)] = float(gen.random()) * reward_scale
    terminal = {s: float(gen.random()) * reward_scale for s in states}
    return make_mdp(states, actions, rewards, kernel, horizon, discount,
                    terminal if horizon is not None else None)


def random_stochastic_policy(gen: np.random.Generator, m: Mdp):
    rows = [gen.dirichlet(np.ones(len(m.actions[s]))) for s in range(m.n_states)]
    return stationary_policy(m, rows)


def random_uncertainty_instance(gen: np.random.Generator, n: int):
    values = gen.uniform(-1.0, 1.0, size=n)
    pbar = gen.dirichlet(np.ones(n))
    pbar = 0.9 * pbar + 0.1 / n
    alpha = float(gen.choice([0.0, gen.uniform(0.0, 1.2)]))
    beta = float(gen.choice([0.0, gen.uniform(0.0, 0.97), 0.999]))
    return values, pbar, alpha, beta


def check_alpha_bound() -> CheckResult:
    ok = alpha_bound(1.0, 1.0) == 0.0
    expected = math.sqrt(math.log(10.0) / 16.0)
    ok &= abs(alpha_bound(7.0, 0.1) - expected) < 1e-12
    ks = [1.0, 5.0, 20.0, 100.0]
    ok &= all(alpha_bound(k2, 0.1) < alpha_bound(k1, 0.1) for k1, k2 in zip(ks, ks[1:]))
    ok &= alpha_bound(7.0, 0.2) < alpha_bound(7.0, 0.1)
    return CheckResult("alpha_bound closed form and monotonicity", bool(ok), "")


def check_dirichlet_moments(n_draws: int = 100_000) -> CheckResult:
    failures = []
    for k in (2.0, 9.0, 50.0):
        p = np.array([0.5, 0.3, 0.2])
        draws = dirichlet_draws(p, k, RngStream(1234, (int(k),)), n_draws)
        mean_err = np.abs(draws.mean(axis=0) - p)
        stderr = np.sqrt(p * (1.0 - p) / ((k + 1.0) * n_draws))
        if np.any(mean_err > 4.0 * stderr):
            failures.append(f"mean off at k={k}: err={mean_err}, 4se={4 * stderr}")
        var = draws.var(axis=0, ddof=1)
        target = p * (1.0 - p) / (k + 1.0)
        if np.any(np.abs(var - target) > 0.05 * target):
            failures.append(f"variance off at k={k}: {var} vs {target}")
    return CheckResult("Dirichlet mechanism marginal moments", not failures, "; ".join(failures))


def check_concentration(n_draws: int = 100_000, dims=(3, 10)) -> CheckResult:
    gen = np.random.default_rng(99)
    failures = []
    for k in (1.0, 5.0, 20.0, 100.0):
        for beta in (0.01, 0.05, 0.2):
            a = alpha_bound(k, beta)
            for rep, n in enumerate(dims):
                p = gen.dirichlet(np.ones(n))
                p = 0.9 * p + 0.1 / n
                draws = dirichlet_draws(p, k, RngStream(777, (int(k), rep, n)), n_draws)
                freq = float(np.mean(np.max(np.abs(draws - p), axis=1) >= a))
                if freq > beta:
                    failures.append(f"(k={k}, beta={beta}, n={n}): tail freq {freq:.4f}")
    return CheckResult("Dirichlet concentration bound", not failures, "; ".join(failures))


def check_inner_vs_lp(n_instances: int = 200) -> CheckResult:
    gen = np.random.default_rng(5150)
    worst = 0.0
    for i in range(n_instances):
        n = int(gen.integers(2, 9))
        values, pbar, alpha, beta = random_uncertainty_instance(gen, n)
        u = UncertaintySet(pbar, alpha, beta)
        direction = MIN if i % 2 == 0 else MAX
        val, witness = inner_extremum(values, u, direction)
        sol = solve_lp(build_inner_lp(values, pbar, alpha, beta, direction))
        if sol.status != "optimal":
            return CheckResult("inner extremum vs LP oracle", False,
                               f"LP status {sol.status} on instance {i}")
        lp_val = sol.objective_value if direction == MIN else -sol.objective_value
        worst = max(worst, abs(val - lp_val))
        if not is_member(witness.entries, u):
            return CheckResult("inner extremum vs LP oracle", False,
                               f"witness not a member on instance {i}")
        if abs(float(witness.entries @ values) - val) > 1e-12:
            return CheckResult("inner extremum vs LP oracle", False,
                               f"witness does not achieve value on instance {i}")
    return CheckResult("inner extremum vs LP oracle", worst <= 1e-9,
                       f"max |structured - LP| = {worst:.2e}")


def check_sandwich(n_instances: int = 30) -> CheckResult:
    gen = np.random.default_rng(31337)
    for i in range(n_instances):
        m = random_mdp(gen, int(gen.integers(2, 5)), int(gen.integers(1, 4)),
                       horizon=int(gen.integers(1, 5)), discount=float(gen.uniform(0.5, 1.0)))
        synth = synthesize_finite(m)
        params = PrivacyParams(k=10.0, beta=float(gen.uniform(0.0, 0.3)),
                               alpha=float(gen.uniform(0.0, 0.5)))
        bounds = bounds_finite(m, synth.policy, params)
        low = bounds.pessimistic.values
        upp = bounds.optimistic.values
        if np.any(low > synth.value.values + 1e-9) or np.any(synth.value.values > upp + 1e-9):
            return CheckResult("sandwich bound on random instances", False, f"instance {i}")
    return CheckResult("sandwich bound on random instances", True, "")


def check_degenerate_collapse(n_instances: int = 20) -> CheckResult:
    gen = np.random.default_rng(2718)
    worst = 0.0
    for _ in range(n_instances):
        m = random_mdp(gen, 3, 2, horizon=3, discount=1.0)
        synth = synthesize_finite(m)
        params = PrivacyParams(k=1.0, beta=0.0, alpha=0.0)
        bounds = bounds_finite(m, synth.policy, params)
        worst = max(worst, cost_of_privacy(bounds, m.states[0]))
        worst = max(worst, float(np.max(np.abs(bounds.pessimistic.values - synth.value.values))))
    ex1 = build_example1()
    synth = synthesize_finite(ex1)
    bounds = bounds_finite(ex1, synth.policy, PrivacyParams(k=1.0, beta=0.0, alpha=0.0))
    worst = max(worst, cost_of_privacy(bounds, "s0"))
    return CheckResult("alpha = beta = 0 collapse", worst <= 1e-9, f"max gap {worst:.2e}")


def check_alpha_monotonicity(n_instances: int = 20) -> CheckResult:
    gen = np.random.default_rng(4242)
    for i in range(n_instances):
        m = random_mdp(gen, 3, 2, horizon=3, discount=0.9)
        synth = synthesize_finite(m)
        a1, a2 = sorted(gen.uniform(0.0, 0.8, size=2))
        beta = float(gen.uniform(0.0, 0.5))
        b1 = bounds_finite(m, synth.policy, PrivacyParams(k=1.0, beta=beta, alpha=a1))
        b2 = bounds_finite(m, synth.policy, PrivacyParams(k=1.0, beta=beta, alpha=a2))
        if np.any(b1.pessimistic.values < b2.pessimistic.values - 1e-9):
            return CheckResult("bound monotonicity in alpha", False, f"instance {i} (lower)")
        if np.any(b1.optimistic.values > b2.optimistic.values + 1e-9):
            return CheckResult("bound monotonicity in alpha", False, f"instance {i} (upper)")
    return CheckResult("bound monotonicity in alpha", True, "")


def check_contraction(n_instances: int = 15) -> CheckResult:
    gen = np.random.default_rng(8686)
    worst_excess = -np.inf
    for i in range(n_instances):
        discount = float(gen.choice([0.5, 0.9, 0.99]))
        # Rewards scaled by (1 - gamma) keep values O(1), so gap ratios are
        # measured far above float noise.
        m = random_mdp(gen, 4, 2, horizon=None, discount=discount,
                       reward_scale=1.0 - discount)
        pi = random_stochastic_policy(gen, m)
        tol = 1e-5 * discount / (1.0 - discount)
        params = PrivacyParams.from_k(float(gen.uniform(2.0, 50.0)), 0.05)
        for direction in (MIN, MAX):
            _, gaps = robust_value_iteration(m, pi, params, tol, direction)
            g = np.asarray(gaps)
            if g.size > 1:
                worst_excess = max(worst_excess, float(np.max(g[1:] / g[:-1])) - discount)
        _, gaps = policy_value_iteration(m, pi, tol)
        g = np.asarray(gaps)
        if g.size > 1:
            worst_excess = max(worst_excess, float(np.max(g[1:] / g[:-1])) - discount)
        if worst_excess > 1e-9:
            return CheckResult("gamma-contraction of robust/nominal operators", False,
                               f"instance {i}: ratio excess {worst_excess:.2e}")
    return CheckResult("gamma-contraction of robust/nominal operators", True,
                       f"max ratio excess {worst_excess:.2e}")


def check_sweep_determinism() -> CheckResult:
    cfg = SweepConfig(source="builtin:example1", k_grid=(5.0, 50.0), beta=0.05,
                      trials=3, seed=11, smooth_floor=1e-6)
    h1 = determinism_hash(rows_to_csv(run_sweep(cfg)))
    h2 = determinism_hash(rows_to_csv(run_sweep(cfg)))
    return CheckResult("sweep determinism (repeated run)", h1 == h2, h1[:16])


def check_example1_pipeline() -> CheckResult:
    m = build_example1()
    synth = synthesize_finite(m)
    v0 = synth.value.at("s0")
    ok = abs(v0 - 0.9) < 1e-12
    v_eval = evaluate_policy_finite(m, synth.policy).at("s0")
    ok &= abs(v_eval - v0) < 1e-12
    return CheckResult("investment example optimum", bool(ok), f"V0(s0) = {v0}")


def run_validation(quick: bool = False) -> list[CheckResult]:
    n_draws = 20_000 if quick else 100_000
    return [
        check_alpha_bound(),
        check_example1_pipeline(),
        check_dirichlet_moments(n_draws=n_draws),
        check_concentration(n_draws=n_draws, dims=(3,) if quick else (3, 10)),
        check_inner_vs_lp(n_instances=60 if quick else 200),
        check_sandwich(n_instances=10 if quick else 30),
        check_degenerate_collapse(n_instances=5 if quick else 20),
        check_alpha_monotonicity(n_instances=5 if quick else 20),
        check_contraction(n_instances=4 if quick else 15),
        check_sweep_determinism(),
    ]
