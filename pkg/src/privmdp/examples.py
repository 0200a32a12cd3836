"""Built-in benchmark MDPs for the experiment sweeps."""

from __future__ import annotations

import numpy as np

from .mdp import Mdp, make_mdp
from .privacy import gamma_draws

# The investment model: one decision state and four candidate startups whose
# acquisition either hits (+1 terminal) or misses (0). Horizon 1, undiscounted.
_HIT_PROBS = (0.9, 0.2, 0.8, 0.3)

EXAMPLE2_FLOOR = 1e-3


def build_example1() -> Mdp:
    """Three-state investment MDP. The outcome states carry a single parked
    action with a uniform row; at horizon 1 those rows never influence values
    at s0, but they keep every row interior for the Dirichlet mechanism."""
    states = ["s0", "Hit", "Miss"]
    actions = {
        "s0": [f"startup{i}" for i in range(1, 5)],
        "Hit": ["hold"],
        "Miss": ["hold"],
    }
    rewards = {(s, a): 0.0 for s in states for a in actions[s]}
    kernel = {}
    for i, hit in enumerate(_HIT_PROBS, start=1):
        kernel[("s0", f"startup{i}")] = [0.0, hit, 1.0 - hit]
    uniform = [1.0 / 3.0] * 3
    kernel[("Hit", "hold")] = uniform
    kernel[("Miss", "hold")] = uniform
    terminal = {"s0": 0.0, "Hit": 1.0, "Miss": 0.0}
    return make_mdp(states, actions, rewards, kernel, horizon=1, discount=1.0,
                    terminal=terminal)


def build_example2(seed: int, n_states: int = 20, n_actions: int = 5,
                   horizon: int = 10) -> Mdp:
    """Random benchmark MDP, fully determined by `seed`.

    Kernel rows are flat-Dirichlet draws floored at EXAMPLE2_FLOOR and
    renormalized so the Dirichlet mechanism's interiority requirement holds;
    rewards and terminal rewards are uniform on [0, 1]. The size arguments
    default to the benchmark shape and exist for the runtime-scaling probe.
    """
    gen = np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(seed)))
    states = [f"s{i:02d}" for i in range(n_states)]
    action_names = [f"a{j}" for j in range(n_actions)]
    actions = {s: list(action_names) for s in states}
    kernel = {}
    rewards = {}
    for s in states:
        for a in action_names:
            row = gamma_draws(np.ones(n_states), gen)
            row = row / row.sum()
            row = np.maximum(row, EXAMPLE2_FLOOR)
            kernel[(s, a)] = row / row.sum()
            rewards[(s, a)] = float(gen.random())
    terminal = {s: float(gen.random()) for s in states}
    return make_mdp(states, actions, rewards, kernel, horizon=horizon, discount=1.0,
                    terminal=terminal)
