"""JSON serialization of MDP models.

Schema: {"states": [...], "actions": {state: [...]},
         "rewards": {"s|a": x}, "kernel": {"s|a": [...]},
         "horizon": {"finite": T} | "infinite", "discount": g,
         "terminal": {state: x}}  (terminal present for finite horizons only)

Floats are emitted by shortest round-trip repr, so load(save(m)) reproduces
every probability bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

from .mdp import InvalidModelError, Mdp, make_mdp


def _sa_key(state: str, action: str) -> str:
    return f"{state}|{action}"


def mdp_to_dict(m: Mdp) -> dict:
    for name in m.states + tuple(a for acts in m.actions for a in acts):
        if "|" in name:
            raise InvalidModelError(f"name {name!r} contains '|', reserved by the file format")
    doc: dict = {
        "states": list(m.states),
        "actions": {s: list(m.actions[i]) for i, s in enumerate(m.states)},
        "rewards": {
            _sa_key(m.states[s], m.actions[s][a]): float(m.rewards[s][a])
            for s, a in m.sa_pairs()
        },
        "kernel": {
            _sa_key(m.states[s], m.actions[s][a]): [float(x) for x in m.kernel[s][a]]
            for s, a in m.sa_pairs()
        },
        "horizon": {"finite": m.horizon} if m.horizon is not None else "infinite",
        "discount": m.discount,
    }
    if m.horizon is not None:
        doc["terminal"] = {s: float(m.terminal[i]) for i, s in enumerate(m.states)}
    return doc


def mdp_from_dict(doc: dict) -> Mdp:
    try:
        states = list(doc["states"])
        actions = {s: list(a) for s, a in doc["actions"].items()}
        horizon_field = doc["horizon"]
        discount = float(doc["discount"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvalidModelError(f"malformed MDP document: {exc}") from exc

    if horizon_field == "infinite":
        horizon = None
    elif isinstance(horizon_field, dict) and "finite" in horizon_field:
        horizon = int(horizon_field["finite"])
    else:
        raise InvalidModelError(f"malformed horizon field {horizon_field!r}")

    def split(table: dict, what: str) -> dict:
        out = {}
        for key, value in table.items():
            if "|" not in key:
                raise InvalidModelError(f"{what} key {key!r} is not 's|a'")
            s, a = key.split("|", 1)
            out[(s, a)] = value
        return out

    rewards = split(doc.get("rewards", {}), "rewards")
    kernel = split(doc.get("kernel", {}), "kernel")
    terminal = doc.get("terminal")
    return make_mdp(states, actions, rewards, kernel, horizon, discount, terminal)


def save_mdp(m: Mdp, path) -> None:
    Path(path).write_text(json.dumps(mdp_to_dict(m), indent=2) + "\n")


def load_mdp(path) -> Mdp:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"{path}: not valid JSON ({exc})") from exc
    return mdp_from_dict(doc)
