"""JSON instance format.

::

    {"n": 2, "payoff": "discounted" | "mean",
     "states": [{"min_actions": [{"name": "a1",
                 "max_actions": [{"name": "b1", "reward": 1.0,
                                  "row": [0.5, 0.25]}]}]}]}

States appear in index order; ``row[y]`` is the kernel weight towards state
``y``. Floats are written with the shortest repr that round-trips.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InstanceFormatError
from .game import ROW_SUM_TOL, GameInstance, PayoffMode


def instance_from_dict(data: dict) -> GameInstance:
    """Parse the JSON object of an instance.

    Under the mean payoff criterion, rows whose sum is within ``1e-9`` of one
    are divided by their sum; rows further off are kept so that validation
    can report them.
    """
    try:
        n = data["n"]
        payoff = PayoffMode(data["payoff"])
        states = data["states"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise InstanceFormatError("'n' must be an integer")
        if len(states) != n:
            raise InstanceFormatError(f"'states' has {len(states)} entries, expected {n}")
        mins, maxs, rews, kers = [], [], [], []
        for i, state in enumerate(states):
            s_min, s_max, s_rew, s_ker = [], [], [], []
            for act in state["min_actions"]:
                s_min.append(str(act["name"]))
                names, rew, rows = [], [], []
                for resp in act["max_actions"]:
                    row = [float(x) for x in resp["row"]]
                    if len(row) != n:
                        raise InstanceFormatError(
                            f"state {i + 1}, action {act['name']!r}: row has {len(row)} entries, expected {n}"
                        )
                    names.append(str(resp["name"]))
                    rew.append(float(resp["reward"]))
                    rows.append(row)
                kernel = np.array(rows, dtype=float).reshape(len(rows), n)
                if payoff == PayoffMode.MEAN:
                    kernel = _renormalize(kernel)
                s_max.append(tuple(names))
                s_rew.append(np.array(rew, dtype=float))
                s_ker.append(kernel)
            mins.append(tuple(s_min))
            maxs.append(tuple(s_max))
            rews.append(s_rew)
            kers.append(s_ker)
    except InstanceFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed instance: {exc!r}") from exc
    skeleton = GameInstance(n, payoff, tuple(mins), tuple(maxs), (), ())
    return skeleton.replace_data(rews, kers)


def _renormalize(kernel: np.ndarray) -> np.ndarray:
    out = kernel.copy()
    for b, row in enumerate(kernel):
        s = row.sum()
        if abs(s - 1.0) <= ROW_SUM_TOL and s != 1.0:
            out[b] = row / s
    return out


def instance_to_dict(instance: GameInstance) -> dict:
    states = []
    for i in range(instance.n):
        acts = []
        for a, name in enumerate(instance.min_actions[i]):
            resp = [
                {
                    "name": b_name,
                    "reward": float(instance.rewards[i][a][b]),
                    "row": [float(x) for x in instance.kernels[i][a][b]],
                }
                for b, b_name in enumerate(instance.max_actions[i][a])
            ]
            acts.append({"name": name, "max_actions": resp})
        states.append({"min_actions": acts})
    return {"n": instance.n, "payoff": instance.payoff.value, "states": states}


def dumps_instance(instance: GameInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1) + "\n"


def loads_instance(text: str) -> GameInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("instance must be a JSON object")
    return instance_from_dict(data)


def load_instance(path) -> GameInstance:
    return loads_instance(Path(path).read_text())


def save_instance(instance: GameInstance, path) -> None:
    Path(path).write_text(dumps_instance(instance))
