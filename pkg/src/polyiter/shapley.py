"""Shapley operator, its policy restrictions, and policy improvement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameInstance, MaxPolicy, MinPolicy


@dataclass(frozen=True)
class ImprovementConfig:
    """Tie handling for policy improvement.

    An action within ``tie_tolerance`` of the coordinate optimum counts as
    optimal. With ``relative=True`` the slack is
    ``tie_tolerance * max(1, |best|)``, which keeps decisions stable under
    a positive diagonal rescaling of the operator.
    """

    tie_tolerance: float = 1e-9
    conservative: bool = True
    relative: bool = False

    def __post_init__(self):
        if self.tie_tolerance < 0:
            raise ValueError("tie_tolerance must be nonnegative")

    def slack(self, best: float) -> float:
        if self.relative:
            return self.tie_tolerance * max(1.0, abs(best))
        return self.tie_tolerance


def state_values(instance: GameInstance, v: np.ndarray, i: int) -> np.ndarray:
    """All ``F[v](i, a, b)`` at state ``i`` as an ``(|A_i|, |B_i|)`` array."""
    rewards, kernel = instance.state_arrays(i)
    return kernel @ v + rewards


def eval_triple(instance: GameInstance, v, i: int, a: int, b: int) -> float:
    _check_index(instance, i, a, b)
    return float(state_values(instance, np.asarray(v, dtype=float), i)[a, b])


def eval_max(instance: GameInstance, v, i: int, a: int) -> tuple[float, int]:
    """Best response value at ``(i, a)`` and the smallest maximizing index."""
    _check_index(instance, i, a)
    vals = state_values(instance, np.asarray(v, dtype=float), i)[a]
    b = int(np.argmax(vals))
    return float(vals[b]), b


def eval_operator(instance: GameInstance, v) -> np.ndarray:
    """Apply the Shapley operator: ``min_a max_b (M^{ab} v + r^{ab})`` per state."""
    v = np.asarray(v, dtype=float)
    return np.array([state_values(instance, v, i).max(axis=1).min() for i in range(instance.n)])


def eval_policy_min(instance: GameInstance, sigma: MinPolicy, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.array([state_values(instance, v, i)[sigma[i]].max() for i in range(instance.n)])


def eval_policy_pair(instance: GameInstance, sigma: MinPolicy, delta: MaxPolicy, v) -> np.ndarray:
    M, r = policy_pair_matrix(instance, sigma, delta)
    return M @ np.asarray(v, dtype=float) + r


def policy_pair_matrix(
    instance: GameInstance, sigma: MinPolicy, delta: MaxPolicy
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and offset of the affine map fixed by a policy pair."""
    rows, offs = [], []
    for i in range(instance.n):
        a = sigma[i]
        b = delta[i][a]
        rows.append(instance.kernels[i][a][b])
        offs.append(instance.rewards[i][a][b])
    return np.array(rows, dtype=float), np.array(offs, dtype=float)


def improve_min(
    instance: GameInstance, v, current: MinPolicy, cfg: ImprovementConfig = ImprovementConfig()
) -> MinPolicy:
    """Conservative min-player improvement at ``v``.

    The current action is kept wherever it is optimal up to the tie slack;
    elsewhere the smallest optimal index is chosen.
    """
    v = np.asarray(v, dtype=float)
    out = []
    for i in range(instance.n):
        vals = state_values(instance, v, i).max(axis=1)
        threshold = vals.min() + cfg.slack(float(vals.min()))
        cur = current[i]
        if cfg.conservative and vals[cur] <= threshold:
            out.append(cur)
        else:
            out.append(int(np.flatnonzero(vals <= threshold)[0]))
    return tuple(out)


def improve_max(
    instance: GameInstance,
    sigma: MinPolicy | None,
    v,
    current: MaxPolicy,
    cfg: ImprovementConfig = ImprovementConfig(),
) -> MaxPolicy:
    """Conservative max-player improvement at ``v``.

    Only the entries ``(i, sigma[i])`` are revised when ``sigma`` is given;
    with ``sigma=None`` every ``(i, a)`` entry is revised.
    """
    v = np.asarray(v, dtype=float)
    out = []
    for i in range(instance.n):
        table = state_values(instance, v, i)
        row = list(current[i])
        targets = range(len(row)) if sigma is None else (sigma[i],)
        for a in targets:
            vals = table[a]
            best = float(vals.max())
            threshold = best - cfg.slack(best)
            if cfg.conservative and vals[row[a]] >= threshold:
                continue
            row[a] = int(np.flatnonzero(vals >= threshold)[0])
        out.append(tuple(row))
    return tuple(out)


def _check_index(instance: GameInstance, i: int, a: int | None = None, b: int | None = None):
    if not 0 <= i < instance.n:
        raise IndexError(f"state {i} out of range")
    if a is not None and not 0 <= a < instance.num_min_actions(i):
        raise IndexError(f"min-action {a} out of range at state {i}")
    if b is not None and not 0 <= b < instance.num_max_actions(i):
        raise IndexError(f"max-action {b} out of range at state {i}")
