"""Brute-force baselines for validating solver output on small instances.

Nothing here uses the policy-improvement code: values come from enumerating
every policy pair and solving its linear system in a batch.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import CombinatorialOverflow, MultichainDetected, SingularSystem
from .game import GameInstance, check_valid, enum_cap, enumerate_min_policies
from .linalg import EigenPair, additive_eigenpair
from .shapley import eval_operator


def _pair_count(instance: GameInstance) -> int:
    return math.prod(
        instance.num_min_actions(i) * instance.num_max_actions(i) for i in range(instance.n)
    )


def _responses(instance: GameInstance, sigma):
    """Batched matrices and offsets for every max response to ``sigma``."""
    n = instance.n
    idx = np.array(list(itertools.product(*(range(instance.num_max_actions(i)) for i in range(n)))))
    M = np.empty((len(idx), n, n))
    r = np.empty((len(idx), n))
    for i in range(n):
        rewards, kernel = instance.state_arrays(i)
        M[:, i, :] = kernel[sigma[i]][idx[:, i]]
        r[:, i] = rewards[sigma[i]][idx[:, i]]
    return idx, M, r


def _check_cap(instance: GameInstance, cap: int | None):
    cap = enum_cap() if cap is None else cap
    count = _pair_count(instance)
    if count > cap:
        raise CombinatorialOverflow(f"{count} policy pairs exceed the enumeration cap {cap}")


def brute_force_discounted(instance: GameInstance, cap: int | None = None) -> np.ndarray:
    """``min_sigma max_delta (I - M)^{-1} r`` taken coordinatewise."""
    check_valid(instance)
    _check_cap(instance, cap)
    n = instance.n
    best = None
    for sigma in enumerate_min_policies(instance, cap):
        _, M, r = _responses(instance, sigma)
        values = np.linalg.solve(np.eye(n)[None] - M, r[..., None])[..., 0]
        worst = values.max(axis=0)
        best = worst if best is None else np.minimum(best, worst)
    return best


def brute_force_mean(instance: GameInstance, c: int, cap: int | None = None) -> EigenPair:
    """``min_sigma max_delta`` of the mean payoff of each policy pair.

    The bias is the one of the pair attaining the min-max.
    """
    check_valid(instance)
    _check_cap(instance, cap)
    n = instance.n
    best_eta, best_pair = math.inf, None
    for sigma in enumerate_min_policies(instance, cap):
        idx, M, r = _responses(instance, sigma)
        A = np.zeros((len(idx), n + 1, n + 1))
        A[:, :n, :n] = np.eye(n)[None] - M
        A[:, :n, n] = 1.0
        A[:, n, c] = 1.0
        rhs = np.concatenate([r, np.zeros((len(idx), 1))], axis=1)
        try:
            etas = np.linalg.solve(A, rhs[..., None])[:, n, 0]
        except np.linalg.LinAlgError:
            for k in range(len(idx)):
                additive_eigenpair(M[k], r[k], c)
            raise MultichainDetected("singular policy pair") from None
        k = int(np.argmax(etas))
        if etas[k] < best_eta:
            best_eta, best_pair = float(etas[k]), (M[k], r[k])
    pair = additive_eigenpair(best_pair[0], best_pair[1], c)
    return EigenPair(best_eta, pair.bias, c)


def value_iteration(instance: GameInstance, v0, steps: int) -> np.ndarray:
    """Apply the Shapley operator ``steps`` times starting from ``v0``."""
    v = np.array(v0, dtype=float)
    for _ in range(steps):
        v = eval_operator(instance, v)
    return v


def brute_force_return_time(M, c: int) -> np.ndarray:
    """Mean first passage times to ``c``: solve ``(I - M_(c)) phi = 1``."""
    M = np.array(M, dtype=float)
    M[:, c] = 0.0
    A = np.eye(len(M)) - M
    if np.linalg.cond(A) > 1e12:
        raise SingularSystem(f"state {c + 1} is not reached from every state")
    return np.linalg.solve(A, np.ones(len(M)))


def characteristic_polynomial(M) -> np.ndarray:
    """Coefficients (highest degree first) by the Faddeev-LeVerrier recursion."""
    A = np.asarray(M, dtype=float)
    n = len(A)
    coeffs = [1.0]
    B = np.zeros_like(A)
    for k in range(1, n + 1):
        B = A @ B + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ B) / k)
    return np.array(coeffs)


def charpoly_spectral_radius(M) -> float:
    if len(M) == 0:
        return 0.0
    roots = np.roots(characteristic_polynomial(M))
    return float(np.abs(roots).max()) if len(roots) else 0.0


def eig_spectral_radius(M) -> float:
    return float(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float))).max())
