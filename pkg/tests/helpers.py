"""Small hand-built instances shared by the test modules."""

import numpy as np

from polyiter.game import GameInstance, PayoffMode


def one_state_game() -> GameInstance:
    # a1: reward 3, weight 0.5; a2: reward 1, weight 0.9; one max action each
    return GameInstance.from_arrays([[[3.0], [1.0]]], [[[[0.5]], [[0.9]]]])


def swap_mean_game() -> GameInstance:
    # M = [[0, 1], [1, 0]], r = (0, 2)
    return GameInstance.from_arrays(
        [[[0.0]], [[2.0]]], [[[[0.0, 1.0]]], [[[1.0, 0.0]]]], PayoffMode.MEAN
    )


def return_time_game() -> GameInstance:
    # M = [[0.5, 0.5], [1, 0]], r = (1, 0)
    return GameInstance.from_arrays(
        [[[1.0]], [[0.0]]], [[[[0.5, 0.5]]], [[[1.0, 0.0]]]], PayoffMode.MEAN
    )


def single_pair(M, r, payoff=PayoffMode.DISCOUNTED) -> GameInstance:
    M = np.asarray(M, dtype=float)
    r = np.asarray(r, dtype=float)
    n = len(r)
    return GameInstance.from_arrays(
        [[[r[i]]] for i in range(n)], [[[M[i]]] for i in range(n)], payoff
    )


def random_instance(rng: np.random.Generator, n: int, a_max=3, b_max=3, lam=0.9, payoff="discounted"):
    """Random instance with row sums at most ``lam`` (or exactly 1 for mean payoff)."""
    rewards, kernels = [], []
    for _ in range(n):
        n_a, n_b = rng.integers(1, a_max + 1), rng.integers(1, b_max + 1)
        rewards.append(np.round(rng.uniform(-5, 5, (n_a, n_b)), 2))
        k = rng.random((n_a, n_b, n)) * (rng.random((n_a, n_b, n)) < 0.7) + 1e-3
        k /= k.sum(axis=2, keepdims=True)
        if payoff == "discounted":
            k *= lam * rng.uniform(0.5, 1.0, (n_a, n_b, 1))
        kernels.append(k)
    return GameInstance.from_arrays(rewards, kernels, payoff)
