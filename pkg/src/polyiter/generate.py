"""Seeded random instance families.

The generator is xoshiro256** seeded through splitmix64, so a seed and a
spec determine the output file byte for byte on any platform.

Families
--------
substochastic
    Every kernel row sums to at most ``lam`` (a quarter of them exactly).
state-discount
    Rows ``s * P`` with ``P`` stochastic and per-row factors chosen so that
    ``M psi <= rho_cap * psi`` for a hidden positive ``psi``; rows may sum
    above one but every policy pair has spectral radius at most ``rho_cap``.
renewal-mean
    Stochastic rows putting mass at least ``p_min`` on state ``c``, so the
    worst mean return time to ``c`` is at most ``1 / p_min``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .game import GameInstance, PayoffMode

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 1.0; the 256-bit state is filled from splitmix64(seed)."""

    def __init__(self, seed: int):
        sm = seed & MASK64
        self.s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            self.s.append(out)

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Double in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``[lo, hi]``."""
        return lo + int(self.uniform() * (hi - lo + 1))


class Family(str, Enum):
    SUBSTOCHASTIC = "substochastic"
    STATE_DISCOUNT = "state-discount"
    RENEWAL_MEAN = "renewal-mean"


@dataclass(frozen=True)
class GeneratorSpec:
    """``c`` is 0-based here; ``param`` is ``lam``, ``rho_cap`` or ``p_min``."""

    n: int
    a_max: int
    b_max: int
    seed: int
    family: Family
    param: float
    c: int = 0

    def __post_init__(self):
        if min(self.n, self.a_max, self.b_max) < 1:
            raise ValueError("n, a_max and b_max must be positive")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        fam = Family(self.family)
        if fam == Family.RENEWAL_MEAN:
            if not 0 < self.param <= 1:
                raise ValueError("p_min must lie in (0, 1]")
            if not 0 <= self.c < self.n:
                raise ValueError("renewal state out of range")
        elif not 0 < self.param < 1:
            raise ValueError("rate must lie in (0, 1)")


def _weights(rng: Xoshiro256, n: int) -> np.ndarray:
    w = np.array([0.0 if rng.uniform() < 0.4 else rng.uniform() for _ in range(n)])
    if w.sum() == 0.0:
        w[rng.randint(0, n - 1)] = 1.0
    return w / w.sum()


def _reward(rng: Xoshiro256) -> float:
    return round(20.0 * rng.uniform() - 10.0, 3)


def generate(spec: GeneratorSpec) -> GameInstance:
    rng = Xoshiro256(spec.seed)
    family = Family(spec.family)
    n = spec.n
    psi = np.array([math.exp(2.0 * rng.uniform() - 1.0) for _ in range(n)])
    rewards, kernels = [], []
    for i in range(n):
        n_a = rng.randint(1, spec.a_max)
        n_b = rng.randint(1, spec.b_max)
        r_i = np.empty((n_a, n_b))
        k_i = np.empty((n_a, n_b, n))
        for a in range(n_a):
            for b in range(n_b):
                r_i[a, b] = _reward(rng)
                p = _weights(rng, n)
                if family == Family.SUBSTOCHASTIC:
                    total = spec.param if rng.uniform() < 0.25 else spec.param * (0.5 + 0.5 * rng.uniform())
                    row = p * total
                elif family == Family.STATE_DISCOUNT:
                    t = 0.5 + 0.5 * rng.uniform()
                    row = p * (spec.param * t * psi[i] / float(p @ psi))
                else:
                    row = (1.0 - spec.param) * p
                    row[spec.c] += spec.param
                k_i[a, b] = row
        rewards.append(r_i)
        kernels.append(k_i)
    payoff = PayoffMode.MEAN if family == Family.RENEWAL_MEAN else PayoffMode.DISCOUNTED
    return GameInstance.from_arrays(rewards, kernels, payoff)
