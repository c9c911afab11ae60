"""Game data model, validation and combinatorial counts.

States, min-actions and max-actions are 0-based positions in this module.
A min policy is a tuple ``sigma`` with ``sigma[i]`` an index into the
min-actions of state ``i``; a max policy is a tuple of tuples with
``delta[i][a]`` an index into the max-actions of state ``i``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CombinatorialOverflow, InvalidInstance

MinPolicy = tuple[int, ...]
MaxPolicy = tuple[tuple[int, ...], ...]

ROW_SUM_TOL = 1e-9
DEFAULT_ENUM_CAP = 10**7


def enum_cap() -> int:
    """Enumeration cap, overridable through ``POLYITER_ENUM_CAP``."""
    raw = os.environ.get("POLYITER_ENUM_CAP")
    return int(raw) if raw else DEFAULT_ENUM_CAP


class PayoffMode(str, Enum):
    DISCOUNTED = "discounted"
    MEAN = "mean"


@dataclass(frozen=True, eq=False)
class GameInstance:
    """A finite perfect-information zero-sum stochastic game.

    ``rewards[i][a]`` has shape ``(|B|,)`` and ``kernels[i][a]`` has shape
    ``(|B|, n)``; row ``kernels[i][a][b]`` holds the unnormalized transition
    weights (discount times probability) out of state ``i``.
    Max-action lists are stored per ``(i, a)`` so that files round-trip;
    :func:`validate` checks they agree across ``a``.
    """

    n: int
    payoff: PayoffMode
    min_actions: tuple[tuple[str, ...], ...]
    max_actions: tuple[tuple[tuple[str, ...], ...], ...]
    rewards: tuple[tuple[np.ndarray, ...], ...] = field(repr=False)
    kernels: tuple[tuple[np.ndarray, ...], ...] = field(repr=False)

    @classmethod
    def from_arrays(
        cls,
        rewards: Sequence,
        kernels: Sequence,
        payoff: PayoffMode | str = PayoffMode.DISCOUNTED,
        min_names=None,
        max_names=None,
    ) -> "GameInstance":
        """Build an instance from per-state arrays.

        ``rewards[i]`` is ``(|A_i|, |B_i|)`` and ``kernels[i]`` is
        ``(|A_i|, |B_i|, n)``. Names default to ``a1, a2, ...`` and
        ``b1, b2, ...``.
        """
        n = len(rewards)
        rew, ker, mins, maxs = [], [], [], []
        for i in range(n):
            r_i = np.asarray(rewards[i], dtype=float)
            k_i = np.asarray(kernels[i], dtype=float)
            if r_i.ndim != 2 or k_i.shape != r_i.shape + (n,):
                raise ValueError(f"state {i}: expected rewards (A,B) and kernels (A,B,{n})")
            n_a, n_b = r_i.shape
            mins.append(tuple(min_names[i]) if min_names else tuple(f"a{a + 1}" for a in range(n_a)))
            b_names = tuple(max_names[i]) if max_names else tuple(f"b{b + 1}" for b in range(n_b))
            maxs.append(tuple(b_names for _ in range(n_a)))
            rew.append(tuple(_frozen(r_i[a]) for a in range(n_a)))
            ker.append(tuple(_frozen(k_i[a]) for a in range(n_a)))
        return cls(n, PayoffMode(payoff), tuple(mins), tuple(maxs), tuple(rew), tuple(ker))

    def replace_data(self, rewards, kernels, payoff=None) -> "GameInstance":
        """Same action structure, new numbers (nested like ``self.rewards``)."""
        rew = tuple(tuple(_frozen(np.asarray(x, dtype=float)) for x in row) for row in rewards)
        ker = tuple(tuple(_frozen(np.asarray(x, dtype=float)) for x in row) for row in kernels)
        return GameInstance(
            self.n,
            PayoffMode(payoff) if payoff is not None else self.payoff,
            self.min_actions,
            self.max_actions,
            rew,
            ker,
        )

    def num_min_actions(self, i: int) -> int:
        return len(self.min_actions[i])

    def num_max_actions(self, i: int) -> int:
        return len(self.max_actions[i][0])

    @cached_property
    def _stacked(self):
        out = []
        for i in range(self.n):
            sizes = {len(r) for r in self.rewards[i]}
            if len(sizes) != 1:
                raise InvalidInstance(validate(self))
            out.append((_frozen(np.stack(self.rewards[i])), _frozen(np.stack(self.kernels[i]))))
        return tuple(out)

    def state_arrays(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Rewards ``(|A_i|, |B_i|)`` and kernel rows ``(|A_i|, |B_i|, n)`` of state ``i``."""
        return self._stacked[i]

    def all_rows(self):
        """Yield ``(i, a, b, row, reward)`` over every action triple."""
        for i in range(self.n):
            for a, (rs, ks) in enumerate(zip(self.rewards[i], self.kernels[i])):
                for b in range(len(rs)):
                    yield i, a, b, ks[b], float(rs[b])

    def max_row_sum(self) -> float:
        return max(float(np.sum(row)) for _, _, _, row, _ in self.all_rows())


def _frozen(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    state: int | None = None
    min_action: int | None = None
    max_action: int | None = None

    def __str__(self):
        coords = [c for c in (self.state, self.min_action, self.max_action) if c is not None]
        where = f" at {tuple(c + 1 for c in coords)}" if coords else ""
        return f"{self.kind}: {self.message}{where}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "OK"
        return "\n".join(str(v) for v in self.violations)


def validate(instance: GameInstance) -> ValidationReport:
    """Report every violated structural invariant of ``instance``.

    Coordinates in the messages are 1-based (state, min-action, max-action).
    """
    out: list[Violation] = []
    n = instance.n
    if n < 1:
        out.append(Violation("empty", "instance must have at least one state"))
    if len(instance.min_actions) != n:
        out.append(Violation("shape", f"expected {n} states, got {len(instance.min_actions)}"))
        return ValidationReport(tuple(out))
    mean = instance.payoff == PayoffMode.MEAN
    for i in range(n):
        if not instance.min_actions[i]:
            out.append(Violation("empty", "state has no min-actions", i))
            continue
        first = instance.max_actions[i][0]
        for a in range(len(instance.min_actions[i])):
            names = instance.max_actions[i][a]
            if not names:
                out.append(Violation("empty", "min-action has no max-actions", i, a))
                continue
            if names != first:
                out.append(Violation("ragged", "max-action list differs from the state's first list", i, a))
            rs, ks = instance.rewards[i][a], instance.kernels[i][a]
            for b in range(len(names)):
                row = ks[b]
                if not np.isfinite(rs[b]) or not np.all(np.isfinite(row)):
                    out.append(Violation("non-finite", "reward or kernel entry is not finite", i, a, b))
                    continue
                if np.any(row < 0):
                    out.append(Violation("negative", "negative kernel entry", i, a, b))
                if mean and abs(float(np.sum(row)) - 1.0) > ROW_SUM_TOL:
                    out.append(
                        Violation("row-sum", f"row sum {float(np.sum(row))!r} != 1", i, a, b)
                    )
    return ValidationReport(tuple(out))


def check_valid(instance: GameInstance) -> None:
    report = validate(instance)
    if not report.ok:
        raise InvalidInstance(report)


def count_m1(instance: GameInstance) -> int:
    """Number of (state, min-action) pairs."""
    return sum(len(a) for a in instance.min_actions)


def count_m(instance: GameInstance) -> int:
    """Number of (state, min-action, max-action) triples."""
    return sum(len(b) for per_state in instance.max_actions for b in per_state)


def count_min_policies(instance: GameInstance) -> int:
    return math.prod(len(a) for a in instance.min_actions)


def count_max_policies(instance: GameInstance) -> int:
    return math.prod(
        instance.num_max_actions(i) ** instance.num_min_actions(i) for i in range(instance.n)
    )


def _guard(count: int, cap: int | None) -> None:
    cap = enum_cap() if cap is None else cap
    if count > cap:
        raise CombinatorialOverflow(f"{count} policies exceed the enumeration cap {cap}")


def enumerate_min_policies(instance: GameInstance, cap: int | None = None) -> list[MinPolicy]:
    """All min policies in lexicographic order (state-major)."""
    _guard(count_min_policies(instance), cap)
    return list(itertools.product(*(range(len(a)) for a in instance.min_actions)))


def enumerate_max_policies(instance: GameInstance, cap: int | None = None) -> list[MaxPolicy]:
    """All max policies in lexicographic order over ``(i, a)`` pairs."""
    _guard(count_max_policies(instance), cap)
    shape = [instance.num_min_actions(i) for i in range(instance.n)]
    ranges = [
        range(instance.num_max_actions(i)) for i in range(instance.n) for _ in range(shape[i])
    ]
    out = []
    for flat in itertools.product(*ranges):
        policy, pos = [], 0
        for size in shape:
            policy.append(tuple(flat[pos:pos + size]))
            pos += size
        out.append(tuple(policy))
    return out


def first_min_policy(instance: GameInstance) -> MinPolicy:
    return (0,) * instance.n


def first_max_policy(instance: GameInstance) -> MaxPolicy:
    return tuple((0,) * instance.num_min_actions(i) for i in range(instance.n))
