"""Spectral quantities of rectangular families of nonnegative matrices.

A family is given by a finite set of admissible rows per state; its members
pick one row per state independently. The map ``fbar(v)_i = max_row row @ v``
is the upper envelope of the members, and its spectral radius equals the
largest spectral radius of a member.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    CombinatorialOverflow,
    Inconclusive,
    NoRenewalState,
    NonNegativeViolation,
    RadiusNotDominated,
    SingularSystem,
)
from .game import ROW_SUM_TOL, GameInstance, MinPolicy
from .linalg import affine_fixed_point, spectral_radius

DIVERGENCE = 1e12
MAX_POLICY_STEPS = 10**6
MEMBER_CAP = 10**6


class RadiusMode(str, Enum):
    ENUMERATE = "enumerate"
    BINARY_SEARCH = "binary-search"


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """Rectangular matrix family: ``rows[i]`` is a ``(k_i, n)`` array."""

    rows: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = len(self.rows)
        for i, r in enumerate(self.rows):
            if r.ndim != 2 or r.shape[0] == 0 or r.shape[1] != n:
                raise ValueError(f"rows[{i}] must be a nonempty (k, {n}) array")
            if np.any(r < 0):
                raise NonNegativeViolation(f"negative entry in rows[{i}]")

    @classmethod
    def from_rows(cls, rows) -> "MatrixFamily":
        """Build a family, dropping duplicate rows (first occurrence kept)."""
        out = []
        for r in rows:
            arr = np.atleast_2d(np.asarray(r, dtype=float))
            seen, keep = set(), []
            for row in arr:
                key = row.tobytes()
                if key not in seen:
                    seen.add(key)
                    keep.append(row)
            block = np.array(keep)
            block.setflags(write=False)
            out.append(block)
        return cls(tuple(out))

    @classmethod
    def single(cls, M) -> "MatrixFamily":
        M = np.asarray(M, dtype=float)
        return cls.from_rows([M[i:i + 1] for i in range(M.shape[0])])

    @property
    def n(self) -> int:
        return len(self.rows)

    def num_members(self) -> int:
        return math.prod(r.shape[0] for r in self.rows)

    def members(self):
        for choice in itertools.product(*(range(r.shape[0]) for r in self.rows)):
            yield self.member(choice)

    def member(self, choice) -> np.ndarray:
        return np.array([self.rows[i][c] for i, c in enumerate(choice)])

    def envelope(self, v) -> np.ndarray:
        """``fbar(v)``: the rowwise maximum over the family."""
        v = np.asarray(v, dtype=float)
        return np.array([float((r @ v).max()) for r in self.rows])

    def stopped(self, c: int) -> "MatrixFamily":
        """Same family with column ``c`` set to zero."""
        rows = []
        for r in self.rows:
            z = r.copy()
            z[:, c] = 0.0
            rows.append(z)
        return MatrixFamily.from_rows(rows)


@dataclass(frozen=True)
class ReturnTimeResult:
    """Worst-case mean first return times to a renewal state."""

    phi: np.ndarray
    K: float
    lam: float
    c: int


def family_from_instance(instance: GameInstance) -> MatrixFamily:
    return MatrixFamily.from_rows(
        [instance.state_arrays(i)[1].reshape(-1, instance.n) for i in range(instance.n)]
    )


def family_from_fixed_min(instance: GameInstance, sigma: MinPolicy) -> MatrixFamily:
    return MatrixFamily.from_rows([instance.state_arrays(i)[1][sigma[i]] for i in range(instance.n)])


def _envelope_fixed_point(family: MatrixFamily, scale: float) -> np.ndarray | None:
    """Solve ``phi = 1 + fbar(phi) / scale`` by policy iteration over rows.

    Returns ``None`` as soon as a visited member ``M`` has no solution
    ``phi >= 1`` of ``phi = 1 + M phi / scale``, which happens exactly when
    ``rho(M) >= scale``. When the iteration stops, ``fbar(phi) =
    scale * (phi - 1) < scale * phi``, so every member is dominated.
    """
    n = family.n
    ones = np.ones(n)
    choice = [0] * n
    for _ in range(MAX_POLICY_STEPS):
        M = family.member(choice) / scale
        try:
            phi = affine_fixed_point(M, ones)
        except SingularSystem:
            return None
        if not np.all(np.isfinite(phi)) or phi.min() < 0.5 or phi.max() > DIVERGENCE:
            return None
        changed = False
        for i, rows in enumerate(family.rows):
            vals = rows @ phi
            best = float(vals.max())
            if vals[choice[i]] >= best - 1e-12 * max(1.0, abs(best)):
                continue
            choice[i] = int(np.argmax(vals))
            changed = True
        if not changed:
            return phi
    raise Inconclusive("row policy iteration did not terminate")


def dominates(family: MatrixFamily, lam: float) -> bool:
    """Whether every member of ``family`` has spectral radius below ``lam``."""
    return lam > 0 and _envelope_fixed_point(family, lam) is not None


def hull_spectral_radius(
    family: MatrixFamily, mode: RadiusMode | str = RadiusMode.BINARY_SEARCH, width: float = 1e-8
) -> float:
    """Largest spectral radius over the members of ``family``.

    ``enumerate`` evaluates every member; ``binary-search`` bisects on the
    rate ``lam``, deciding ``omega < lam`` by trying to solve
    ``phi = 1 + fbar(phi) / lam``.
    """
    mode = RadiusMode(mode)
    if mode == RadiusMode.ENUMERATE:
        count = family.num_members()
        if count > MEMBER_CAP:
            raise CombinatorialOverflow(f"{count} members exceed the cap {MEMBER_CAP}")
        return max(spectral_radius(M) for M in family.members())
    hi = max(float(r.sum(axis=1).max()) for r in family.rows)
    if hi == 0.0:
        return 0.0
    lo = 0.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if not dominates(family, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def collatz_wielandt_vector(family: MatrixFamily, lam: float) -> np.ndarray:
    """Positive ``phi >= 1`` with ``fbar(phi) = lam * (phi - 1)``.

    Such a vector certifies ``fbar(phi) <= lam * phi`` and therefore that
    every member has spectral radius below ``lam``.

    Raises
    ------
    RadiusNotDominated
        If ``lam`` does not exceed the hull spectral radius.
    """
    if lam <= 0:
        raise RadiusNotDominated("rate must be positive")
    phi = _envelope_fixed_point(family, lam)
    if phi is None:
        raise RadiusNotDominated(f"rate {lam} does not dominate the hull spectral radius")
    return phi


def mean_return_times(family: MatrixFamily, c: int) -> ReturnTimeResult:
    """Worst-case expected first return times to state ``c``.

    Solves ``phi = 1 + max_M M_(c) phi`` where ``M_(c)`` is ``M`` with
    column ``c`` zeroed. ``phi[c]`` is the worst return time from ``c``
    itself and ``K = max(phi)``.

    Raises
    ------
    NoRenewalState
        If some member has a final class that avoids ``c``.
    """
    if not 0 <= c < family.n:
        raise IndexError(f"state {c} out of range")
    for i, r in enumerate(family.rows):
        if np.any(np.abs(r.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValueError(f"rows[{i}] are not stochastic")
    phi = _envelope_fixed_point(family.stopped(c), 1.0)
    if phi is None:
        raise NoRenewalState(f"state {c + 1} is not reachable from every state under every member")
    K = float(phi.max())
    return ReturnTimeResult(phi, K, (K - 1.0) / K, c)
