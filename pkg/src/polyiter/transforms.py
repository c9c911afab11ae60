"""Diagonal scaling and the mean-payoff to discounted reduction.

Both transforms materialize a new :class:`GameInstance`, so the unmodified
solver runs on the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonPositivePhi, PhiCertificateViolated
from .game import GameInstance, PayoffMode
from .linalg import EigenPair

CERT_TOL = 1e-9


class TransformKind(str, Enum):
    SCALING = "scaling"
    MEAN = "mean"


@dataclass(frozen=True)
class TransformRecord:
    kind: TransformKind
    phi: np.ndarray
    lam: float
    c: int | None = None

    def to_dict(self) -> dict:
        """Sidecar JSON object (state index ``c`` written 1-based)."""
        out = {"transform": self.kind.value, "phi": [float(x) for x in self.phi], "lambda": float(self.lam)}
        if self.c is not None:
            out["c"] = self.c + 1
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TransformRecord":
        c = data.get("c")
        return cls(
            TransformKind(data["transform"]),
            np.asarray(data["phi"], dtype=float),
            float(data["lambda"]),
            None if c is None else int(c) - 1,
        )


@dataclass(frozen=True)
class CertResult:
    passed: bool
    worst_sum: float
    worst: tuple[int, int, int] | None


def _positive_phi(instance: GameInstance, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (instance.n,):
        raise ValueError(f"phi must have length {instance.n}")
    if not np.all(np.isfinite(phi)) or np.any(phi <= 0):
        raise NonPositivePhi("phi must have strictly positive entries")
    return phi


def scale_instance(instance: GameInstance, phi) -> GameInstance:
    """Instance whose Shapley operator is ``w -> f(phi * w) / phi``.

    Kernel entries become ``M[i, y] * phi[y] / phi[i]`` and rewards
    ``r[i] / phi[i]``. The result is labelled discounted, since the rows
    are no longer stochastic in general.
    """
    phi = _positive_phi(instance, phi)
    rewards, kernels = [], []
    for i in range(instance.n):
        rewards.append([r / phi[i] for r in instance.rewards[i]])
        kernels.append([k * phi[None, :] / phi[i] for k in instance.kernels[i]])
    return instance.replace_data(rewards, kernels, payoff=PayoffMode.DISCOUNTED)


def stopped_replacement_row(row: np.ndarray, i: int, c: int, phi: np.ndarray) -> np.ndarray:
    """Row ``i`` of ``M_(c, phi)``: column ``c`` replaced by ``(phi - 1 - M_(c) phi)[i] / phi[c]``."""
    stopped = row.copy()
    stopped[c] = 0.0
    value = (phi[i] - 1.0 - float(stopped @ phi)) / phi[c]
    if value < -CERT_TOL:
        raise PhiCertificateViolated(
            f"phi[{i}] = {phi[i]!r} < 1 + (M_(c) phi)[{i}] = {1.0 + float(stopped @ phi)!r}"
        )
    stopped[c] = max(value, 0.0)
    return stopped


def mean_to_discounted(instance: GameInstance, c: int, phi) -> GameInstance:
    """Contracting discounted instance equivalent to a mean-payoff instance.

    For every action triple the kernel row ``m`` is replaced by
    ``m'[y] = m_(c, phi)[y] * phi[y] / phi[i]`` and the reward by
    ``r / phi[i]``. A fixed point ``w`` of the result corresponds to the
    eigenpair ``eta = w[c]``, ``bias = phi * (w - w[c])`` of the original.

    Raises
    ------
    PhiCertificateViolated
        If ``phi < 1 + M_(c) phi`` fails for some row by more than 1e-9.
    """
    phi = _positive_phi(instance, phi)
    if not 0 <= c < instance.n:
        raise IndexError(f"state {c} out of range")
    rewards, kernels = [], []
    for i in range(instance.n):
        rewards.append([r / phi[i] for r in instance.rewards[i]])
        state_kernels = []
        for k in instance.kernels[i]:
            rows = [stopped_replacement_row(row, i, c, phi) * phi / phi[i] for row in k]
            state_kernels.append(np.array(rows).reshape(k.shape))
        kernels.append(state_kernels)
    return instance.replace_data(rewards, kernels, payoff=PayoffMode.DISCOUNTED)


def verify_contraction(instance: GameInstance, lam: float) -> CertResult:
    """Check that every kernel row sums to at most ``lam`` (up to 1e-9)."""
    worst_sum, worst = -np.inf, None
    for i, a, b, row, _ in instance.all_rows():
        s = float(row.sum())
        if s > worst_sum:
            worst_sum, worst = s, (i, a, b)
    return CertResult(bool(worst_sum <= lam + CERT_TOL), float(worst_sum), worst)


def lift_solution(record: TransformRecord, w):
    """Map a solution of a transformed instance back to the original.

    Scaling gives the vector ``phi * w``; the mean reduction gives the
    eigenpair ``(w[c], phi * (w - w[c]))``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != record.phi.shape:
        raise ValueError("solution length does not match the transform")
    if record.kind == TransformKind.SCALING:
        return record.phi * w
    eta = float(w[record.c])
    bias = record.phi * (w - eta)
    bias[record.c] = 0.0
    return EigenPair(eta, bias, record.c)
