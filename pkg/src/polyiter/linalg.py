"""Dense linear algebra for fixed policy pairs.

Policy evaluation needs exact (direct) solves: LU with partial pivoting
plus one step of residual refinement.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import MultichainDetected, NonNegativeViolation, SingularSystem

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class EigenPair:
    """Additive eigenpair ``eta + bias = M bias + r`` with ``bias[c] == 0``."""

    eta: float
    bias: np.ndarray
    c: int


def _solve_refined(A: np.ndarray, b: np.ndarray, threshold: float, exc=SingularSystem):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or pivots.min() <= threshold:
        k = int(np.argmin(pivots))
        raise exc(f"pivot {pivots[k]:.3e} at position {k} is below {threshold:.3e}")
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    x = x + scipy.linalg.lu_solve((lu, piv), b - A @ x, check_finite=False)
    return x


def affine_fixed_point(M, r) -> np.ndarray:
    """Solve ``v = M v + r``.

    Raises
    ------
    SingularSystem
        If a pivot of ``I - M`` falls below ``1e-12 * ||M||_inf``, which
        signals that ``M`` does not have spectral radius below one.
    """
    M = np.asarray(M, dtype=float)
    r = np.asarray(r, dtype=float)
    n = M.shape[0]
    threshold = PIVOT_RTOL * float(np.abs(M).sum(axis=1).max(initial=0.0))
    return _solve_refined(np.eye(n) - M, r, threshold)


def additive_eigenpair(M, r, c: int) -> EigenPair:
    """Solve ``eta * 1 + v = M v + r`` with ``v[c] = 0``.

    The unknowns ``(v, eta)`` are found from one ``(n+1) x (n+1)`` system;
    it is singular exactly when ``M`` has more than one final class.
    """
    M = np.asarray(M, dtype=float)
    r = np.asarray(r, dtype=float)
    n = M.shape[0]
    if not 0 <= c < n:
        raise IndexError(f"normalization state {c} out of range")
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = np.eye(n) - M
    A[:n, n] = 1.0
    A[n, c] = 1.0
    rhs = np.append(r, 0.0)
    threshold = PIVOT_RTOL * float(np.abs(A).sum(axis=1).max())
    x = _solve_refined(A, rhs, threshold, exc=MultichainDetected)
    bias = x[:n].copy()
    bias[c] = 0.0
    return EigenPair(float(x[n]), bias, c)


def spectral_radius(M, rtol: float = 1e-9, max_squarings: int = 40) -> float:
    """Spectral radius of a nonnegative matrix via ``||M^(2^j)||^(1/2^j)``.

    Powers are formed by repeated squaring with renormalization, tracking
    ``log ||M^(2^j)||_inf``. Iteration stops at the first ``j >= 3`` where
    two successive estimates agree to ``rtol``. Works for periodic and
    reducible matrices where power iteration on a vector can stall.
    """
    N = np.array(M, dtype=float)
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        raise ValueError("square matrix expected")
    if np.any(N < 0):
        raise NonNegativeViolation("matrix has negative entries")
    norm = float(N.sum(axis=1).max(initial=0.0))
    if norm == 0.0:
        return 0.0
    log_norm = math.log(norm)
    N /= norm
    estimate = norm
    power = 1
    for j in range(1, max_squarings + 1):
        N = N @ N
        power *= 2
        nu = float(N.sum(axis=1).max())
        if nu == 0.0:
            return 0.0
        log_norm = 2.0 * log_norm + math.log(nu)
        N /= nu
        previous, estimate = estimate, math.exp(log_norm / power)
        if j >= 3 and abs(estimate - previous) <= rtol * estimate:
            break
    return estimate
