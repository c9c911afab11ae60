"""Nested policy iteration for discounted and mean-payoff games.

The outer loop improves the min player's policy; each outer step solves the
game with that policy fixed by an inner policy iteration of the max player.
Every evaluation is a direct linear solve. Runs are deterministic: initial
policies default to index 0 everywhere and improvement is conservative with
smallest-index fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

from .errors import BoundExceeded, DomainError, InstanceFormatError, NotContracting
from .game import (
    GameInstance,
    MaxPolicy,
    MinPolicy,
    PayoffMode,
    check_valid,
    count_m,
    count_m1,
    count_min_policies,
    first_max_policy,
    first_min_policy,
)
from .linalg import EigenPair, additive_eigenpair, affine_fixed_point
from .perron import (
    RadiusMode,
    ReturnTimeResult,
    collatz_wielandt_vector,
    dominates,
    family_from_instance,
    hull_spectral_radius,
    mean_return_times,
)
from .shapley import (
    ImprovementConfig,
    eval_operator,
    eval_policy_min,
    improve_max,
    improve_min,
    policy_pair_matrix,
    state_values,
)
from .transforms import mean_to_discounted, scale_instance

Value = Union[np.ndarray, EigenPair]


class StopReason(str, Enum):
    POLICY_REPEATED = "policy-repeated"
    BOUND_EXCEEDED = "bound-exceeded"
    ERROR = "error"


@dataclass(frozen=True)
class InnerStep:
    policy: MaxPolicy
    value: Value


@dataclass(frozen=True)
class OuterStep:
    policy: MinPolicy
    value: Value
    residual: float


@dataclass(frozen=True)
class IterationTrace:
    """Outer steps ``(sigma^k, v^k, ||f(v^k) - v^k||)`` and, per outer step,
    the inner steps ``(delta^{k,j}, v^{k,j})``.

    The improved policy that equals the last one (the stopping test) is not
    recorded, so ``len(outer) - 1`` is the index at which the run stopped.
    """

    outer: tuple[OuterStep, ...]
    inner: tuple[tuple[InnerStep, ...], ...]
    stopped_reason: StopReason = StopReason.POLICY_REPEATED

    @property
    def min_policies(self) -> list[MinPolicy]:
        return [s.policy for s in self.outer]

    @property
    def stop_index(self) -> int:
        return len(self.outer) - 1


@dataclass(frozen=True)
class SolverConfig:
    improvement: ImprovementConfig = field(default_factory=ImprovementConfig)
    initial_min: MinPolicy | None = None
    initial_max: MaxPolicy | None = None
    force: bool = False


class DiscountedResult(NamedTuple):
    value: np.ndarray
    min_policy: MinPolicy
    max_policy: MaxPolicy
    trace: IterationTrace


class MeanResult(NamedTuple):
    eigenpair: EigenPair
    min_policy: MinPolicy
    max_policy: MaxPolicy
    trace: IterationTrace
    return_times: ReturnTimeResult


def _vector(value: Value) -> np.ndarray:
    return value.bias if isinstance(value, EigenPair) else value


def _inner_loop(instance, sigma, delta, cfg: SolverConfig, evaluate):
    limit = math.prod(instance.num_max_actions(i) for i in range(instance.n))
    steps = []
    while True:
        M, r = policy_pair_matrix(instance, sigma, delta)
        value = evaluate(M, r)
        steps.append(InnerStep(delta, value))
        nxt = improve_max(instance, sigma, _vector(value), delta, cfg.improvement)
        if nxt == delta:
            return value, delta, tuple(steps)
        if len(steps) >= limit:
            raise BoundExceeded(f"inner loop exceeded {limit} max policies")
        delta = nxt


def _outer_loop(instance, cfg: SolverConfig, evaluate, residual):
    sigma = tuple(cfg.initial_min) if cfg.initial_min is not None else first_min_policy(instance)
    delta = (
        tuple(tuple(x) for x in cfg.initial_max)
        if cfg.initial_max is not None
        else first_max_policy(instance)
    )
    limit = count_min_policies(instance)
    outer, inner = [], []
    while True:
        value, delta, steps = _inner_loop(instance, sigma, delta, cfg, evaluate)
        outer.append(OuterStep(sigma, value, residual(value)))
        inner.append(steps)
        nxt = improve_min(instance, _vector(value), sigma, cfg.improvement)
        if nxt == sigma:
            break
        if len(outer) >= limit:
            raise BoundExceeded(f"outer loop exceeded {limit} min policies")
        sigma = nxt
    delta = improve_max(instance, None, _vector(value), delta, cfg.improvement)
    return value, sigma, delta, IterationTrace(tuple(outer), tuple(inner))


def solve_discounted(instance: GameInstance, cfg: SolverConfig = SolverConfig()) -> DiscountedResult:
    """Solve ``v = f(v)`` by nested policy iteration.

    Kernel rows must sum to less than one unless ``cfg.force`` is set, for
    instance after a scaling certified by a Collatz-Wielandt vector.

    Raises
    ------
    NotContracting
        If some kernel row sums to one or more and ``force`` is off.
    """
    check_valid(instance)
    if not cfg.force and instance.max_row_sum() >= 1.0:
        raise NotContracting(f"max kernel row sum {instance.max_row_sum()!r} >= 1")

    def residual(v):
        return float(np.abs(eval_operator(instance, v) - v).max())

    value, sigma, delta, trace = _outer_loop(instance, cfg, affine_fixed_point, residual)
    return DiscountedResult(value, sigma, delta, trace)


def solve_mean(instance: GameInstance, c: int, cfg: SolverConfig = SolverConfig()) -> MeanResult:
    """Hoffman-Karp policy iteration for ``eta + v = f(v)`` with ``v[c] = 0``.

    The renewal condition on ``c`` is checked first through the worst-case
    return times, whose ``K`` is returned with the result.

    Raises
    ------
    NoRenewalState
        If some policy pair has a final class avoiding ``c``.
    MultichainDetected
        If a policy pair has several final classes.
    """
    check_valid(instance)
    if instance.payoff != PayoffMode.MEAN:
        raise ValueError("solve_mean needs a mean-payoff instance")
    if not 0 <= c < instance.n:
        raise IndexError(f"renewal state {c} out of range")
    times = mean_return_times(family_from_instance(instance), c)

    def evaluate(M, r):
        return additive_eigenpair(M, r, c)

    def residual(pair):
        return float(np.abs(eval_operator(instance, pair.bias) - pair.bias - pair.eta).max())

    pair, sigma, delta, trace = _outer_loop(instance, cfg, evaluate, residual)
    return MeanResult(pair, sigma, delta, trace, times)


# -- iteration bounds -------------------------------------------------------


def elimination_period(lam: float) -> int:
    """``p = 1 + floor(log(1 - lam) / log(lam))``, with ``p = 1`` at ``lam = 0``."""
    if not 0 <= lam < 1:
        raise DomainError(f"rate {lam} outside [0, 1)")
    if lam == 0:
        return 1
    return 1 + math.floor(math.log(1 - lam) / math.log(lam))


def bound_thm3(m1: int, n: int, lam: float) -> int:
    """Outer iteration bound ``(m1 - n) * p`` for a ``lam``-contracting game."""
    return (m1 - n) * elimination_period(lam)


def bound_hmz(m: int, n: int, lam: float) -> float:
    """Earlier bound ``(m + 1) * (1 + log(n^2 / (1 - lam)) / -log(lam))``."""
    if not 0 < lam < 1:
        raise DomainError(f"rate {lam} outside (0, 1)")
    return (m + 1) * (1 + math.log(n * n / (1 - lam)) / -math.log(lam))


def bound_mean(m1: int, n: int, K: float) -> int:
    """Outer iteration bound for mean payoff with worst return time ``K``."""
    if not K >= 1:
        raise DomainError(f"return time bound {K} below 1")
    if K == 1:
        return m1 - n
    return (m1 - n) * (1 + math.floor(math.log(K) / math.log(K / (K - 1))))


class Provenance(str, Enum):
    GIVEN_LAMBDA = "given-lambda"
    SPECTRAL_OMEGA = "spectral-omega"
    RETURN_TIME_K = "return-time-K"


@dataclass(frozen=True)
class BoundReport:
    k_max_thm3: int
    k_max_hmz: float
    lambda_used: float
    provenance: Provenance
    m1: int
    m: int
    n: int
    K: float | None = None

    @property
    def p(self) -> int:
        return elimination_period(self.lambda_used)

    @property
    def mu(self) -> float:
        return self.lambda_used**self.p / (1 - self.lambda_used)

    def to_dict(self) -> dict:
        out = {
            "k_max": self.k_max_thm3,
            "k_max_hmz": self.k_max_hmz,
            "lambda": self.lambda_used,
            "provenance": self.provenance.value,
            "m1": self.m1,
            "m": self.m,
            "n": self.n,
            "p": self.p,
            "mu": self.mu,
        }
        if self.K is not None:
            out["K"] = self.K
        return out


def bound_report(instance: GameInstance, lam: float, provenance: Provenance, K: float | None = None):
    m1, m, n = count_m1(instance), count_m(instance), instance.n
    if K is not None:
        k_max = bound_mean(m1, n, K)
    else:
        k_max = bound_thm3(m1, n, lam)
    # lam -> 0 limit of the earlier bound
    hmz = bound_hmz(m, n, lam) if lam > 0 else float(m + 1)
    return BoundReport(k_max, hmz, lam, provenance, m1, m, n, K)


def discounted_bound(instance: GameInstance) -> BoundReport:
    """Bound for a discounted instance: row-sum cap if below one, else the
    hull spectral radius of all kernel rows.

    Raises
    ------
    NotContracting
        If the hull spectral radius is not below one.
    """
    cap = instance.max_row_sum()
    if cap < 1:
        return bound_report(instance, cap, Provenance.GIVEN_LAMBDA)
    family = family_from_instance(instance)
    if not dominates(family, 1.0):
        raise NotContracting("some policy pair has spectral radius >= 1")
    omega = min(hull_spectral_radius(family, RadiusMode.BINARY_SEARCH), math.nextafter(1.0, 0.0))
    return bound_report(instance, omega, Provenance.SPECTRAL_OMEGA)


def mean_bound(instance: GameInstance, times: ReturnTimeResult) -> BoundReport:
    return bound_report(instance, times.lam, Provenance.RETURN_TIME_K, K=times.K)


# -- runtime certificates ---------------------------------------------------

CHECKS = ("monotone", "sandwich", "contraction", "no-revisit", "residual", "elimination")


@dataclass(frozen=True)
class CertReport:
    violations: dict[str, list[str]]
    lam: float

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())

    def failed_checks(self) -> list[str]:
        return [name for name in CHECKS if self.violations.get(name)]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "lambda": self.lam, "violations": self.violations}


def certify_trace(instance: GameInstance, trace: IterationTrace, lam: float, v_star) -> CertReport:
    """Check a discounted run against the convergence and bound theory.

    ``lam`` must be a sup-norm contraction factor of the instance. All
    inequalities are tested up to ``1e-8 * (1 + ||v_star||)``.
    """
    v_star = np.asarray(v_star, dtype=float)
    tol = 1e-8 * (1 + float(np.abs(v_star).max()))
    out: dict[str, list[str]] = {name: [] for name in CHECKS}
    values = [np.asarray(s.value, dtype=float) for s in trace.outer]
    policies = [s.policy for s in trace.outer]
    images = [eval_operator(instance, v) for v in values]

    if values and np.any(v_star > values[0] + tol):
        out["sandwich"].append("v_star exceeds v^0")
    for k in range(len(values) - 1):
        cur, nxt, img = values[k], values[k + 1], images[k]
        if np.any(nxt > cur + tol):
            out["monotone"].append(f"v^{k + 1} > v^{k}")
        if np.any(v_star > nxt + tol):
            out["sandwich"].append(f"v_star > v^{k + 1}")
        if np.any(nxt > img + tol):
            out["sandwich"].append(f"v^{k + 1} > f(v^{k})")
        if np.any(img > cur + tol):
            out["sandwich"].append(f"f(v^{k}) > v^{k}")
        before = float(np.abs(cur - v_star).max())
        after = float(np.abs(nxt - v_star).max())
        if after > lam * before + tol:
            out["contraction"].append(f"||v^{k + 1} - v|| = {after:.3e} > lam * {before:.3e}")

    seen = {}
    for k, pol in enumerate(policies):
        if pol in seen:
            out["no-revisit"].append(f"sigma^{k} repeats sigma^{seen[pol]}")
        seen.setdefault(pol, k)

    # R[i][a] = max_b F[v_star](i, a, b) - v_star[i]
    table = [state_values(instance, v_star, i).max(axis=1) - v_star[i] for i in range(instance.n)]
    norms = []
    for k, (pol, v) in enumerate(zip(policies, values)):
        res = eval_policy_min(instance, pol, v_star) - v_star
        if np.any(res < -tol):
            out["residual"].append(f"negative residual at step {k}")
        rn = float(np.abs(res).max())
        dist = float(np.abs(v - v_star).max())
        norms.append(rn)
        if rn > dist + tol or dist > rn / (1 - lam) + tol:
            out["residual"].append(
                f"step {k}: ||R|| = {rn:.3e}, ||v^k - v|| = {dist:.3e} outside the sandwich"
            )

    p = elimination_period(lam)
    for k, pol in enumerate(policies):
        if norms[k] <= tol:
            continue
        graph = [table[i][pol[i]] for i in range(instance.n)]
        i = int(np.argmax(graph))
        a = pol[i]
        for t in range(k + p, len(policies)):
            if policies[t][i] == a:
                out["elimination"].append(
                    f"pair ({i + 1}, {a + 1}) worst at step {k} reappears at step {t} (p = {p})"
                )
    return CertReport(out, lam)


def scale_trace(trace: IterationTrace, phi) -> IterationTrace:
    """Express a discounted trace in the coordinates ``w = v / phi``."""
    phi = np.asarray(phi, dtype=float)
    outer = tuple(OuterStep(s.policy, s.value / phi, s.residual) for s in trace.outer)
    inner = tuple(tuple(InnerStep(s.policy, s.value / phi) for s in steps) for steps in trace.inner)
    return IterationTrace(outer, inner, trace.stopped_reason)


def reduce_mean_trace(trace: IterationTrace, phi) -> IterationTrace:
    """Map a mean-payoff trace to ``w = eta + bias / phi`` coordinates."""
    phi = np.asarray(phi, dtype=float)

    def w(pair: EigenPair):
        return pair.eta + pair.bias / phi

    outer = tuple(OuterStep(s.policy, w(s.value), s.residual) for s in trace.outer)
    inner = tuple(tuple(InnerStep(s.policy, w(s.value)) for s in steps) for steps in trace.inner)
    return IterationTrace(outer, inner, trace.stopped_reason)


def certify_discounted_run(instance: GameInstance, result: DiscountedResult, report: BoundReport):
    """Certify a discounted run in the coordinates where it contracts."""
    if report.provenance == Provenance.GIVEN_LAMBDA:
        return certify_trace(instance, result.trace, report.lambda_used, result.value)
    # sup-norm contraction only holds after a Collatz-Wielandt rescaling
    lam = report.lambda_used + 1e-3 * (1 - report.lambda_used)
    phi = collatz_wielandt_vector(family_from_instance(instance), lam)
    scaled = scale_instance(instance, phi)
    return certify_trace(scaled, scale_trace(result.trace, phi), lam, result.value / phi)


def certify_mean_run(instance: GameInstance, result: MeanResult) -> CertReport:
    """Certify a mean-payoff run through its contracting discounted image."""
    times = result.return_times
    reduced = mean_to_discounted(instance, times.c, times.phi)
    w_star = result.eigenpair.eta + result.eigenpair.bias / times.phi
    return certify_trace(reduced, reduce_mean_trace(result.trace, times.phi), times.lam, w_star)


# -- trace serialization ----------------------------------------------------


def _value_to_json(value: Value):
    if isinstance(value, EigenPair):
        return {"eta": value.eta, "bias": [float(x) for x in value.bias], "c": value.c + 1}
    return [float(x) for x in value]


def _value_from_json(data) -> Value:
    if isinstance(data, dict):
        return EigenPair(float(data["eta"]), np.asarray(data["bias"], dtype=float), int(data["c"]) - 1)
    return np.asarray(data, dtype=float)


def trace_to_dict(trace: IterationTrace) -> dict:
    """JSON form of a trace; policy entries are 0-based action indices."""
    iterations = []
    for k, (step, inner) in enumerate(zip(trace.outer, trace.inner)):
        iterations.append(
            {
                "k": k,
                "min_policy": list(step.policy),
                "value": _value_to_json(step.value),
                "residual": step.residual,
                "inner": [
                    {"max_policy": [list(row) for row in s.policy], "value": _value_to_json(s.value)}
                    for s in inner
                ],
            }
        )
    return {"stopped_reason": trace.stopped_reason.value, "iterations": iterations}


def trace_from_dict(data: dict) -> IterationTrace:
    try:
        outer, inner = [], []
        for it in data["iterations"]:
            outer.append(
                OuterStep(tuple(int(x) for x in it["min_policy"]), _value_from_json(it["value"]), float(it["residual"]))
            )
            inner.append(
                tuple(
                    InnerStep(tuple(tuple(int(x) for x in row) for row in s["max_policy"]), _value_from_json(s["value"]))
                    for s in it["inner"]
                )
            )
        return IterationTrace(tuple(outer), tuple(inner), StopReason(data["stopped_reason"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed trace: {exc!r}") from exc
