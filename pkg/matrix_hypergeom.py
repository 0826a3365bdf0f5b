"""
Series engine for 1F1 of matrix argument and the generalized 1P1 series

    1P1(f : a; c; X) = sum_t f(t, X)/t! sum_{tau |- t} (a)_tau/(c)_tau C_tau(X)

Terms are grouped by total degree t; the stopping rule only ever looks at
whole degree contributions.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Tuple

import numpy as np

from errors import DivergenceError, ParameterError
from models import SeriesResult, SignedLogValue, SpectralInput, TruncationPolicy
from partition_core import gen_pochhammer_log, pochhammer_log
from signed_log import signed_logsumexp
from zonal_poly import MonomialEvaluator, ZonalTableCache

logger = logging.getLogger(__name__)

LogSigned = Tuple[float, int]


class CoefficientFunction(ABC):
    """Degree weight f(t, X); may depend on X only through scalar summaries, never on tau"""

    @abstractmethod
    def log_weight(self, t: int, x: SpectralInput) -> LogSigned:
        """(log|f(t, X)|, sign)"""

    def vanishes_beyond(self) -> Optional[int]:
        """Last degree whose weight can be nonzero, when the weight terminates structurally"""
        return None

    def __call__(self, t: int, x: SpectralInput) -> SignedLogValue:
        log_magnitude, sign = self.log_weight(t, x)
        if sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(log_magnitude=log_magnitude, sign=sign)


class UnitCoefficients(CoefficientFunction):
    """f = 1, which turns 1P1 into 1F1"""

    def log_weight(self, t: int, x: SpectralInput) -> LogSigned:
        return 0.0, 1


class PearsonCoefficients(CoefficientFunction):
    """f(t) = (b)_t d^{-b-t}, or (b)_t d^{-t} with prefactor=False"""

    def __init__(self, b: float, d: float, prefactor: bool = True):
        if not d > 0:
            raise ParameterError(f"Pearson weights need d > 0, got d={d}")
        self.b = float(b)
        self.d = float(d)
        self.prefactor = prefactor
        self._log_d = math.log(self.d)

    def log_weight(self, t: int, x: SpectralInput) -> LogSigned:
        poch_log, poch_sign = pochhammer_log(self.b, t)
        if poch_sign == 0:
            return float("-inf"), 0
        exponent = self.b + t if self.prefactor else t
        return poch_log - exponent * self._log_d, poch_sign

    def vanishes_beyond(self) -> Optional[int]:
        if float(self.b).is_integer() and self.b <= 0:
            return int(-self.b)
        return None

    def __repr__(self) -> str:
        return f"PearsonCoefficients(b={self.b}, d={self.d}, prefactor={self.prefactor})"


class CallableCoefficients(CoefficientFunction):
    """Wraps f(t, trace) -> float"""

    def __init__(self, func: Callable[[int, float], float]):
        self.func = func

    def log_weight(self, t: int, x: SpectralInput) -> LogSigned:
        value = float(self.func(t, x.trace))
        if value == 0.0:
            return float("-inf"), 0
        return math.log(abs(value)), 1 if value > 0 else -1


def termination_bound(alpha: float, m: int) -> Optional[int]:
    """Largest total degree with (alpha)_tau != 0 when alpha = -n is a non-positive integer"""
    if float(alpha).is_integer() and alpha <= 0:
        return int(-alpha) * m
    return None


def _tail_estimate(contributions: List[LogSigned]) -> float:
    nonzero = [c for c in contributions if c[1] != 0]
    if not nonzero:
        return 0.0
    last = math.exp(nonzero[-1][0])
    if len(nonzero) < 2:
        return last
    ratio = math.exp(nonzero[-1][0] - nonzero[-2][0])
    if ratio < 1.0:
        return last * ratio / (1.0 - ratio)
    return last


def one_p_one(
    f: CoefficientFunction,
    a: float,
    c: float,
    x: SpectralInput,
    policy: Optional[TruncationPolicy] = None,
    cache: Optional[ZonalTableCache] = None,
) -> SeriesResult:
    """Partial sum of 1P1(f : a; c; X) under a truncation policy"""
    policy = policy or TruncationPolicy()
    m = x.m
    evaluator = MonomialEvaluator(x)

    bounds = []
    if policy.detect_termination:
        bounds = [b for b in (termination_bound(a, m), f.vanishes_beyond()) if b is not None]
    bound = min(bounds) if bounds else None
    exact = bound is not None and bound <= policy.max_degree
    last_degree = bound if exact else policy.max_degree

    partial = SignedLogValue.zero()
    contributions: List[LogSigned] = []
    log_factorial = 0.0
    small_run = 0
    growth_run = 0
    term_count = 0
    converged = exact
    degree_used = 0
    log_tolerance = math.log(policy.rel_tolerance)

    for t in range(last_degree + 1):
        if t > 0:
            log_factorial += math.log(t)
        degree_used = t

        weight_log, weight_sign = f.log_weight(t, x)
        contribution: LogSigned = (float("-inf"), 0)
        if weight_sign != 0:
            parts, zonal = evaluator.zonal_values(t, cache)
            logs, signs = [], []
            for tau, value in zip(parts, zonal):
                if value == 0.0:
                    continue
                num_log, num_sign = gen_pochhammer_log(float(a), tau)
                if num_sign == 0:
                    continue
                den_log, den_sign = gen_pochhammer_log(float(c), tau)
                if den_sign == 0:
                    raise ParameterError(f"(c)_tau vanishes for c={c}, tau={tau} against a nonzero numerator")
                logs.append(num_log - den_log + math.log(abs(value)))
                signs.append(num_sign * den_sign * (1 if value > 0 else -1))
                term_count += 1
            inner_log, inner_sign = signed_logsumexp(logs, signs)
            if inner_sign != 0:
                contribution = (weight_log + inner_log - log_factorial, weight_sign * inner_sign)

        contributions.append(contribution)
        if contribution[1] != 0:
            partial = partial + SignedLogValue(log_magnitude=contribution[0], sign=contribution[1])

        if exact:
            continue

        if contribution[1] == 0 or contribution[0] <= log_tolerance + partial.log_magnitude:
            small_run += 1
        else:
            small_run = 0
        if small_run >= policy.consecutive_small_terms:
            converged = True
            break

        previous = contributions[-2] if len(contributions) > 1 else None
        if (t > policy.divergence_horizon and previous is not None and previous[1] != 0
                and contribution[1] != 0 and contribution[0] > previous[0]):
            growth_run += 1
        else:
            growth_run = 0
        if growth_run >= policy.consecutive_small_terms:
            raise DivergenceError(
                f"degree contributions grew for {growth_run} consecutive degrees past degree "
                f"{policy.divergence_horizon} (a={a}, c={c}, tr X={x.trace:g})"
            )

    if not converged:
        logger.warning("1P1 series stopped at max_degree=%d before meeting rel_tolerance=%g",
                       policy.max_degree, policy.rel_tolerance)
    logger.debug("1P1 a=%g c=%g m=%d: degree_used=%d exact=%s converged=%s",
                 a, c, m, degree_used, exact, converged)

    last_log, last_sign = contributions[-1]
    return SeriesResult(
        value=partial.to_float(),
        log_value=partial,
        degree_used=degree_used,
        terminated_exactly=exact,
        last_degree_contribution=last_sign * math.exp(last_log) if last_sign else 0.0,
        term_count=term_count,
        converged=converged,
        tail_estimate=0.0 if exact else _tail_estimate(contributions),
    )


def hyp_1f1(
    a: float,
    c: float,
    x: SpectralInput,
    policy: Optional[TruncationPolicy] = None,
    cache: Optional[ZonalTableCache] = None,
) -> SeriesResult:
    """1F1(a; c; X) of matrix argument"""
    return one_p_one(UnitCoefficients(), a, c, x, policy, cache)


def terminating_pearson_batch(
    b: float,
    alpha: float,
    c: float,
    d: np.ndarray,
    points: np.ndarray,
    cache: Optional[ZonalTableCache] = None,
) -> Tuple[np.ndarray, int]:
    """sum_t (b)_t d^{-t}/t! sum_tau (alpha)_tau/(c)_tau C_tau(X_i) for a batch of arguments.

    alpha must be a non-positive integer so the sum is a polynomial; points
    is an (n, m) array of eigenvalues and d an (n,) array. Returns the values
    and the degree the sum terminated at.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = np.asarray(d, dtype=float)
    n, m = points.shape
    degree = termination_bound(alpha, m)
    if degree is None:
        raise ParameterError(f"numerator parameter {alpha} is not a non-positive integer")

    evaluator = MonomialEvaluator([points[:, i] for i in range(m)])
    total = np.ones(n)
    log_d = np.log(d)
    for t in range(1, degree + 1):
        weight_log, weight_sign = pochhammer_log(float(b), t)
        if weight_sign == 0:
            break
        parts, zonal = evaluator.zonal_values(t, cache)
        inner = np.zeros(n)
        for tau, values in zip(parts, zonal):
            num_log, num_sign = gen_pochhammer_log(float(alpha), tau)
            if num_sign == 0:
                continue
            den_log, den_sign = gen_pochhammer_log(float(c), tau)
            if den_sign == 0:
                raise ParameterError(f"(c)_tau vanishes for c={c}, tau={tau} against a nonzero numerator")
            inner += num_sign * den_sign * math.exp(num_log - den_log) * values
        log_factor = weight_log - math.lgamma(t + 1) - t * log_d
        total += weight_sign * np.exp(log_factor) * inner
    return total, degree
