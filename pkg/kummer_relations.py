"""
Kummer-type relations between 1P1 series and their numerical checks.

A relation has the shape

    1P1(f : a; c; X) = v(X) 1P1(g : c - a; c; h(X))

The classical matrix Kummer relation is f = g = 1, v = etr(X), h = -X.
The Pearson VII relation is f = (b)_t d^{-b-t}, v = (d - tr X)^{-b},
g = (b)_t (d - tr X)^{-t}, h = -X.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np

from config import Config
from errors import DomainError, ParameterError, SamplerError
from matrix_hypergeom import CoefficientFunction, PearsonCoefficients, UnitCoefficients, one_p_one, termination_bound
from models import (
    MonteCarloEstimate,
    PearsonSeriesParams,
    SeriesResult,
    SignedLogValue,
    SpectralInput,
    TruncationPolicy,
    VerificationReport,
)
from symmetric_eigen import jacobi_eigh

logger = logging.getLogger(__name__)

# Extra degrees summed on the truncated side of an identity check
VERIFY_DEGREE_MARGIN = 20


class KummerRelation:
    """One instance of 1P1(f : a; c; X) = v(X) 1P1(g : c-a; c; h(X))"""

    def __init__(
        self,
        name: str,
        f: Callable[[SpectralInput], CoefficientFunction],
        v: Callable[[SpectralInput], SignedLogValue],
        g: Callable[[SpectralInput], CoefficientFunction],
        h: Callable[[SpectralInput], SpectralInput] = SpectralInput.negated,
    ):
        self.name = name
        self.f = f
        self.v = v
        self.g = g
        self.h = h

    def lhs(self, a: float, c: float, x: SpectralInput, policy: Optional[TruncationPolicy] = None) -> SeriesResult:
        return one_p_one(self.f(x), a, c, x, policy)

    def rhs(self, a: float, c: float, x: SpectralInput, policy: Optional[TruncationPolicy] = None) -> SeriesResult:
        series = one_p_one(self.g(x), c - a, c, self.h(x), policy)
        return series.scaled(self.v(x))

    def check(self, a: float, c: float, x: SpectralInput, policy: Optional[TruncationPolicy] = None) -> VerificationReport:
        policy = policy or TruncationPolicy()
        # the side carrying a as numerator never terminates for a > 0, so give it room
        lhs_policy = policy.with_max_degree(max(policy.max_degree,
                                                int(math.ceil(x.m * abs(c - a))) + VERIFY_DEGREE_MARGIN))
        lhs = self.lhs(a, c, x, lhs_policy)
        rhs = self.rhs(a, c, x, policy)
        report = VerificationReport.compare(
            lhs.value, rhs.value,
            lhs_diagnostics=lhs,
            rhs_diagnostics=rhs,
            tail_estimate=lhs.tail_estimate + rhs.tail_estimate,
        )
        logger.info("%s relation: lhs=%.16g rhs=%.16g rel_diff=%.3g", self.name, report.lhs, report.rhs, report.rel_diff)
        return report


def classical_kummer() -> KummerRelation:
    return KummerRelation(
        name="kummer",
        f=lambda x: UnitCoefficients(),
        v=lambda x: SignedLogValue(log_magnitude=x.trace, sign=1),
        g=lambda x: UnitCoefficients(),
    )


def _shifted_d(d: float, x: SpectralInput) -> float:
    shifted = d - x.trace
    if not shifted > 0:
        raise DomainError(f"need d > tr X, got d={d}, tr X={x.trace:g}")
    return shifted


def pearson_kummer(b: float, d: float) -> KummerRelation:
    return KummerRelation(
        name="pearson",
        f=lambda x: PearsonCoefficients(b, d),
        v=lambda x: SignedLogValue(log_magnitude=-b * math.log(_shifted_d(d, x)), sign=1),
        g=lambda x: PearsonCoefficients(b, _shifted_d(d, x), prefactor=False),
    )


def kummer_classic_check(a: float, c: float, x: SpectralInput,
                         policy: Optional[TruncationPolicy] = None) -> VerificationReport:
    """1F1(a; c; X) against etr(X) 1F1(c - a; c; -X)"""
    return classical_kummer().check(a, c, x, policy)


def _check_domain(p: PearsonSeriesParams, x: SpectralInput) -> None:
    if not p.d > x.trace:
        raise DomainError(f"need d > tr X, got d={p.d}, tr X={x.trace:g}")


def _check_transformed_domain(p: PearsonSeriesParams, x: SpectralInput) -> None:
    """The transformed side is evaluable when it terminates or when tr X < d - tr X.

    It terminates when c - a or -b is a non-negative integer. Otherwise its
    argument -X is weighed by (d - tr X)^{-t} and the series diverges once
    tr X / (d - tr X) reaches 1.
    """
    terminates = (termination_bound(p.c - p.a, x.m) is not None
                  or PearsonCoefficients(p.b, p.d).vanishes_beyond() is not None)
    if not terminates and not x.trace < p.d - x.trace:
        raise DomainError(
            f"the transformed series needs tr X < d - tr X unless it terminates, "
            f"got d={p.d}, tr X={x.trace:g} (c - a={p.c - p.a:g})")


def pearson_lhs(p: PearsonSeriesParams, x: SpectralInput, policy: Optional[TruncationPolicy] = None) -> SeriesResult:
    """1P1((b)_t d^{-b-t} : a; c; X)"""
    _check_domain(p, x)
    return pearson_kummer(p.b, p.d).lhs(p.a, p.c, x, policy)


def pearson_rhs(p: PearsonSeriesParams, x: SpectralInput, policy: Optional[TruncationPolicy] = None) -> SeriesResult:
    """(d - tr X)^{-b} 1P1((b)_t (d - tr X)^{-t} : c - a; c; -X)"""
    _check_domain(p, x)
    _check_transformed_domain(p, x)
    return pearson_kummer(p.b, p.d).rhs(p.a, p.c, x, policy)


def pearson_relation_check(p: PearsonSeriesParams, x: SpectralInput,
                           policy: Optional[TruncationPolicy] = None) -> VerificationReport:
    """Both sides of the Pearson VII relation.

    Needs a, c > (m-1)/2 and d > tr X; when c - a is not a non-positive
    integer (and b not a non-positive integer) also tr X < d - tr X, the
    region where the transformed series converges.
    """
    m = x.m
    if not (p.a > (m - 1) / 2.0 and p.c > (m - 1) / 2.0):
        raise ParameterError(f"need a, c > (m-1)/2 = {(m - 1) / 2.0}, got a={p.a}, c={p.c}")
    _check_domain(p, x)
    _check_transformed_domain(p, x)
    return pearson_kummer(p.b, p.d).check(p.a, p.c, x, policy)


def _bartlett_wishart(rng: np.random.Generator, size: int, m: int, df: float) -> np.ndarray:
    """Wishart_m(df, I) draws via the Bartlett factor; df may be fractional"""
    L = np.zeros((size, m, m))
    for i in range(m):
        L[:, i, i] = np.sqrt(rng.chisquare(df - i, size=size))
        if i > 0:
            L[:, i, :i] = rng.standard_normal((size, i))
    return L @ np.swapaxes(L, -1, -2)


def sample_matrix_beta(rng: np.random.Generator, size: int, m: int, alpha: float, beta: float) -> np.ndarray:
    """Matrix Beta_m(alpha, beta) draws (S^{-1/2} W1 S^{-1/2}, S = W1 + W2).

    Rows whose S is not numerically positive definite come back as NaN.
    """
    W1 = _bartlett_wishart(rng, size, m, 2.0 * alpha)
    W2 = _bartlett_wishart(rng, size, m, 2.0 * beta)
    w, v = jacobi_eigh(W1 + W2)
    good = np.all(w > 0, axis=-1) & np.all(np.isfinite(w), axis=-1)
    inv_root = np.where(good[:, None], 1.0 / np.sqrt(np.where(good[:, None], w, 1.0)), np.nan)
    S_inv_half = np.einsum("nij,nj,nkj->nik", v, inv_root, v)
    return S_inv_half @ W1 @ S_inv_half


def _merge_moments(count_a: int, mean_a: float, m2_a: float, count_b: int, mean_b: float, m2_b: float):
    count = count_a + count_b
    if count == 0:
        return 0, 0.0, 0.0
    delta = mean_b - mean_a
    mean = mean_a + delta * count_b / count
    m2 = m2_a + m2_b + delta * delta * count_a * count_b / count
    return count, mean, m2


def integral_representation_mc(
    p: PearsonSeriesParams,
    x: SpectralInput,
    n_samples: int,
    seed: int,
    chunk_size: Optional[int] = None,
    max_retries: Optional[int] = None,
) -> MonteCarloEstimate:
    """E[(d - tr(XY))^{-b}] for Y ~ matrix Beta(a, c - a).

    The gamma ratio in front of the Beta-type integral is the Beta law's
    normalizing constant, so the expectation equals 1P1((b)_t d^{-b-t} : a; c; X).
    Chunk k draws from the stream seeded by (seed, k); results are
    reproducible for a fixed chunk size.
    """
    chunk_size = Config.MC_CHUNK_SIZE if chunk_size is None else chunk_size
    max_retries = Config.MC_MAX_RETRIES if max_retries is None else max_retries
    m = x.m
    if n_samples < 1:
        raise ParameterError(f"n_samples must be positive, got {n_samples}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    if not (p.a > (m - 1) / 2.0 and p.c - p.a > (m - 1) / 2.0):
        raise ParameterError(f"need a > (m-1)/2 and c - a > (m-1)/2, got a={p.a}, c={p.c}, m={m}")
    if any(v < 0 for v in x.eigenvalues):
        raise ParameterError("the integral representation needs a positive semi-definite X")
    _check_domain(p, x)

    eigs = np.asarray(x.eigenvalues)
    count, mean, m2 = 0, 0.0, 0.0
    retries = 0
    chunks = int(math.ceil(n_samples / chunk_size))

    for chunk in range(chunks):
        size = min(chunk_size, n_samples - chunk * chunk_size)
        rng = np.random.default_rng([seed, chunk])
        Y = sample_matrix_beta(rng, size, m, p.a, p.c - p.a)
        bad = ~np.all(np.isfinite(Y), axis=(-2, -1))
        attempt = 0
        while np.any(bad):
            attempt += 1
            if attempt > max_retries:
                raise SamplerError(f"{int(bad.sum())} matrix Beta draws failed after {max_retries} retries")
            retry_rng = np.random.default_rng([seed, chunk, attempt])
            Y[bad] = sample_matrix_beta(retry_rng, int(bad.sum()), m, p.a, p.c - p.a)
            bad = ~np.all(np.isfinite(Y), axis=(-2, -1))
        retries += attempt

        trace_xy = np.einsum("i,nii->n", eigs, Y)
        values = np.power(p.d - trace_xy, -p.b)
        chunk_mean = float(np.mean(values))
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        count, mean, m2 = _merge_moments(count, mean, m2, size, chunk_mean, chunk_m2)

    variance = m2 / (count - 1) if count > 1 else 0.0
    standard_error = math.sqrt(variance / count)
    logger.info("Monte Carlo estimate %.10g +/- %.3g from %d draws (seed=%d)", mean, standard_error, count, seed)
    return MonteCarloEstimate(mean=mean, standard_error=standard_error, n_samples=count,
                              seed=seed, chunks=chunks, retries=retries)


def integral_representation_check(
    p: PearsonSeriesParams,
    x: SpectralInput,
    n_samples: int,
    seed: int,
    policy: Optional[TruncationPolicy] = None,
) -> VerificationReport:
    """Monte Carlo estimate against the truncated Pearson series"""
    estimate = integral_representation_mc(p, x, n_samples, seed)
    series = pearson_lhs(p, x, policy)
    return VerificationReport.compare(
        estimate.mean, series.value,
        rhs_diagnostics=series,
        tail_estimate=series.tail_estimate,
        standard_error=estimate.standard_error,
    )
