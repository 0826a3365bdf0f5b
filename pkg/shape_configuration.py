"""
Configuration coordinates of landmark figures and the Pearson VII
configuration density.

    figure L (N x K) --Helmert--> Y ((N-1) x K) --block--> U = [I_K; Y2 Y1^{-1}]

The density of U is A 1P1((b)_t d^{-b-t} : a; c; X), with

    a = (N-1)/2, c = K/2, b = s - K(N-1)/2, d = 1 + tr(mu' Sigma^{-1} mu)/R,
    X = (1/R) U'Sigma^{-1} mu mu' Sigma^{-1} U (U'Sigma^{-1}U)^{-1}.

When N - K - 1 is even the Kummer-transformed side terminates and the
density is a polynomial of degree K(N-K-1)/2 in the latent roots of X.
"""

import logging
import math
from typing import Any, Optional, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from errors import DegenerateConfigurationError, ParameterError, ParityError, SeriesError
from kummer_relations import pearson_lhs, pearson_rhs
from matrix_hypergeom import terminating_pearson_batch
from models import (
    ArrayModel,
    ConfigParams,
    ConfigurationModel,
    LandmarkSet,
    SeriesResult,
    SignedLogValue,
    SpectralInput,
    TruncationPolicy,
)
from partition_core import mv_gamma_ln
from symmetric_eigen import jacobi_eigh

logger = logging.getLogger(__name__)

# Leading blocks with a worse condition number are treated as singular
CONDITION_LIMIT = 1e12
# Relative size below which a negative latent root is rounding noise
ROOT_CLIP_TOLERANCE = 1e-10


def helmert_matrix(N: int) -> np.ndarray:
    """(N-1) x N Helmert sub-matrix: orthonormal rows, each orthogonal to the ones vector"""
    if N < 2:
        raise ParameterError(f"Helmert reduction needs N >= 2, got N={N}")
    H = np.zeros((N - 1, N))
    for j in range(1, N):
        scale = math.sqrt(j * (j + 1))
        H[j - 1, :j] = -1.0 / scale
        H[j - 1, j] = j / scale
    return H


def helmert_reduce(L: Union[LandmarkSet, np.ndarray]) -> np.ndarray:
    points = L.points if isinstance(L, LandmarkSet) else np.asarray(L, dtype=float)
    if points.ndim != 2:
        raise ParameterError(f"expected an N x K landmark matrix, got shape {points.shape}")
    return helmert_matrix(points.shape[0]) @ points


def landmarks_from_helmert(Y: np.ndarray) -> np.ndarray:
    """Centered figure H'Y whose Helmert reduction is Y again"""
    Y = np.asarray(Y, dtype=float)
    return helmert_matrix(Y.shape[0] + 1).T @ Y


def configuration_coords(Y: np.ndarray) -> np.ndarray:
    """U = [I_K; Y2 Y1^{-1}], unchanged under Y -> Y E for nonsingular E"""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] <= Y.shape[1]:
        raise ParameterError(f"expected an (N-1) x K matrix with N-1 > K, got shape {Y.shape}")
    K = Y.shape[1]
    Y1, Y2 = Y[:K], Y[K:]
    condition = np.linalg.cond(Y1)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise DegenerateConfigurationError(f"leading {K}x{K} block is singular (condition number {condition:.3g})")
    try:
        lower = np.linalg.solve(Y1.T, Y2.T).T
    except np.linalg.LinAlgError as e:
        raise DegenerateConfigurationError(f"leading {K}x{K} block is singular: {e}") from e
    return np.vstack([np.eye(K), lower])


def configuration_from_landmarks(L: Union[LandmarkSet, np.ndarray]) -> np.ndarray:
    return configuration_coords(helmert_reduce(L))


def polynomial_degree(N: int, K: int) -> Optional[int]:
    """Degree of the terminating density, or None when the series is infinite"""
    q = N - K - 1
    if q < 1:
        raise ParameterError(f"need N - K - 1 >= 1, got N={N}, K={K}")
    if q % 2:
        return None
    return K * q // 2


class ConfigParamsBatch(ArrayModel):
    """Series parameters for a batch of observations under one model"""

    log_A: np.ndarray
    eigenvalues: np.ndarray
    a: float
    c: float
    b: float
    d: float

    def __len__(self) -> int:
        return self.log_A.shape[0]

    @property
    def traces(self) -> np.ndarray:
        return self.eigenvalues.sum(axis=1)

    def item(self, index: int) -> ConfigParams:
        return ConfigParams(
            A=SignedLogValue(log_magnitude=float(self.log_A[index]), sign=1),
            a=self.a, c=self.c, b=self.b, d=self.d,
            x=SpectralInput(eigenvalues=self.eigenvalues[index]),
        )


class ConfigurationBatch:
    """Model-independent pieces of the density for a stack of configurations.

    Sigma^{-1}U, Q = U'Sigma^{-1}U, log|Q| and Q^{-1/2} depend on Sigma but
    not on mu, so a location fit computes them once.
    """

    def __init__(self, configurations: Any, Sigma: np.ndarray):
        Us = np.asarray(configurations, dtype=float)
        if Us.ndim == 2:
            Us = Us[None]
        if Us.ndim != 3:
            raise ParameterError(f"expected a stack of configuration matrices, got shape {Us.shape}")
        self.configurations = Us
        self.n, rows, self.K = Us.shape
        self.N = rows + 1

        Sigma = np.asarray(Sigma, dtype=float)
        if Sigma.shape != (rows, rows):
            raise ParameterError(f"Sigma must be {(rows, rows)}, got {Sigma.shape}")
        try:
            factor = cho_factor(Sigma, lower=True)
        except np.linalg.LinAlgError as e:
            raise ParameterError(f"Sigma is not positive definite: {e}") from e
        self.Sigma = Sigma
        self.Sigma_inv = cho_solve(factor, np.eye(rows))
        self.log_det_sigma = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))

        self.Sigma_inv_U = np.einsum("ij,njk->nik", self.Sigma_inv, Us)
        Q = np.swapaxes(Us, -1, -2) @ self.Sigma_inv_U
        w, v = jacobi_eigh(Q)
        scale = np.max(np.abs(w), axis=-1)
        rank_deficient = (w[:, 0] <= scale / CONDITION_LIMIT) | ~np.all(np.isfinite(w), axis=-1)
        if np.any(rank_deficient):
            index = int(np.argmax(rank_deficient))
            raise DegenerateConfigurationError(f"configuration {index} is not of full column rank")
        self.log_det_Q = np.sum(np.log(w), axis=-1)
        self.Q_inv_half = np.einsum("nij,nj,nkj->nik", v, 1.0 / np.sqrt(w), v)
        logger.debug("Prepared %d configurations (N=%d, K=%d)", self.n, self.N, self.K)

    def log_constant(self) -> np.ndarray:
        """log A per observation"""
        N, K = self.N, self.K
        q = N - K - 1
        shared = (mv_gamma_ln(K, (N - 1) / 2.0).log_magnitude
                  - K * q / 2.0 * math.log(math.pi)
                  - K / 2.0 * self.log_det_sigma
                  - mv_gamma_ln(K, K / 2.0).log_magnitude)
        return shared - (N - 1) / 2.0 * self.log_det_Q

    def params(self, model: ConfigurationModel) -> ConfigParamsBatch:
        if (model.N, model.K) != (self.N, self.K):
            raise ParameterError(f"model is for N={model.N}, K={model.K}; data has N={self.N}, K={self.K}")
        if not np.array_equal(model.Sigma, self.Sigma):
            raise ParameterError("model Sigma differs from the Sigma the batch was prepared with")

        mu = model.mu
        B = np.swapaxes(self.Sigma_inv_U, -1, -2) @ mu
        P = B @ np.swapaxes(B, -1, -2) / model.R
        w, _ = jacobi_eigh(self.Q_inv_half @ P @ self.Q_inv_half)
        scale = np.maximum(np.max(np.abs(w), axis=-1, keepdims=True), 1.0)
        noisy = w < -ROOT_CLIP_TOLERANCE * scale
        if np.any(noisy):
            logger.warning("Clipping %d negative latent roots (most negative %.3g)", int(noisy.sum()), float(w.min()))
        w = np.clip(w, 0.0, None)

        d = 1.0 + float(np.trace(mu.T @ self.Sigma_inv @ mu)) / model.R
        shifted = d - w.sum(axis=1)
        if np.any(shifted < 1.0 - 1e-8 * d):
            raise ParameterError(f"d - tr X fell below 1 (min {float(shifted.min()):.6g})")

        return ConfigParamsBatch(
            log_A=self.log_constant(),
            eigenvalues=w,
            a=(self.N - 1) / 2.0,
            c=self.K / 2.0,
            b=model.b,
            d=d,
        )


def model_params(model: ConfigurationModel, U: np.ndarray) -> ConfigParams:
    return ConfigurationBatch(U, model.Sigma).params(model).item(0)


def _positive(result: SeriesResult, form: str) -> SeriesResult:
    if not result.value > 0:
        raise SeriesError(f"{form} density evaluated to {result.value:g}; the series is not resolved")
    return result


def density_series(params: ConfigParams, policy: Optional[TruncationPolicy] = None) -> SeriesResult:
    """A 1P1((b)_t d^{-b-t} : a; c; X)"""
    series = pearson_lhs(params.series_params(), params.x, policy)
    return _positive(series.scaled(params.A), "series")


def density_polynomial(params: ConfigParams, N: int, K: int,
                       policy: Optional[TruncationPolicy] = None) -> SeriesResult:
    """A (d - tr X)^{-b} 1P1((b)_t (d - tr X)^{-t} : c - a; c; -X), a finite sum"""
    degree = polynomial_degree(N, K)
    if degree is None:
        raise ParityError(f"N={N}, K={K}: N - K - 1 is odd, so the density is an infinite series")
    policy = policy or TruncationPolicy()
    policy = policy.model_copy(update={
        "max_degree": max(policy.max_degree, degree),
        "detect_termination": True,
    })
    series = pearson_rhs(params.series_params(), params.x, policy)
    if not series.terminated_exactly:
        raise SeriesError(f"polynomial density did not terminate by degree {degree}")
    return _positive(series.scaled(params.A), "polynomial")


def log_density_polynomial_batch(batch: ConfigParamsBatch, N: int, K: int) -> np.ndarray:
    """log of the polynomial density for every observation in a batch"""
    degree = polynomial_degree(N, K)
    if degree is None:
        raise ParityError(f"N={N}, K={K}: N - K - 1 is odd, so the density is an infinite series")
    shifted = batch.d - batch.traces
    values, _ = terminating_pearson_batch(batch.b, batch.c - batch.a, batch.c, shifted, -batch.eigenvalues)
    if np.any(~(values > 0)):
        raise SeriesError(f"polynomial density evaluated to {float(np.min(values)):g}")
    return batch.log_A - batch.b * np.log(shifted) + np.log(values)
