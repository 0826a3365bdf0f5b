"""
Matrix Pearson VII sampling, configuration log-likelihoods and location fits.

A p x n matrix X is Pearson VII(M, Sigma, Phi, s, R) when its density is

    Gamma(s) / ((pi R)^{np/2} Gamma(s - np/2) |Sigma|^{n/2} |Phi|^{p/2})
        (1 + tr(Sigma^{-1}(X - M)Phi^{-1}(X - M)')/R)^{-s}

Draws use the gamma scale mixture X = M + Sigma^{1/2} Z Phi^{1/2} / sqrt(2W/R)
with W ~ Gamma(s - np/2, 1).
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize
from scipy.special import gammaln

from config import Config
from errors import KummerPearsonError, ParameterError, ParityError
from models import ConfigurationModel, Dataset, DensityForm, FitResult, TruncationPolicy
from shape_configuration import (
    ConfigurationBatch,
    configuration_coords,
    density_series,
    landmarks_from_helmert,
    log_density_polynomial_batch,
    polynomial_degree,
)

logger = logging.getLogger(__name__)


def _check_scale(name: str, matrix: np.ndarray, size: int) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (size, size):
        raise ParameterError(f"{name} must be {size}x{size}, got {matrix.shape}")
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as e:
        raise ParameterError(f"{name} is not positive definite") from e


def sample_pearson_vii(
    M: np.ndarray,
    Sigma: np.ndarray,
    Phi: np.ndarray,
    s: float,
    R: float,
    count: int,
    seed: int,
) -> np.ndarray:
    """count draws of shape p x n, stacked as (count, p, n)"""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p, n = M.shape
    if not s > n * p / 2.0:
        raise ParameterError(f"need s > np/2 = {n * p / 2.0}, got s={s}")
    if not R > 0:
        raise ParameterError(f"need R > 0, got R={R}")
    if count < 0 or seed < 0:
        raise ParameterError(f"count and seed must be non-negative, got count={count}, seed={seed}")
    L_sigma = _check_scale("Sigma", Sigma, p)
    L_phi = _check_scale("Phi", Phi, n)

    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((count, p, n))
    W = rng.gamma(s - n * p / 2.0, 1.0, size=count)
    scale = 1.0 / np.sqrt(2.0 * W / R)
    return M + scale[:, None, None] * (L_sigma @ Z @ L_phi.T)


def sample_matrix_t(M: np.ndarray, Sigma: np.ndarray, Phi: np.ndarray, R: float,
                    count: int, seed: int) -> np.ndarray:
    """Matrix t with R degrees of freedom, s = (np + R)/2"""
    p, n = np.atleast_2d(M).shape
    return sample_pearson_vii(M, Sigma, Phi, (n * p + R) / 2.0, R, count, seed)


def sample_matrix_cauchy(M: np.ndarray, Sigma: np.ndarray, Phi: np.ndarray,
                         count: int, seed: int) -> np.ndarray:
    return sample_matrix_t(M, Sigma, Phi, 1.0, count, seed)


def pearson_vii_logpdf(X: np.ndarray, M: np.ndarray, Sigma: np.ndarray, Phi: np.ndarray,
                       s: float, R: float) -> np.ndarray:
    """Log density at X, a single p x n matrix or a stack (..., p, n)"""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p, n = M.shape
    if not s > n * p / 2.0:
        raise ParameterError(f"need s > np/2 = {n * p / 2.0}, got s={s}")
    L_sigma = _check_scale("Sigma", Sigma, p)
    L_phi = _check_scale("Phi", Phi, n)
    log_det_sigma = 2.0 * np.sum(np.log(np.diag(L_sigma)))
    log_det_phi = 2.0 * np.sum(np.log(np.diag(L_phi)))

    D = np.asarray(X, dtype=float) - M
    # Sigma^{-1/2} D Phi^{-1/2}' through triangular solves
    A = np.linalg.solve(L_sigma, D)
    B = np.linalg.solve(L_phi, np.swapaxes(A, -1, -2))
    quad = np.sum(B * B, axis=(-2, -1))

    log_norm = (gammaln(s) - gammaln(s - n * p / 2.0) - n * p / 2.0 * math.log(math.pi * R)
                - n / 2.0 * log_det_sigma - p / 2.0 * log_det_phi)
    return log_norm - s * np.log1p(quad / R)


def simulate_configurations(model: ConfigurationModel, count: int,
                            seed: int) -> Tuple[List[np.ndarray], Dataset]:
    """Figures drawn from the Pearson VII model and their configuration coordinates.

    The Helmert-reduced figure Y is Pearson VII(mu, Sigma, I_K, s, R).
    """
    Ys = sample_pearson_vii(model.mu, model.Sigma, np.eye(model.K), model.s, model.R, count, seed)
    figures = [landmarks_from_helmert(Y) for Y in Ys]
    configurations = [configuration_coords(Y) for Y in Ys]
    logger.info("Simulated %d figures (N=%d, K=%d, seed=%d)", count, model.N, model.K, seed)
    return figures, Dataset(N=model.N, K=model.K, configurations=configurations)


class ConfigurationLikelihood:
    """Log-likelihood of a fixed dataset as a function of the model.

    The Sigma-dependent pieces are computed once; each evaluation only
    assembles the latent roots for the given mu.
    """

    def __init__(self, data: Dataset, Sigma: np.ndarray, s: float, R: float,
                 form: DensityForm = DensityForm.POLYNOMIAL,
                 policy: Optional[TruncationPolicy] = None):
        self.data = data
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.s = s
        self.R = R
        self.form = DensityForm(form)
        self.policy = policy
        if self.form == DensityForm.POLYNOMIAL and polynomial_degree(data.N, data.K) is None:
            raise ParityError(f"N={data.N}, K={data.K}: no polynomial density; use the series form")
        self.batch = ConfigurationBatch(data.configurations, self.Sigma) if len(data) else None

    def model(self, mu: np.ndarray) -> ConfigurationModel:
        return ConfigurationModel(N=self.data.N, K=self.data.K, mu=mu, Sigma=self.Sigma, s=self.s, R=self.R)

    def log_densities(self, model: ConfigurationModel) -> np.ndarray:
        if self.batch is None:
            return np.zeros(0)
        params = self.batch.params(model)
        if self.form == DensityForm.POLYNOMIAL:
            return log_density_polynomial_batch(params, model.N, model.K)
        return np.array([
            density_series(params.item(i), self.policy).log_value.log_magnitude
            for i in range(len(params))
        ])

    def __call__(self, mu: np.ndarray) -> float:
        return self.evaluate(self.model(mu))

    def evaluate(self, model: ConfigurationModel) -> float:
        # fixed summation order keeps repeated evaluations bit-identical
        return math.fsum(self.log_densities(model))


def loglik(data: Dataset, model: ConfigurationModel, form: DensityForm = DensityForm.POLYNOMIAL,
           policy: Optional[TruncationPolicy] = None) -> float:
    """Sum of log configuration densities over the dataset"""
    if len(data) == 0:
        return 0.0
    if (data.N, data.K) != (model.N, model.K):
        raise ParameterError(f"dataset is for N={data.N}, K={data.K}; model for N={model.N}, K={model.K}")
    return ConfigurationLikelihood(data, model.Sigma, model.s, model.R, form, policy).evaluate(model)


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    simplex = np.tile(x0, (x0.size + 1, 1))
    simplex[1:] += step * np.eye(x0.size)
    return simplex


def fit_mu(
    data: Dataset,
    Sigma: np.ndarray,
    s: float,
    R: float,
    init: Optional[np.ndarray] = None,
    budget: Optional[int] = None,
    form: DensityForm = DensityForm.POLYNOMIAL,
    simplex_step: Optional[float] = None,
) -> FitResult:
    """Nelder-Mead maximum likelihood estimate of mu with Sigma, s and R held fixed"""
    budget = Config.FIT_BUDGET if budget is None else budget
    simplex_step = Config.FIT_SIMPLEX_STEP if simplex_step is None else simplex_step
    if budget < 1:
        raise ParameterError(f"budget must be at least 1, got {budget}")
    shape = (data.N - 1, data.K)
    init = np.zeros(shape) if init is None else np.asarray(init, dtype=float)
    if init.shape != shape:
        raise ParameterError(f"init must be {shape}, got {init.shape}")

    likelihood = ConfigurationLikelihood(data, Sigma, s, R, form)
    evaluations = 0
    best_value = -math.inf
    best_theta = init.ravel().copy()
    trace: List[Tuple[int, float]] = []

    def objective(theta: np.ndarray) -> float:
        nonlocal evaluations, best_value, best_theta
        evaluations += 1
        try:
            value = likelihood(theta.reshape(shape))
        except (KummerPearsonError, ValidationError, FloatingPointError) as e:
            logger.debug("Evaluation %d rejected: %s", evaluations, e)
            return math.inf
        if not math.isfinite(value):
            return math.inf
        if value > best_value:
            best_value = value
            best_theta = theta.copy()
        trace.append((evaluations, best_value))
        return -value

    if budget == 1:
        objective(init.ravel())
        logger.info("Single-evaluation fit: loglik=%.10g", best_value)
        return FitResult(mu_hat=init, loglik=best_value, iterations=0, evaluations=evaluations,
                         converged=False, optimizer_trace=trace)

    result = minimize(
        objective,
        init.ravel(),
        method="Nelder-Mead",
        options={
            "initial_simplex": _initial_simplex(init.ravel(), simplex_step),
            "maxfev": budget,
            "maxiter": budget,
            "xatol": Config.FIT_XATOL,
            "fatol": Config.FIT_FATOL,
        },
    )
    logger.info("Nelder-Mead finished after %d iterations, %d evaluations: loglik=%.10g (%s)",
                result.nit, evaluations, best_value, result.message)
    return FitResult(
        mu_hat=best_theta.reshape(shape),
        loglik=best_value,
        iterations=int(result.nit),
        evaluations=evaluations,
        converged=bool(result.success),
        optimizer_trace=trace,
    )
