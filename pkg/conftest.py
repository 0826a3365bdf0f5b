"""
Shared fixtures and independent scalar oracles for the test suite
"""

import numpy as np
import pytest

from models import ConfigurationModel, TruncationPolicy
from shape_configuration import configuration_coords


def hyp1f1_scalar(a: float, c: float, x: float, max_terms: int = 5000) -> float:
    """Plain term-ratio sum of the scalar confluent series 1F1(a; c; x)"""
    total = term = 1.0
    small = 0
    for k in range(max_terms):
        term *= (a + k) / (c + k) * x / (k + 1)
        total += term
        if term == 0.0:
            break
        small = small + 1 if abs(term) < 1e-17 * abs(total) else 0
        if small >= 2:
            break
    return total


def hyp2f1_scalar(a: float, b: float, c: float, z: float, max_terms: int = 5000) -> float:
    """Plain term-ratio sum of the Gauss series 2F1(a, b; c; z), |z| < 1"""
    total = term = 1.0
    small = 0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if term == 0.0:
            break
        small = small + 1 if abs(term) < 1e-17 * abs(total) else 0
        if small >= 2:
            break
    return total


def random_spd(rng: np.random.Generator, size: int, spread: float = 0.2) -> np.ndarray:
    B = rng.standard_normal((size, size))
    Sigma = np.eye(size) + spread * (B @ B.T) / size
    return 0.5 * (Sigma + Sigma.T)


def random_model(rng: np.random.Generator, N: int, K: int, mu_scale: float = 0.3,
                 R: float = 2.0, spread: float = 0.2) -> ConfigurationModel:
    return ConfigurationModel(
        N=N,
        K=K,
        mu=mu_scale * rng.standard_normal((N - 1, K)),
        Sigma=random_spd(rng, N - 1, spread),
        s=K * (N - 1) / 2.0 + 2.0,
        R=R,
    )


def random_configuration(rng: np.random.Generator, N: int, K: int) -> np.ndarray:
    return configuration_coords(rng.standard_normal((N - 1, K)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def policy():
    return TruncationPolicy(max_degree=50)
