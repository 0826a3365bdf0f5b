import math

import numpy as np
import pytest

from conftest import hyp1f1_scalar, hyp2f1_scalar
from errors import DivergenceError, ParameterError
from matrix_hypergeom import (
    CallableCoefficients,
    PearsonCoefficients,
    UnitCoefficients,
    hyp_1f1,
    one_p_one,
    terminating_pearson_batch,
    termination_bound,
)
from models import SpectralInput, TruncationPolicy


def spectrum(*eigs):
    return SpectralInput(eigenvalues=eigs)


class TestHyp1F1:
    def test_zero_argument(self):
        assert hyp_1f1(1.3, 2.7, spectrum(0.0, 0.0)).value == 1.0

    def test_equal_parameters_give_exponential(self):
        assert hyp_1f1(1.5, 1.5, spectrum(0.7)).value == pytest.approx(math.exp(0.7), rel=1e-13)

    def test_known_value(self):
        assert hyp_1f1(1.0, 2.0, spectrum(1.0)).value == pytest.approx(math.e - 1.0, rel=1e-13)

    def test_scalar_reduction(self, rng):
        for _ in range(100):
            a = rng.uniform(0.1, 3.0)
            c = a + rng.uniform(0.1, 3.0)
            x = rng.uniform(-3.0, 3.0)
            result = hyp_1f1(a, c, spectrum(x))
            assert result.converged
            assert result.value == pytest.approx(hyp1f1_scalar(a, c, x), rel=1e-10)

    def test_unit_weights_are_hyp_1f1(self):
        x = spectrum(0.4, -0.2)
        assert one_p_one(UnitCoefficients(), 1.2, 2.5, x).value == hyp_1f1(1.2, 2.5, x).value


class TestOneP1:
    def test_zero_argument_returns_first_weight(self):
        result = one_p_one(PearsonCoefficients(1.3, 2.0), 1.5, 2.5, spectrum(0.0, 0.0))
        assert result.value == pytest.approx(2.0 ** -1.3, rel=1e-14)

    def test_scalar_pearson_weights_give_gauss_series(self, rng):
        for _ in range(100):
            a, b, c = rng.uniform(0.5, 3.0), rng.uniform(0.2, 3.0), rng.uniform(0.5, 4.0)
            d = rng.uniform(1.0, 4.0)
            x = rng.uniform(0.0, 0.4 * d)
            result = one_p_one(PearsonCoefficients(b, d), a, c, spectrum(x))
            expected = d ** -b * hyp2f1_scalar(a, b, c, x / d)
            assert result.value == pytest.approx(expected, rel=1e-8)

    def test_partial_sums_grow_with_degree(self):
        x = spectrum(0.5, 0.3)
        values = [one_p_one(PearsonCoefficients(1.2, 2.0), 1.5, 2.5, x, TruncationPolicy(max_degree=k)).value
                  for k in range(12)]
        assert all(later >= earlier for earlier, later in zip(values, values[1:]))

    def test_vanishing_denominator(self):
        with pytest.raises(ParameterError):
            hyp_1f1(0.5, -1.0, spectrum(0.5))

    def test_divergence_is_reported(self):
        growing = CallableCoefficients(lambda t, trace: float(math.factorial(t)))
        policy = TruncationPolicy(max_degree=40, divergence_horizon=5)
        with pytest.raises(DivergenceError):
            one_p_one(growing, 1.0, 1.0, spectrum(2.0), policy)

    def test_weight_termination(self):
        a, c, d, x = 1.5, 2.5, 2.0, 0.6
        result = one_p_one(PearsonCoefficients(-2.0, d), a, c, spectrum(x))
        assert result.terminated_exactly
        assert result.degree_used == 2
        assert result.value == pytest.approx(d ** 2.0 * hyp2f1_scalar(a, -2.0, c, x / d), rel=1e-13)


class TestTermination:
    @pytest.mark.parametrize("alpha, m, expected", [
        (-1, 2, 2),
        (-0.5, 2, None),
        (0.3, 3, None),
        (0, 3, 0),
        (-3, 3, 9),
    ])
    def test_bound(self, alpha, m, expected):
        assert termination_bound(alpha, m) == expected

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_bit_identical_past_the_bound(self, n):
        x = spectrum(0.8, -0.3)
        at_bound = hyp_1f1(-n, 1.5, x, TruncationPolicy(max_degree=2 * n))
        beyond = hyp_1f1(-n, 1.5, x, TruncationPolicy(max_degree=2 * n + 6))
        assert at_bound.terminated_exactly and beyond.terminated_exactly
        assert at_bound.value == beyond.value
        assert at_bound.degree_used == beyond.degree_used == 2 * n

    def test_policy_below_the_bound_truncates(self):
        result = hyp_1f1(-3, 1.5, spectrum(0.8, 0.4), TruncationPolicy(max_degree=2))
        assert not result.terminated_exactly


def test_batch_polynomial_matches_series(rng):
    b, alpha, c = 1.7, -2.0, 1.0
    points = rng.uniform(0.0, 0.6, size=(7, 2))
    shifted = 1.0 + rng.uniform(0.0, 1.0, size=7)
    values, degree = terminating_pearson_batch(b, alpha, c, shifted, -points)
    assert degree == 4
    for i in range(7):
        series = one_p_one(PearsonCoefficients(b, shifted[i], prefactor=False), alpha, c,
                           SpectralInput(eigenvalues=-points[i]))
        assert series.terminated_exactly
        assert values[i] == pytest.approx(series.value, rel=1e-12)


def test_batch_polynomial_needs_integer_numerator():
    with pytest.raises(ParameterError):
        terminating_pearson_batch(1.0, -1.5, 1.0, np.ones(2), np.zeros((2, 2)))
