import math

import numpy as np
import pytest

from errors import TableCeilingError
from models import Partition, SpectralInput
from zonal_poly import MonomialEvaluator, ZonalTable, ZonalTableCache, build_zonal_table, zonal_eval


def test_degree_one_is_the_trace():
    table = build_zonal_table(1)
    assert table.partitions == [(1,)]
    assert table.coefficients.tolist() == [[1.0]]


def test_degree_two_coefficients():
    table = build_zonal_table(2)
    two, one_one = Partition(parts=(2,)), Partition(parts=(1, 1))
    assert table.coefficient(two, two) == pytest.approx(1.0, rel=1e-14)
    assert table.coefficient(two, one_one) == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert table.coefficient(one_one, two) == 0.0
    assert table.coefficient(one_one, one_one) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_degree_two_in_power_sums(rng):
    for x in rng.uniform(-1.0, 2.0, size=(10, 3)):
        spectrum = SpectralInput(eigenvalues=x)
        p1, p2 = x.sum(), (x ** 2).sum()
        assert zonal_eval(Partition(parts=(2,)), spectrum) == pytest.approx((p1 ** 2 + 2 * p2) / 3, rel=1e-12, abs=1e-14)
        assert zonal_eval(Partition(parts=(1, 1)), spectrum) == pytest.approx(2 * (p1 ** 2 - p2) / 3, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("parts, eigs, expected", [
    ((1,), (2.0, 3.0), 5.0),
    ((1, 1, 1), (1.0, 2.0), 0.0),
    ((2,), (1.0, 1.0), 8.0 / 3.0),
])
def test_zonal_eval_examples(parts, eigs, expected):
    assert zonal_eval(Partition(parts=parts), SpectralInput(eigenvalues=eigs)) == pytest.approx(expected, rel=1e-14)


def test_normalization_identity(rng):
    for _ in range(200):
        m = int(rng.integers(1, 5))
        x = SpectralInput(eigenvalues=rng.uniform(0.0, 2.0, size=m))
        evaluator = MonomialEvaluator(x)
        for t in range(9):
            _, values = evaluator.zonal_values(t)
            expected = x.trace ** t
            assert math.fsum(values) == pytest.approx(expected, rel=1e-10, abs=1e-300)


def test_normalization_at_identity():
    for m in range(1, 5):
        x = SpectralInput(eigenvalues=[1.0] * m)
        evaluator = MonomialEvaluator(x)
        for t in range(9):
            _, values = evaluator.zonal_values(t)
            assert math.fsum(values) == pytest.approx(float(m) ** t, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
def test_homogeneity(rng, alpha):
    x = SpectralInput(eigenvalues=rng.uniform(0.1, 1.0, size=3))
    for t in range(1, 7):
        for tau in (Partition(parts=p) for p in build_zonal_table(t, 3).partitions):
            base = zonal_eval(tau, x)
            assert zonal_eval(tau, x.scaled(alpha)) == pytest.approx(alpha ** t * base, rel=1e-12)


def test_permutation_symmetry(rng):
    eigs = rng.uniform(0.0, 2.0, size=4)
    for t in range(1, 7):
        for parts in build_zonal_table(t, 4).partitions:
            tau = Partition(parts=parts)
            reference = zonal_eval(tau, SpectralInput(eigenvalues=eigs))
            for perm in ([3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1]):
                value = zonal_eval(tau, SpectralInput(eigenvalues=eigs[perm]))
                assert value == pytest.approx(reference, rel=1e-13)


def test_coefficients_are_non_negative():
    for t in range(9):
        assert np.all(build_zonal_table(t).coefficients >= 0.0)


def test_restricted_table_matches_full_table():
    full = build_zonal_table(6)
    restricted = build_zonal_table(6, 2)
    for i, tau in enumerate(restricted.partitions):
        for j, lam in enumerate(restricted.partitions):
            assert restricted.coefficients[i, j] == pytest.approx(
                full.coefficients[full.index(tau), full.index(lam)], rel=1e-12, abs=1e-15)


def test_batched_eigenvalues_match_pointwise(rng):
    points = rng.uniform(-1.0, 2.0, size=(6, 3))
    batched = MonomialEvaluator([points[:, i] for i in range(3)])
    for t in range(5):
        parts, values = batched.zonal_values(t)
        assert values.shape == (len(parts), 6)
        for n, point in enumerate(points):
            _, single = MonomialEvaluator(SpectralInput(eigenvalues=point)).zonal_values(t)
            assert values[:, n] == pytest.approx(single, rel=1e-13, abs=1e-14)


def test_table_json_is_deterministic():
    table = build_zonal_table(4)
    text = table.to_json()
    restored = ZonalTable.from_json(text)
    assert restored.partitions == table.partitions
    assert np.array_equal(restored.coefficients, table.coefficients)
    assert restored.to_json() == text


def test_disk_cache_round_trip(tmp_path):
    cache = ZonalTableCache(cache_dir=str(tmp_path))
    built = cache.get(5, 3)
    assert (tmp_path / "zonal_t5_m3.json").exists()

    reloaded = ZonalTableCache(cache_dir=str(tmp_path)).get(5, 3)
    assert reloaded.partitions == built.partitions
    assert np.array_equal(reloaded.coefficients, built.coefficients)


def test_ceiling():
    cache = ZonalTableCache(ceiling=5)
    cache.get(5)
    with pytest.raises(TableCeilingError):
        cache.get(6)
