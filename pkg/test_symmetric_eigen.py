import numpy as np
import pytest

from conftest import random_spd
from errors import EigenConvergenceError
from symmetric_eigen import jacobi_eigh, sym_inv_sqrt, sym_sqrt


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_eigenvalues_match_lapack(rng, n):
    for _ in range(20):
        B = rng.standard_normal((n, n))
        a = B + B.T
        w, _ = jacobi_eigh(a)
        assert w == pytest.approx(np.linalg.eigvalsh(a), rel=1e-10, abs=1e-12)


def test_reconstruction_on_a_stack(rng):
    B = rng.standard_normal((50, 4, 4))
    a = B + np.swapaxes(B, -1, -2)
    w, v = jacobi_eigh(a)
    assert w.shape == (50, 4) and v.shape == (50, 4, 4)
    assert np.all(np.diff(w, axis=-1) >= 0)
    rebuilt = np.einsum("nij,nj,nkj->nik", v, w, v)
    assert np.allclose(rebuilt, a, atol=1e-11)
    assert np.allclose(np.swapaxes(v, -1, -2) @ v, np.eye(4), atol=1e-12)


def test_diagonal_input_is_returned_sorted():
    w, v = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
    assert w.tolist() == [-1.0, 2.0, 3.0]
    assert np.array_equal(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_zero_matrix():
    w, _ = jacobi_eigh(np.zeros((3, 3)))
    assert np.all(w == 0.0)


def test_sweep_limit():
    a = np.array([[1.0, 0.5, 0.2], [0.5, 2.0, 0.3], [0.2, 0.3, 3.0]])
    with pytest.raises(EigenConvergenceError):
        jacobi_eigh(a, max_sweeps=0)


def test_square_input_required():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


def test_matrix_roots(rng):
    S = random_spd(rng, 4, spread=1.0)
    root = sym_sqrt(S)
    inv_root = sym_inv_sqrt(S)
    assert np.allclose(root @ root, S, atol=1e-12)
    assert np.allclose(inv_root @ S @ inv_root, np.eye(4), atol=1e-11)


def test_inverse_root_needs_positive_definite():
    with pytest.raises(np.linalg.LinAlgError):
        sym_inv_sqrt(np.diag([1.0, 0.0]))
