"""
Cyclic Jacobi eigen-solver for stacks of small symmetric matrices.

    w, v = jacobi_eigh(a)

a may be a single n x n matrix or an array (..., n, n); every matrix in
the stack is rotated at once. Eigenvalues come back ascending, with the
eigenvectors as the columns of v, so that a = v @ diag(w) @ v.T.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from config import Config
from errors import EigenConvergenceError

logger = logging.getLogger(__name__)


def _off_norm(a: np.ndarray) -> np.ndarray:
    diagonal = np.einsum("...ii->...i", a)
    return np.sqrt(np.maximum(np.sum(a * a, axis=(-2, -1)) - np.sum(diagonal * diagonal, axis=-1), 0.0))


def jacobi_eigh(
    a: np.ndarray,
    tol: Optional[float] = None,
    max_sweeps: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    tol = Config.JACOBI_TOLERANCE if tol is None else tol
    max_sweeps = Config.JACOBI_MAX_SWEEPS if max_sweeps is None else max_sweeps

    a = np.array(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    A = a.reshape(-1, n, n)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    V = np.broadcast_to(np.eye(n), A.shape).copy()

    scale = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    threshold = tol * np.where(scale > 0, scale, 1.0)

    for sweep in range(max_sweeps + 1):
        if np.all(_off_norm(A) <= threshold):
            break
        if sweep == max_sweeps:
            raise EigenConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                safe_apq = np.where(active, apq, 1.0)
                theta = (A[:, q, q] - A[:, p, p]) / (2.0 * safe_apq)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                c_col = c[:, None]
                s_col = s[:, None]
                Ap = A[:, :, p].copy()
                Aq = A[:, :, q].copy()
                A[:, :, p] = c_col * Ap - s_col * Aq
                A[:, :, q] = s_col * Ap + c_col * Aq
                Ap = A[:, p, :].copy()
                Aq = A[:, q, :].copy()
                A[:, p, :] = c_col * Ap - s_col * Aq
                A[:, q, :] = s_col * Ap + c_col * Aq
                A[:, p, q] = 0.0
                A[:, q, p] = 0.0
                Vp = V[:, :, p].copy()
                Vq = V[:, :, q].copy()
                V[:, :, p] = c_col * Vp - s_col * Vq
                V[:, :, q] = s_col * Vp + c_col * Vq

    w = np.einsum("...ii->...i", A).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    return w.reshape(batch_shape + (n,)), V.reshape(batch_shape + (n, n))


def sym_apply(a: np.ndarray, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """v @ diag(func(w)) @ v.T for symmetric a (or a stack of them)"""
    w, v = jacobi_eigh(a)
    return np.einsum("...ij,...j,...kj->...ik", v, func(w), v)


def sym_sqrt(a: np.ndarray) -> np.ndarray:
    return sym_apply(a, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def sym_inv_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = jacobi_eigh(a)
    if np.any(w <= 0):
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return np.einsum("...ij,...j,...kj->...ik", v, 1.0 / np.sqrt(w), v)
