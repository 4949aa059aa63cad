"""Dense linear-algebra kernels and exact assignment.

All matrices here are small (K <= 32), so the eigensolver is a plain cyclic
Jacobi iteration and every routine works on ``numpy`` arrays.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._validation import as_matrix
from .exceptions import (
    ConvergenceError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    RankDeficientError,
)

SYMMETRY_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _check_symmetric(a):
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetricError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def sym_eig(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array-like of shape (K, K)
        Symmetric matrix.
    tol : float
        Stop once the off-diagonal Frobenius norm drops below ``tol * ||a||_F``.
    max_sweeps : int
        Maximum number of full sweeps over the upper triangle.

    Returns
    -------
    eigenvalues : ndarray of shape (K,)
        Sorted in descending order.
    eigenvectors : ndarray of shape (K, K)
        Orthonormal columns, ``a @ v[:, i] = eigenvalues[i] * v[:, i]``.
    """
    a = _check_symmetric(as_matrix(a, square=True)).copy()
    k = a.shape[0]
    v = np.eye(k)
    norm = np.linalg.norm(a)
    if norm == 0.0 or k == 1:
        return np.diag(a).copy(), v
    threshold = tol * norm

    mask = ~np.eye(k, dtype=bool)

    def off(m):
        return np.sqrt(np.sum(m[mask] ** 2))

    sweeps = 0
    while off(a) > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError("Jacobi eigensolver did not converge", sweeps)
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def cholesky(a):
    """Lower-triangular ``L`` with ``L @ L.T == a`` for symmetric positive definite ``a``.

    Raises
    ------
    NotPositiveDefiniteError
        With the (0-based) index of the first non-positive pivot.
    """
    a = _check_symmetric(as_matrix(a, square=True))
    k = a.shape[0]
    low = np.zeros_like(a)
    for j in range(k):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if not pivot > 0.0:
            raise NotPositiveDefiniteError(j, pivot)
        low[j, j] = np.sqrt(pivot)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def inv_lower(low):
    """Inverse of a lower-triangular matrix by forward substitution."""
    low = as_matrix(low, square=True)
    k = low.shape[0]
    out = np.zeros_like(low)
    eye = np.eye(k)
    for i in range(k):
        out[i] = (eye[i] - low[i, :i] @ out[:i]) / low[i, i]
    return out


def pinv(a, rcond=1e-10):
    """Left pseudo-inverse ``(a.T a)^-1 a.T`` of a full-column-rank matrix."""
    a = as_matrix(a)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[-1] <= rcond * sv[0]:
        smin = sv[-1] if sv.size else 0.0
        smax = sv[0] if sv.size else 0.0
        raise RankDeficientError(
            f"matrix is rank deficient: smallest singular value {smin:.3e} "
            f"vs largest {smax:.3e} (ratio limit {rcond:g})"
        )
    return np.linalg.solve(a.T @ a, a.T)


def inv_sqrt_spd(a):
    """Symmetric inverse square root of an SPD matrix via :func:`sym_eig`."""
    w, v = sym_eig(a)
    if w[-1] <= 0.0:
        raise NotPositiveDefiniteError(int(np.argmin(w)), w[-1])
    return (v / np.sqrt(w)) @ v.T


def best_assignment(score):
    """Permutation ``perm`` maximizing ``sum_i score[i, perm[i]]``.

    Exact linear assignment (scipy's shortest augmenting path solver).
    """
    score = np.asarray(score, dtype=np.float64)
    if score.ndim != 2 or score.shape[0] != score.shape[1]:
        raise ValueError(f"score must be square, got shape {score.shape}")
    if not np.all(np.isfinite(score)):
        raise ValueError("score contains non-finite entries")
    if np.any(score < 0):
        raise ValueError("score must be nonnegative")
    rows, cols = linear_sum_assignment(score, maximize=True)
    perm = np.empty(score.shape[0], dtype=int)
    perm[rows] = cols
    return perm
