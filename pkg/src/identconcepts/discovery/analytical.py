"""Closed-form and fixed-point concept discovery: PCA, FastICA, DMA and IMA."""

import logging
import warnings

import numpy as np
from scipy.linalg import qr

from .._validation import as_jacobian_stack, as_matrix, as_samples, check_rng
from ..exceptions import RankDeficientError
from ..numerics import cholesky, inv_lower, inv_sqrt_spd, sym_eig
from . import objectives
from .concept_matrix import ConceptMatrix

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10
DEGENERACY_TOL = 1e-8


class ICAConvergenceWarning(UserWarning):
    pass


def _covariance(x):
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / (x.shape[0] - 1)
    return xc, 0.5 * (cov + cov.T)


def pca(embeddings):
    """Rows of ``M`` are the covariance eigenvectors, largest variance first."""
    x = as_samples(embeddings, "embeddings")
    n, k = x.shape
    if n <= k:
        raise ValueError(f"PCA needs more samples than dimensions, got N={n}, K={k}")
    _, cov = _covariance(x)
    w, v = sym_eig(cov)
    if w[-1] <= RANK_RTOL * max(w[0], np.finfo(float).tiny):
        raise RankDeficientError(f"covariance is rank deficient: eigenvalues {w}")
    return ConceptMatrix(v.T.copy(), "pca", {"final_loss": None, "iterations": 0, "variances": w})


def _whitening(x):
    xc, cov = _covariance(x)
    w, v = sym_eig(cov)
    if w[-1] <= RANK_RTOL * max(w[0], np.finfo(float).tiny):
        raise RankDeficientError(f"covariance is rank deficient: eigenvalues {w}")
    white = v.T / np.sqrt(w)[:, None]
    return xc @ white.T, white


def _sym_decorrelate(w):
    return inv_sqrt_spd(w @ w.T) @ w


def fastica(embeddings, max_iter=200, tol=1e-6, seed=None):
    """Symmetric FastICA with the ``tanh`` contrast.

    Center, whiten with the covariance eigenbasis, then iterate the parallel
    fixed-point update ``W <- E[g(WX) X^T] - diag(E[g'(WX)]) W`` followed by
    ``W <- (W W^T)^{-1/2} W``. Returns ``M = W @ whitening``.
    """
    x = as_samples(embeddings, "embeddings")
    n, k = x.shape
    if n <= k:
        raise ValueError(f"FastICA needs more samples than dimensions, got N={n}, K={k}")
    xw, white = _whitening(x)
    rng = check_rng(seed)
    w = _sym_decorrelate(rng.standard_normal((k, k)))
    converged = False
    it = 0
    change = np.inf
    for it in range(1, max_iter + 1):
        proj = xw @ w.T
        g = np.tanh(proj)
        g_prime = 1.0 - g ** 2
        w_new = _sym_decorrelate(g.T @ xw / n - g_prime.mean(axis=0)[:, None] * w)
        change = np.max(np.abs(np.abs(np.sum(w_new * w, axis=1)) - 1.0))
        w = w_new
        if change < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"FastICA did not converge in {max_iter} iterations (last change {change:.2e})",
            ICAConvergenceWarning,
            stacklevel=2,
        )
    diag = {"final_loss": None, "iterations": it, "converged": converged, "last_change": float(change)}
    return ConceptMatrix(w @ white, "ica", diag)


def dma_analytical(jac):
    """Invert ``K`` linearly independent Jacobian columns chosen by pivoted QR.

    Only the first Jacobian is used when a stack is passed.
    """
    j = as_jacobian_stack(jac)[0]
    k = j.shape[0]
    if j.shape[1] < k:
        raise RankDeficientError(f"Jacobian has only {j.shape[1]} columns for K={k}")
    _, r, piv = qr(j, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[k - 1] <= RANK_RTOL * diag[0]:
        raise RankDeficientError(
            f"Jacobian rank < {k}: pivot magnitudes {diag[:k]}"
        )
    cols = np.sort(piv[:k])
    m = np.linalg.inv(j[:, cols])
    return ConceptMatrix(
        m, "dma_analytic",
        {"final_loss": objectives.loss(m, j, True), "iterations": 0, "columns": cols},
    )


def ima_analytical(sigma_a, sigma_b):
    """Simultaneously diagonalize two Jacobian Gram matrices ``J J^T``.

    ``U = chol(sigma_a)^-1``, ``V`` = eigenvectors of ``U sigma_b U^T``,
    ``M = V^T U``. When two eigenvalues coincide (relative gap ``1e-8``) the
    rotation inside that eigenspace is arbitrary; this is flagged as
    ``diagnostics["nemr_degenerate"]``.
    """
    sigma_a = as_matrix(sigma_a, "sigma_a", square=True)
    sigma_b = as_matrix(sigma_b, "sigma_b", square=True)
    u = inv_lower(cholesky(sigma_a))
    inner = u @ sigma_b @ u.T
    eigvals, v = sym_eig(0.5 * (inner + inner.T))
    gaps = np.abs(np.diff(eigvals))
    degenerate = bool(gaps.size and np.min(gaps) <= DEGENERACY_TOL * np.max(np.abs(eigvals)))
    if degenerate:
        logger.info("ima_analytical: repeated eigenvalues %s (NEMR violated)", eigvals)
    m = v.T @ u
    return ConceptMatrix(
        m, "ima_analytic",
        {"final_loss": None, "iterations": 0, "nemr_degenerate": degenerate, "eigenvalues": eigvals},
    )


def ima_analytical_from_jacobians(jac_a, jac_b):
    """:func:`ima_analytical` on the Gram matrices of two encoder Jacobians."""
    ja = as_jacobian_stack(jac_a)[0]
    jb = as_jacobian_stack(jac_b)[0]
    result = ima_analytical(ja @ ja.T, jb @ jb.T)
    result.diagnostics["final_loss"] = objectives.loss(result.m, np.stack([ja, jb]), False)
    return result
