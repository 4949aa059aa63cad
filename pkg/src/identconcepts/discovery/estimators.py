"""scikit-learn style wrappers around the discovery routines.

PCA and FastICA are fitted on embeddings ``(N, K)``. DMA and IMA are fitted
on encoder Jacobians (or any homogeneous attributions) ``(N, K, L)``. All
four then ``transform`` embeddings into concept scores ``E @ M.T``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .._validation import as_jacobian_stack
from . import analytical
from .sgd import SgdConfig, sgd_discover

MAX_PAIR_TRIES = 10


class _ConceptTransformer(TransformerMixin, BaseEstimator):
    def _store(self, result):
        self.concept_matrix_ = result
        self.components_ = result.m
        self.n_features_in_ = result.k
        return self

    def transform(self, X):
        """Concept scores ``X @ components_.T``."""
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.components_.T


class PCAConcepts(_ConceptTransformer):
    """Concept directions from the covariance eigenbasis of the embeddings."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        return self._store(analytical.pca(X))


class FastICAConcepts(_ConceptTransformer):
    """Symmetric FastICA (``tanh`` contrast) on the embeddings.

    Parameters
    ----------
    max_iter : int, default=200
    tol : float, default=1e-6
    random_state : int, Generator or None
    """

    def __init__(self, max_iter=200, tol=1e-6, random_state=None):
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        return self._store(
            analytical.fastica(X, max_iter=self.max_iter, tol=self.tol, seed=self.random_state)
        )


class _JacobianConcepts(_ConceptTransformer):
    def __init__(self, solver="analytical", sgd_config=None):
        self.solver = solver
        self.sgd_config = sgd_config

    def _check_jacobians(self, J):
        if self.solver not in ("analytical", "sgd"):
            raise ValueError(f"solver must be 'analytical' or 'sgd', got {self.solver!r}")
        return as_jacobian_stack(J, "J")

    def _config(self):
        return SgdConfig() if self.sgd_config is None else self.sgd_config


class DMAConcepts(_JacobianConcepts):
    """Concept directions under which Jacobian rows have disjoint support.

    Parameters
    ----------
    solver : {"analytical", "sgd"}, default="analytical"
        ``"analytical"`` inverts ``K`` pivoted-QR columns of the first
        Jacobian; ``"sgd"`` minimizes the absolute-value objective over all
        Jacobians.
    sgd_config : SgdConfig, optional
        Optimizer settings for ``solver="sgd"``.

    Attributes
    ----------
    components_ : ndarray of shape (K, K)
        Rows are concept directions.
    concept_matrix_ : ConceptMatrix
    """

    def fit(self, J, y=None):
        J = self._check_jacobians(J)
        if self.solver == "analytical":
            return self._store(analytical.dma_analytical(J))
        return self._store(sgd_discover(J, self._config(), take_abs=True))


class IMAConcepts(_JacobianConcepts):
    """Concept directions under which Jacobian rows are orthogonal.

    The analytical solver needs two Jacobians whose Gram-matrix ratios are
    distinct. It tries consecutive pairs ``(J[0], J[1])``, ``(J[2], J[3])``,
    ... (at most 10) and keeps the first without repeated eigenvalues; if
    every pair is degenerate the last result is kept and
    ``concept_matrix_.diagnostics["nemr_degenerate"]`` is ``True``.
    """

    def fit(self, J, y=None):
        J = self._check_jacobians(J)
        if self.solver == "sgd":
            return self._store(sgd_discover(J, self._config(), take_abs=False))
        if J.shape[0] < 2:
            raise ValueError("analytical IMA needs at least two Jacobians")
        result = None
        for t in range(min(MAX_PAIR_TRIES, J.shape[0] // 2)):
            result = analytical.ima_analytical_from_jacobians(J[2 * t], J[2 * t + 1])
            result.diagnostics["pair"] = [2 * t, 2 * t + 1]
            if not result.diagnostics["nemr_degenerate"]:
                break
        return self._store(result)
