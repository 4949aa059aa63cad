"""Component samplers: independent baselines and correlated resampling schemes."""

from dataclasses import dataclass, field

import numpy as np

from .generators import DOMAIN
from .numerics import sym_eig

KINDS = (
    "independent_uniform",
    "independent_nongaussian",
    "correlated_line",
    "correlated_gaussian",
)

# 0-based pair schedule for six components, in fill order
PAIR_FILL_ORDER = (
    (0, 1), (4, 5), (2, 3), (0, 2), (1, 3),
    (1, 5), (3, 5), (2, 4), (0, 5), (1, 4),
    (1, 2), (0, 3), (3, 4), (0, 4), (2, 5),
)

SHRINK = 0.9
RHO_UNDERFLOW = 1e-3
MAX_GAUSSIAN_ROUNDS = 1000
EIG_SLACK = 1e-12


@dataclass(frozen=True)
class ComponentDistribution:
    """Distribution over component vectors in the box ``domain ** k``.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    k : int
        Number of components.
    shape : {"uniform", "laplace"}
        Marginal family for ``independent_nongaussian``.
    i, j : int
        Correlated pair (0-based) for ``correlated_line``.
    s : float
        Line width for ``correlated_line``, relative to the domain width.
    rho : float
        Target pair correlation for ``correlated_gaussian``.
    pairs : tuple of (int, int)
        Correlated pairs for ``correlated_gaussian``.
    eig_floor : float
        Minimum eigenvalue of the correlation matrix.
    spread : float or None
        Gaussian standard deviation as a fraction of the domain width. ``None``
        uses ``sigma = (mu + 0.5) / 2`` with ``mu`` the domain centre, a broad
        Gaussian whose truncated marginals are clearly non-Gaussian. Narrow
        spreads (about 1/6) keep truncation negligible, so the achieved pair
        correlation stays close to the requested one.
    oversample_factor : int
        Candidate pool multiplier for proportional resampling (3-6).
    """

    kind: str = "independent_uniform"
    k: int = 4
    shape: str = "uniform"
    i: int = 0
    j: int = 1
    s: float = 0.1
    rho: float = 0.0
    pairs: tuple = ((0, 1),)
    eig_floor: float = 0.2
    spread: float = None
    oversample_factor: int = 4
    domain: tuple = field(default=DOMAIN)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 3 <= self.oversample_factor <= 6:
            raise ValueError("oversample_factor must lie in [3, 6]")
        if self.kind == "correlated_line":
            if self.i == self.j or not (0 <= self.i < self.k and 0 <= self.j < self.k):
                raise ValueError(f"invalid correlated pair ({self.i}, {self.j}) for k={self.k}")
            if not self.s > 0:
                raise ValueError("s must be positive")
        if self.kind == "correlated_gaussian":
            if not 0.0 <= self.rho < 1.0:
                raise ValueError("rho must lie in [0, 1)")
            if not self.eig_floor > 0:
                raise ValueError("eig_floor must be positive")
            if self.spread is not None and not self.spread > 0:
                raise ValueError("spread must be positive")
            object.__setattr__(self, "pairs", tuple(tuple(int(v) for v in p) for p in self.pairs))
        if self.shape not in ("uniform", "laplace"):
            raise ValueError(f"unknown marginal shape {self.shape!r}")


@dataclass(frozen=True)
class SampleBatch:
    z_samples: np.ndarray
    weights_applied: bool
    seed: object
    metadata: dict = field(default_factory=dict)


def build_correlation_matrix(k, rho, pair_order=(), eig_floor=0.2, scales=None):
    """Correlation matrix with ``rho'`` on the listed pairs.

    ``rho'`` is the largest value of ``rho * 0.9**m`` (m = 0, 1, ...) for which
    the smallest eigenvalue of ``diag(scales) G diag(scales)`` is at least
    ``eig_floor``; ``scales`` defaults to ones, i.e. the check is on ``G``.

    Returns
    -------
    gamma : ndarray of shape (k, k)
    achieved_rho : float
    """
    pairs = [tuple(int(v) for v in p) for p in pair_order]
    if len(set(tuple(sorted(p)) for p in pairs)) != len(pairs):
        raise ValueError("pairs must be distinct")
    for a, b in pairs:
        if a == b or not (0 <= a < k and 0 <= b < k):
            raise ValueError(f"invalid pair ({a}, {b}) for k={k}")
    scales = np.ones(k) if scales is None else np.asarray(scales, dtype=np.float64)
    if not pairs:
        return np.eye(k), float(rho)
    current = float(rho)
    while True:
        gamma = np.eye(k)
        for a, b in pairs:
            gamma[a, b] = gamma[b, a] = current
        eigvals, _ = sym_eig(np.outer(scales, scales) * gamma)
        if eigvals[-1] >= eig_floor - EIG_SLACK:
            return gamma, current
        current *= SHRINK
        if current < RHO_UNDERFLOW:
            raise ValueError(
                f"correlation shrank below {RHO_UNDERFLOW} without reaching "
                f"min eigenvalue {eig_floor}; pair pattern is infeasible"
            )


def _uniform(rng, n, k, domain):
    lo, hi = domain
    return rng.uniform(lo, hi, size=(n, k))


def _laplace(rng, n, k, domain):
    lo, hi = domain
    centre, scale = 0.5 * (lo + hi), (hi - lo) / 8.0
    out = np.empty((0, k))
    while out.shape[0] < n:
        cand = rng.laplace(centre, scale, size=(2 * n, k))
        out = np.vstack([out, cand[np.all((cand >= lo) & (cand <= hi), axis=1)]])
    return out[:n]


def _correlated_line(dist, rng, n):
    lo, hi = dist.domain
    cand = _uniform(rng, dist.oversample_factor * n, dist.k, dist.domain)
    alpha = 1.0  # z_i^max / z_j^max; all components share one domain
    s = dist.s * (hi - lo)
    resid = cand[:, dist.i] - alpha * cand[:, dist.j]
    with np.errstate(divide="ignore", over="ignore"):
        weights = np.exp(-resid ** 2 / (2.0 * s ** 2))
    total = weights.sum()
    if not total > 0:
        raise ValueError(
            f"all candidate weights vanished for s={dist.s}; increase oversample_factor or s"
        )
    idx = rng.choice(cand.shape[0], size=n, replace=True, p=weights / total)
    return cand[idx], {"alpha": alpha, "s_absolute": s}


def _correlated_gaussian(dist, rng, n):
    lo, hi = dist.domain
    gamma, achieved = build_correlation_matrix(dist.k, dist.rho, dist.pairs, dist.eig_floor)
    mu = np.full(dist.k, 0.5 * (lo + hi))
    if dist.spread is None:
        sigma = np.full(dist.k, (mu[0] + 0.5) / 2.0)
    else:
        sigma = np.full(dist.k, dist.spread * (hi - lo))
    cov = np.outer(sigma, sigma) * gamma
    w, v = sym_eig(cov)
    root = v * np.sqrt(np.maximum(w, 0.0))
    out = np.empty((0, dist.k))
    for _ in range(MAX_GAUSSIAN_ROUNDS):
        cand = mu + rng.standard_normal((2 * n, dist.k)) @ root.T
        out = np.vstack([out, cand[np.all((cand >= lo) & (cand <= hi), axis=1)]])
        if out.shape[0] >= n:
            return out[:n], {"achieved_rho": achieved, "sigma": float(sigma[0])}
    raise ValueError("Gaussian rejection sampler could not fill the batch")


def sample(dist, n, seed=None):
    """Draw ``n`` component vectors from ``dist``; deterministic per ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    meta = {"kind": dist.kind}
    if dist.kind == "independent_uniform":
        z, weighted = _uniform(rng, n, dist.k, dist.domain), False
    elif dist.kind == "independent_nongaussian":
        draw = _uniform if dist.shape == "uniform" else _laplace
        z, weighted = draw(rng, n, dist.k, dist.domain), False
        meta["shape"] = dist.shape
    elif dist.kind == "correlated_line":
        z, extra = _correlated_line(dist, rng, n)
        weighted = True
        meta.update(extra)
    else:
        z, extra = _correlated_gaussian(dist, rng, n)
        weighted = False
        meta.update(extra)
    return SampleBatch(z, weighted, seed, meta)
