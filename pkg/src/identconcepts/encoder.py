"""Analytic faithful encoders for the synthetic generators.

The encoder is never materialized in pixel space. Concept discovery only
needs embeddings ``e = D z`` and encoder Jacobians, and for a faithful
encoder the canonical Jacobian is ``J_f = D J_g^+``: it maps each generator
column back to the matching column of ``D`` and annihilates everything
orthogonal to ``span(J_g)``.
"""

import zlib
from dataclasses import dataclass

import numpy as np

from . import generators
from .numerics import pinv

MAX_CONDITION = 20.0
MAX_REJECTIONS = 1000
NOISE_SCALES = ("absolute", "peak")


@dataclass(frozen=True)
class MixingMatrix:
    d: np.ndarray
    seed: object = None
    condition_number: float = 1.0

    @property
    def k(self):
        return self.d.shape[0]


@dataclass(frozen=True)
class EncoderJacobian:
    """``K x L`` encoder Jacobian (or any homogeneous attribution matrix)."""

    matrix: np.ndarray
    at: np.ndarray = None


def sample_mixing(k, seed=None, max_condition=MAX_CONDITION):
    """Random full-rank ``k x k`` mixing with i.i.d. U[-1, 1] entries.

    Draws are rejected until the 2-norm condition number is at most
    ``max_condition``; after 1000 consecutive rejections a ``ValueError``
    is raised.
    """
    if k < 2:
        raise ValueError(f"mixing needs k >= 2, got {k}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REJECTIONS):
        d = rng.uniform(-1.0, 1.0, size=(k, k))
        cond = np.linalg.cond(d)
        if cond <= max_condition:
            return MixingMatrix(d, seed, float(cond))
    raise ValueError(
        f"no {k}x{k} mixing with condition number <= {max_condition} "
        f"in {MAX_REJECTIONS} draws; loosen max_condition"
    )


def identity_mixing(k):
    return MixingMatrix(np.eye(k), None, 1.0)


def orthonormal_mixing(k, seed=None):
    """Haar-random orthonormal mixing (QR of a Gaussian matrix)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    q = q * np.sign(np.diag(r))
    return MixingMatrix(q, seed, 1.0)


@dataclass(frozen=True)
class FaithfulEncoderOracle:
    """Faithful encoder for ``generator`` with embedding ``f(g(z)) = D z``.

    With ``noise_sigma > 0`` the Jacobians get additive i.i.d. Gaussian
    noise. The noise is a pure function of ``(seed, z)``, so repeated
    queries at the same point return the same noisy matrix.
    """

    generator: generators.GeneratorSpec
    mixing: MixingMatrix
    noise_sigma: float = 0.0
    seed: int = 0
    noise_scale: str = "absolute"

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.noise_scale not in NOISE_SCALES:
            raise ValueError(f"noise_scale must be one of {NOISE_SCALES}, got {self.noise_scale!r}")
        if self.mixing.k != self.generator.n_components:
            raise ValueError(
                f"mixing is {self.mixing.k}x{self.mixing.k} but generator has "
                f"{self.generator.n_components} components"
            )

    @property
    def d(self):
        return self.mixing.d

    def embed(self, z):
        """``D z`` for one point ``(K,)`` or a batch ``(N, K)``."""
        z = np.asarray(z, dtype=np.float64)
        return z @ self.d.T

    def _noise(self, z, shape):
        key = zlib.crc32(np.ascontiguousarray(z, dtype=np.float64).tobytes())
        rng = np.random.default_rng([int(self.seed) & 0xFFFFFFFF, key])
        return rng.normal(0.0, self.noise_sigma, size=shape)

    def jacobian(self, z):
        z = np.asarray(z, dtype=np.float64).ravel()
        j_g = generators.jacobian(self.generator, z).matrix
        j_f = self.d @ pinv(j_g)
        if self.noise_sigma > 0:
            noise = self._noise(z, j_f.shape)
            if self.noise_scale == "peak":
                noise *= np.max(np.abs(j_f))
            j_f = j_f + noise
        return EncoderJacobian(j_f, z.copy())

    def jacobians(self, zs):
        """Stack of encoder Jacobians ``(N, K, L)`` for a batch of points."""
        zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
        return np.stack([self.jacobian(z).matrix for z in zs])


def embed(oracle, z):
    return oracle.embed(z)


def encoder_jacobian(oracle, z):
    return oracle.jacobian(z)
