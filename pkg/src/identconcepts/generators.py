"""Differentiable synthetic image generators with closed-form Jacobians.

Three generators are provided:

``fourbars``
    Four vertical column bands. Bands 1-3 have uniform intensity ``z_k``;
    band 4 holds a smooth horizontal stripe (Gaussian profile) whose row
    position is ``z_4``. Jacobian columns have disjoint support.
``fourbars_nemr``
    Same layout, but band ``k`` shows ``(z_k + c_k z_k^2) / (1 + c_k)`` with
    ``c = (1, 2, 4)``, so Jacobian column norms change unequally between
    points while staying bounded away from zero.
``colorbar``
    A single horizontal bar with intensity ``z_1``, width ``z_2`` and
    vertical position ``z_3``. The row profile is a periodic trigonometric
    polynomial of degree < H/2 with constant L2 norm, so on the pixel grid
    the three Jacobian columns are exactly orthogonal although they overlap.

Images are flattened row-major, pixel index ``row * W + col``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DomainError

KINDS = ("fourbars", "fourbars_nemr", "colorbar")
DOMAIN = (0.05, 0.95)
RENDER_DOMAIN = (0.0, 1.0)
MECHANISM_TOL = 1e-6
NEMR_CURVATURE = np.array([1.0, 2.0, 4.0])
NEMR_TOL = 1e-6

_ALIASES = {
    "fourbars": "fourbars",
    "four_bars": "fourbars",
    "fourbarsnemr": "fourbars_nemr",
    "fourbars_nemr": "fourbars_nemr",
    "four_bars_nemr": "fourbars_nemr",
    "colorbar": "colorbar",
    "color_bar": "colorbar",
}

# colorbar sharpness rho(z2) = _RHO_MAX - _RHO_SPAN * z2, larger z2 -> wider bar
_RHO_MAX = 0.9
_RHO_SPAN = 0.6


@dataclass(frozen=True)
class GeneratorSpec:
    """Which generator to use and at what resolution.

    ``skew`` adds an odd harmonic to the colorbar profile; it breaks the
    orthogonality of the Jacobian columns and exists for negative controls.
    """

    kind: str = "fourbars"
    image_size: tuple = (16, 16)
    smoothness: float = 1.5
    skew: float = 0.0

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        h, w = (int(v) for v in self.image_size)
        object.__setattr__(self, "image_size", (h, w))
        if h < 8 or w < 8:
            raise ValueError(f"image_size must be at least 8x8, got {h}x{w}")
        if not 0.0 < self.smoothness <= h / 4:
            raise ValueError(f"smoothness must lie in (0, H/4] = (0, {h / 4}], got {self.smoothness}")

    @property
    def n_components(self):
        return 3 if self.kind == "colorbar" else 4

    @property
    def n_pixels(self):
        return self.image_size[0] * self.image_size[1]

    @property
    def domain(self):
        return np.tile(DOMAIN, (self.n_components, 1))


@dataclass(frozen=True)
class Image:
    height: int
    width: int
    channels: int
    pixels: np.ndarray

    @property
    def array(self):
        shape = (self.height, self.width) if self.channels == 1 else (self.height, self.width, self.channels)
        return self.pixels.reshape(shape)


@dataclass(frozen=True)
class GeneratorJacobian:
    """``matrix[:, k]`` is the derivative of the flattened image w.r.t. ``z_k``."""

    matrix: np.ndarray
    at: np.ndarray


def _check_z(spec, z, strict):
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.shape != (spec.n_components,):
        raise ValueError(f"{spec.kind} takes {spec.n_components} components, got {z.shape[0]}")
    lo, hi = DOMAIN if strict else RENDER_DOMAIN
    bad = (z <= lo) | (z >= hi) if strict else (z < lo) | (z > hi)
    if np.any(bad) or not np.all(np.isfinite(z)):
        where = "strictly inside" if strict else "inside"
        raise DomainError(f"components {np.flatnonzero(bad).tolist()} not {where} [{lo}, {hi}]: {z}")
    return z


def _bands(width):
    edges = np.linspace(0, width, 5).round().astype(int)
    return [slice(edges[k], edges[k + 1]) for k in range(4)]


# ---------------------------------------------------------------- fourbars --

def _fourbars_rows(spec, z):
    """Per-band row profiles (H, 4) and their derivatives (H, 4)."""
    h, _ = spec.image_size
    rows = np.arange(h, dtype=np.float64)
    curve = NEMR_CURVATURE if spec.kind == "fourbars_nemr" else np.zeros(3)
    values = np.empty((h, 4))
    derivs = np.empty((h, 4))
    values[:, :3] = (z[:3] + curve * z[:3] ** 2) / (1.0 + curve)
    derivs[:, :3] = (1.0 + 2.0 * curve * z[:3]) / (1.0 + curve)
    sigma = spec.smoothness
    centre = z[3] * (h - 1)
    t = rows - centre
    bump = np.exp(-t ** 2 / (2.0 * sigma ** 2))
    values[:, 3] = bump
    derivs[:, 3] = bump * t / sigma ** 2 * (h - 1)
    return values, derivs


def _fourbars_image(spec, values):
    h, w = spec.image_size
    img = np.zeros((h, w, values.shape[-1]))
    for k, band in enumerate(_bands(w)):
        img[:, band, k] = values[:, k:k + 1]
    return img


# ---------------------------------------------------------------- colorbar --

def _harmonics(h):
    n = (h - 1) // 2
    m = np.arange(n + 1, dtype=np.float64)
    return m, 1.0 - m / (n + 1)


def _norm_factor(rho, m, fejer):
    a = rho ** m * fejer
    da = np.where(m > 0, m * rho ** np.maximum(m - 1, 0), 0.0) * fejer
    s = a[0] ** 2 + 0.5 * np.sum(a[1:] ** 2)
    ds = np.sum(a[1:] * da[1:])
    return a, da, s ** -0.5, -0.5 * s ** -1.5 * ds


def _colorbar_scale(h):
    m, fejer = _harmonics(h)
    a, _, norm, _ = _norm_factor(_RHO_MAX, m, fejer)
    return 1.0 / (norm * a.sum())


def _colorbar_rows(spec, z):
    """Row profile (H,) and its derivatives w.r.t. z (H, 3)."""
    h, _ = spec.image_size
    m, fejer = _harmonics(h)
    kappa = _colorbar_scale(h)
    rho = _RHO_MAX - _RHO_SPAN * z[1]
    a, da, norm, dnorm = _norm_factor(rho, m, fejer)
    centre = z[2] * (h - 1)
    phase = 2.0 * np.pi * (np.arange(h) - centre) / h
    cos = np.cos(np.outer(phase, m))
    sin = np.sin(np.outer(phase, m))
    profile = kappa * (norm * cos @ a + spec.skew * np.sin(phase))
    d_rho = kappa * (dnorm * cos @ a + norm * cos @ da)
    d_centre = kappa * (norm * sin @ (a * m) - spec.skew * np.cos(phase)) * (2.0 * np.pi / h)
    derivs = np.stack(
        [profile, z[0] * d_rho * -_RHO_SPAN, z[0] * d_centre * (h - 1)], axis=1
    )
    return z[0] * profile, derivs


# ------------------------------------------------------------------ public --

def render(spec, z):
    """Render the image for components ``z`` in ``[0, 1]``; pixels are clamped to [0, 1].

    Sampling and Jacobians use the narrower interior ``DOMAIN``; rendering
    also accepts the endpoints so that black and saturated bars can be drawn.
    """
    z = _check_z(spec, z, strict=False)
    h, w = spec.image_size
    if spec.kind == "colorbar":
        row, _ = _colorbar_rows(spec, z)
        img = np.repeat(row[:, None], w, axis=1)
    else:
        values, _ = _fourbars_rows(spec, z)
        img = _fourbars_image(spec, values).sum(axis=-1)
    return Image(h, w, 1, np.clip(img, 0.0, 1.0).ravel())


def render_raw(spec, z):
    """Unclamped flattened image, the function whose Jacobian :func:`jacobian` returns."""
    z = _check_z(spec, z, strict=False)
    h, w = spec.image_size
    if spec.kind == "colorbar":
        row, _ = _colorbar_rows(spec, z)
        return np.repeat(row[:, None], w, axis=1).ravel()
    values, _ = _fourbars_rows(spec, z)
    return _fourbars_image(spec, values).sum(axis=-1).ravel()


def jacobian(spec, z):
    """Closed-form ``L x K`` generator Jacobian at an interior point ``z``."""
    z = _check_z(spec, z, strict=True)
    h, w = spec.image_size
    if spec.kind == "colorbar":
        _, derivs = _colorbar_rows(spec, z)
        mat = np.repeat(derivs[:, None, :], w, axis=1).reshape(h * w, 3)
    else:
        _, derivs = _fourbars_rows(spec, z)
        mat = _fourbars_image(spec, derivs).reshape(h * w, 4)
    return GeneratorJacobian(mat, z.copy())


def _offdiag_ratio(gram):
    off = gram - np.diag(np.diag(gram))
    return np.max(np.abs(off)) / np.min(np.diag(gram))


def check_mechanism(spec, z):
    """Test the disjoint (DMA) and orthogonal (IMA) mechanism conditions at ``z``.

    Returns a dict with ``dma_holds``, ``ima_holds`` and ``off_diag_ratio``
    (largest off-diagonal of ``J^T J`` over its smallest diagonal entry).
    """
    jac = jacobian(spec, z).matrix
    abs_ratio = _offdiag_ratio(np.abs(jac).T @ np.abs(jac))
    ratio = _offdiag_ratio(jac.T @ jac)
    dma = bool(abs_ratio <= MECHANISM_TOL)
    return {
        "dma_holds": dma,
        "ima_holds": bool(dma or ratio <= MECHANISM_TOL),
        "off_diag_ratio": float(ratio),
        "abs_off_diag_ratio": float(abs_ratio),
    }


def check_nemr(spec, z_a, z_b):
    """Non-equal magnitude ratios between two points.

    ``ratios[i] = diag(J^T J)(z_b)[i] / diag(J^T J)(z_a)[i]``; the condition
    holds when all ratios are pairwise distinct (relative gap ``1e-6``).
    """
    diag_a = np.sum(jacobian(spec, z_a).matrix ** 2, axis=0)
    diag_b = np.sum(jacobian(spec, z_b).matrix ** 2, axis=0)
    if np.any(diag_a <= 0.0) or np.any(diag_b <= 0.0):
        raise ValueError("Jacobian has a zero column: rank collapse")
    ratios = diag_b / diag_a
    gaps = np.abs(ratios[:, None] - ratios[None, :])
    k = ratios.size
    pairwise = gaps[~np.eye(k, dtype=bool)]
    satisfied = bool(np.all(pairwise > NEMR_TOL * ratios.max()))
    return {"satisfied": satisfied, "ratios": ratios}


def write_pgm(image, path):
    """Write a grayscale image as binary PGM (P5, maxval 255)."""
    if image.channels != 1:
        raise ValueError("PGM output supports single-channel images only")
    data = np.round(np.clip(image.pixels, 0.0, 1.0) * 255).astype(np.uint8)
    path = Path(path)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())
    return path


def pgm_name(kind, seed, index):
    return f"{kind}_{seed}_{index}.pgm"
