"""Central-difference checks of the closed-form objective gradients."""

import numpy as np

from ..discovery import objectives

STEP = 1e-6
ZERO_GRAD = 1e-12

VARIANTS = {
    "frobenius_abs": (objectives.loss, objectives.loss_grad, True),
    "frobenius_raw": (objectives.loss, objectives.loss_grad, False),
    "determinant_abs": (objectives.loss_det, objectives.loss_det_grad, True),
    "determinant_raw": (objectives.loss_det, objectives.loss_det_grad, False),
}


def numerical_grad(fn, m, h=STEP):
    """Central differences of the scalar ``fn`` at ``m``, entry by entry."""
    m = np.asarray(m, dtype=np.float64)
    out = np.empty_like(m)
    for idx in np.ndindex(m.shape):
        up = m.copy()
        down = m.copy()
        up[idx] += h
        down[idx] -= h
        out[idx] = (fn(up) - fn(down)) / (2.0 * h)
    return out


def relative_error(analytic, numeric):
    """``max |a - n| / max |n|``; absolute error when both gradients are below ``1e-12``."""
    scale = max(np.max(np.abs(numeric)), np.max(np.abs(analytic)))
    err = np.max(np.abs(analytic - numeric))
    return float(err / scale) if scale > ZERO_GRAD else float(err)


def random_instance(rng, k=None, n_pixels=20, n_jac=2):
    k = int(rng.integers(2, 5)) if k is None else k
    m = rng.standard_normal((k, k)) + 2.0 * np.eye(k)
    jac = rng.standard_normal((n_jac, k, n_pixels))
    return m, jac


def grad_check(variant, seed=0, instances=20, k=None):
    """Largest relative gradient error of ``variant`` over random instances."""
    value_fn, grad_fn, take_abs = VARIANTS[variant]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        m, jac = random_instance(rng, k)
        analytic = grad_fn(m, jac, take_abs)
        numeric = numerical_grad(lambda x: value_fn(x, jac, take_abs), m)
        worst = max(worst, relative_error(analytic, numeric))
    return worst
