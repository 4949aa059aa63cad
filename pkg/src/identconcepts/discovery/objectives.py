"""Row-disjointness / row-orthogonality objectives on ``M @ J`` and their gradients.

For a Jacobian ``J`` (``K x L``) and a concept matrix ``M`` (``K x K``) the
Frobenius objective is ``|| arn(MJ) arn(MJ)^T - I ||_F^2``. ``arn`` takes
absolute values (DMA variant, ``take_abs=True``) and normalizes rows; without
the absolute value (IMA variant) only rows are normalized. The determinant
objective is the Hadamard gap ``sum_i log V_ii - log det V`` with
``V = U U^T``.

Stacks of Jacobians ``(N, K, L)`` are accepted everywhere; losses and
gradients are averaged over the stack. Gradients are closed form (no
autodiff) and checked against central differences in the test suite.
"""

import numpy as np

from .._validation import as_jacobian_stack, as_matrix

ABS_ZERO = 1e-12


def arn(a, take_abs=True):
    """Absolute value (optional) followed by L2 row normalization."""
    a = np.asarray(a, dtype=np.float64)
    b = np.abs(a) if take_abs else a
    norms = np.linalg.norm(b, axis=-1, keepdims=True)
    zero = np.argwhere(norms[..., 0] == 0.0)
    if zero.size:
        raise ValueError(f"cannot normalize all-zero row(s) {zero.tolist()}")
    return b / norms


def _forward(m, jac, take_abs):
    m = as_matrix(m, "m", square=True)
    jac = as_jacobian_stack(jac)
    if jac.shape[1] != m.shape[1]:
        raise ValueError(f"M is {m.shape} but Jacobians have {jac.shape[1]} rows")
    a = np.matmul(m, jac)
    u = arn(a, take_abs)
    return m, jac, a, u


def _backprop(dl_du, jac, a, u, take_abs):
    """Chain ``dL/dU`` through row normalization, abs and ``A = M J``; mean over the stack."""
    b = np.abs(a) if take_abs else a
    norms = np.linalg.norm(b, axis=-1, keepdims=True)
    radial = np.sum(dl_du * u, axis=-1, keepdims=True)
    dl_db = (dl_du - radial * u) / norms
    if take_abs:
        sign = np.sign(a)
        sign[np.abs(a) < ABS_ZERO] = 0.0
        dl_da = sign * dl_db
    else:
        dl_da = dl_db
    return np.tensordot(dl_da, jac, axes=([0, 2], [0, 2])) / jac.shape[0]


def frobenius_terms(m, jac, take_abs=True):
    """Per-Jacobian Frobenius losses, shape ``(N,)``."""
    _, _, _, u = _forward(m, jac, take_abs)
    k = u.shape[1]
    resid = u @ np.swapaxes(u, 1, 2) - np.eye(k)
    return np.sum(resid ** 2, axis=(1, 2))


def loss(m, jac, take_abs=True):
    """Mean Frobenius objective ``||arn(MJ) arn(MJ)^T - I||_F^2``."""
    return float(np.mean(frobenius_terms(m, jac, take_abs)))


def loss_grad(m, jac, take_abs=True):
    """Gradient of :func:`loss` with respect to ``m``.

    Entries of ``MJ`` with magnitude below ``1e-12`` get subgradient 0 in the
    absolute-value variant.
    """
    _, jac, a, u = _forward(m, jac, take_abs)
    k = u.shape[1]
    resid = u @ np.swapaxes(u, 1, 2) - np.eye(k)
    return _backprop(4.0 * resid @ u, jac, a, u, take_abs)


def loss_and_grad(m, jac, take_abs=True):
    _, jac, a, u = _forward(m, jac, take_abs)
    k = u.shape[1]
    resid = u @ np.swapaxes(u, 1, 2) - np.eye(k)
    value = float(np.mean(np.sum(resid ** 2, axis=(1, 2))))
    return value, _backprop(4.0 * resid @ u, jac, a, u, take_abs)


def _det_parts(u):
    v = u @ np.swapaxes(u, 1, 2)
    sign, logdet = np.linalg.slogdet(v)
    if np.any(sign <= 0) or not np.all(np.isfinite(logdet)):
        bad = np.flatnonzero((sign <= 0) | ~np.isfinite(logdet)).tolist()
        raise np.linalg.LinAlgError(f"Gram matrix V is singular for Jacobian(s) {bad}")
    diag = np.diagonal(v, axis1=1, axis2=2)
    return v, np.sum(np.log(diag), axis=1) - logdet


def loss_det(m, jac, take_abs=True):
    """Mean Hadamard gap ``sum_i log V_ii - log det V``, ``V = arn(MJ) arn(MJ)^T``."""
    _, _, _, u = _forward(m, jac, take_abs)
    _, values = _det_parts(u)
    return float(np.mean(values))


def loss_det_grad(m, jac, take_abs=True):
    """Gradient of :func:`loss_det` with respect to ``m``."""
    return loss_det_and_grad(m, jac, take_abs)[1]


def loss_det_and_grad(m, jac, take_abs=True):
    _, jac, a, u = _forward(m, jac, take_abs)
    v, values = _det_parts(u)
    diag = np.diagonal(v, axis1=1, axis2=2)
    dl_dv = np.einsum("ni,ij->nij", 1.0 / diag, np.eye(v.shape[1])) - np.linalg.inv(v)
    return float(np.mean(values)), _backprop(2.0 * dl_dv @ u, jac, a, u, take_abs)
