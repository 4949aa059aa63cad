"""Mini-batch gradient descent on the DMA / IMA objectives."""

from dataclasses import asdict, dataclass

import numpy as np

from .._validation import as_jacobian_stack
from ..exceptions import OptimizationError
from . import objectives
from .concept_matrix import ConceptMatrix

MAX_CONDITION = 1e8


@dataclass(frozen=True)
class SgdConfig:
    """Optimizer settings.

    ``max_steps`` caps the number of parameter updates regardless of
    ``epochs``; ``None`` runs all epochs.

    ``update="relative"`` takes the step in the left-multiplicative
    parametrization ``M <- (I - lr * P(G M^T)) M`` where ``P`` is the
    optimizer's preconditioning; progress then does not depend on how badly
    the mixing is conditioned. ``update="euclidean"`` is the plain
    ``M <- M - lr * P(G)``. ``schedule="cosine"`` anneals the learning rate
    to zero over the run and ``renormalize`` rescales rows of ``M`` to unit
    norm after every step (the objectives are invariant to row scale).
    """

    learning_rate: float = 1e-3
    epochs: int = 500
    batch_size: int = 48
    optimizer: str = "rmsprop"
    loss: str = "frobenius"
    init: str = "identity"
    seed: int = 0
    max_steps: int = None
    decay: float = 0.9
    eps: float = 1e-8
    update: str = "euclidean"
    schedule: str = "constant"
    renormalize: bool = False

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.optimizer not in ("rmsprop", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in ("frobenius", "determinant"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.init not in ("identity", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.update not in ("relative", "euclidean"):
            raise ValueError(f"unknown update {self.update!r}")
        if self.schedule not in ("constant", "cosine"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError("decay must be in [0, 1)")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")

    @classmethod
    def robust(cls, **overrides):
        """Settings that reach the optimum within a few hundred steps.

        Relative RMSProp updates at 3e-2 with cosine annealing and row
        renormalization. The plain defaults get stuck with leaks of a few
        percent between concepts on badly conditioned mixings.
        """
        base = dict(learning_rate=3e-2, update="relative", schedule="cosine", renormalize=True)
        base.update(overrides)
        return cls(**base)

    def to_dict(self):
        return asdict(self)


def _objective(name):
    if name == "frobenius":
        return objectives.loss_and_grad, objectives.loss
    return objectives.loss_det_and_grad, objectives.loss_det


def sgd_discover(jacobians, cfg=SgdConfig(), take_abs=True):
    """Optimize ``M`` so the rows of ``M J`` become disjoint (or orthogonal).

    Parameters
    ----------
    jacobians : array-like of shape (N, K, L) or list of EncoderJacobian
        Precomputed encoder Jacobians or other homogeneous attributions.
    cfg : SgdConfig
    take_abs : bool
        ``True`` for the disjoint-mechanism (DMA) objective, ``False`` for
        the orthogonality (IMA) objective.

    Returns
    -------
    ConceptMatrix
        With ``final_loss`` (mean over all Jacobians) and ``iterations``
        (number of updates) in its diagnostics.
    """
    jac = as_jacobian_stack(jacobians)
    n, k, _ = jac.shape
    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "identity":
        m = np.eye(k)
    else:
        m = rng.standard_normal((k, k))
    step_fn, loss_fn = _objective(cfg.loss)
    sq_avg = np.zeros_like(m)
    step = 0
    batches_per_epoch = -(-n // cfg.batch_size)
    total = batches_per_epoch * cfg.epochs
    if cfg.max_steps is not None:
        total = min(total, cfg.max_steps)
    done = cfg.max_steps is not None and cfg.max_steps <= 0
    for _ in range(cfg.epochs):
        if done:
            break
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = jac[order[start:start + cfg.batch_size]]
            try:
                value, grad = step_fn(m, batch, take_abs)
            except (ValueError, np.linalg.LinAlgError) as exc:
                raise OptimizationError(f"objective undefined ({exc})", step) from exc
            if not (np.isfinite(value) and np.all(np.isfinite(grad))):
                raise OptimizationError("loss became non-finite", step)
            if cfg.update == "relative":
                grad = grad @ m.T
            if cfg.optimizer == "rmsprop":
                sq_avg = cfg.decay * sq_avg + (1.0 - cfg.decay) * grad ** 2
                grad = grad / (np.sqrt(sq_avg) + cfg.eps)
            lr = cfg.learning_rate
            if cfg.schedule == "cosine":
                lr *= 0.5 * (1.0 + np.cos(np.pi * (step + 1) / total))
            if cfg.update == "relative":
                m = m - lr * grad @ m
            else:
                m = m - lr * grad
            if cfg.renormalize:
                m = m / np.linalg.norm(m, axis=1, keepdims=True)
            step += 1
            if np.linalg.cond(m) > MAX_CONDITION:
                raise OptimizationError("concept matrix lost rank (condition > 1e8)", step)
            if cfg.max_steps is not None and step >= cfg.max_steps:
                done = True
                break
    method = "dma_sgd" if take_abs else "ima_sgd"
    return ConceptMatrix(
        m, method,
        {"final_loss": loss_fn(m, jac, take_abs), "iterations": step, "loss": cfg.loss},
    )
