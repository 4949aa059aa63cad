"""Concept discovery: PCA, FastICA, DMA and IMA."""

from .analytical import (
    ICAConvergenceWarning,
    dma_analytical,
    fastica,
    ima_analytical,
    ima_analytical_from_jacobians,
    pca,
)
from .concept_matrix import ConceptMatrix
from .estimators import DMAConcepts, FastICAConcepts, IMAConcepts, PCAConcepts
from .objectives import arn, loss, loss_det, loss_det_grad, loss_grad
from .sgd import SgdConfig, sgd_discover

__all__ = [
    "ConceptMatrix",
    "DMAConcepts",
    "FastICAConcepts",
    "ICAConvergenceWarning",
    "IMAConcepts",
    "PCAConcepts",
    "SgdConfig",
    "arn",
    "dma_analytical",
    "fastica",
    "ima_analytical",
    "ima_analytical_from_jacobians",
    "loss",
    "loss_det",
    "loss_det_grad",
    "loss_grad",
    "pca",
    "sgd_discover",
]
