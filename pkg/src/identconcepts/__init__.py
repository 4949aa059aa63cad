"""Identifiable post-hoc concept discovery on synthetic generators."""

from .discovery import (
    ConceptMatrix,
    DMAConcepts,
    FastICAConcepts,
    IMAConcepts,
    PCAConcepts,
    SgdConfig,
)
from .encoder import FaithfulEncoderOracle, sample_mixing
from .generators import GeneratorSpec
from .metrics import dci_from_matrix, dci_from_samples, decompose_ps, mig
from .sampling import ComponentDistribution, sample

__version__ = "0.1.0"

__all__ = [
    "ComponentDistribution",
    "ConceptMatrix",
    "DMAConcepts",
    "FaithfulEncoderOracle",
    "FastICAConcepts",
    "GeneratorSpec",
    "IMAConcepts",
    "PCAConcepts",
    "SgdConfig",
    "dci_from_matrix",
    "dci_from_samples",
    "decompose_ps",
    "mig",
    "sample",
    "sample_mixing",
]
