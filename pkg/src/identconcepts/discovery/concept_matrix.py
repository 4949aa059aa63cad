"""The discovered concept matrix and its JSON form."""

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConceptMatrix:
    """Discovered ``K x K`` transform; each row is one concept direction."""

    m: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64)
        if self.m.ndim != 2 or self.m.shape[0] != self.m.shape[1]:
            raise ValueError(f"concept matrix must be square, got {self.m.shape}")
        self.diagnostics.setdefault("final_loss", None)
        self.diagnostics.setdefault("iterations", 0)

    @property
    def k(self):
        return self.m.shape[0]

    def transform(self, embeddings):
        """Concept scores ``M e`` for a batch of embeddings ``(N, K)``."""
        return np.asarray(embeddings, dtype=np.float64) @ self.m.T

    def is_full_rank(self, rtol=1e-10):
        sv = np.linalg.svd(self.m, compute_uv=False)
        return bool(sv[-1] > rtol * sv[0])

    def to_dict(self):
        return {
            "k": self.k,
            "method": self.method,
            "rows": self.m.tolist(),
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        m = np.asarray(data["rows"], dtype=np.float64)
        if m.shape != (data["k"], data["k"]):
            raise ValueError(f"rows have shape {m.shape}, expected k={data['k']}")
        return cls(m, data["method"], dict(data.get("diagnostics", {})))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value
