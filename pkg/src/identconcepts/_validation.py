"""Small input-validation helpers shared by the public API."""

import numpy as np


def as_matrix(a, name="a", square=False):
    """Return ``a`` as a finite 2-D float64 array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_jacobian_stack(jacobians, name="jacobians"):
    """Accept a single (K, L) matrix or a stack (N, K, L); return (N, K, L)."""
    if isinstance(jacobians, (list, tuple)):
        jacobians = [getattr(j, "matrix", j) for j in jacobians]
    else:
        jacobians = getattr(jacobians, "matrix", jacobians)
    arr = np.asarray(jacobians, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ValueError(f"{name} must have shape (N, K, L) with N >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_samples(x, name="X", min_rows=1):
    """Return ``x`` as a finite (N, K) float64 array with at least ``min_rows`` rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_samples, n_features), got {x.shape}")
    if x.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_rng(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
