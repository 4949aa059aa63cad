"""Recovery metrics: permutation-scale decomposition, DCI and MIG.

Importance matrices are laid out codes x factors: entry ``[i, j]`` says how
much discovered component ``i`` relates to true component ``j``. For
``a = M @ D`` that is just ``|a|``. Each factor's column is normalized to
unit mass (the "column-mass" convention, mirroring per-factor regressors
whose feature importances sum to one), then

* disentanglement = sum_i rho_i (1 - H_K(row i)), rho_i = row mass share,
* completeness    = mean_j (1 - H_K(column j)),

with entropies in base ``K``.
"""

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.linear_model import Lasso

from ._validation import as_matrix, as_samples
from .numerics import best_assignment

IMPORTANCE_CONVENTION = "column-mass"
METRICS_CSV_HEADER = ("method", "dataset", "seed", "dci_d", "dci_c", "dci_i", "mig", "residual")


@dataclass
class RecoveryReport:
    permutation: np.ndarray
    scales: np.ndarray
    residual: float
    matched_correlations: np.ndarray = None

    def to_dict(self):
        out = asdict(self)
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in out.items()}


@dataclass
class DciReport:
    disentanglement: float
    completeness: float
    informativeness: float
    importance: np.ndarray
    convention: str = IMPORTANCE_CONVENTION

    def to_dict(self):
        out = asdict(self)
        out["importance"] = self.importance.tolist()
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def decompose_ps(a):
    """Split ``a`` into ``P S`` plus residual.

    The permutation maximizes the matched mass of the row-normalized
    ``|a|``; ``scales[i] = a[i, perm[i]]`` and ``residual`` is
    ``||a - P S||_F / ||a||_F``.
    """
    a = as_matrix(a, square=True)
    mag = np.abs(a)
    row = np.linalg.norm(mag, axis=1, keepdims=True)
    perm = best_assignment(np.divide(mag, row, out=np.zeros_like(mag), where=row > 0))
    idx = np.arange(a.shape[0])
    scales = a[idx, perm]
    ps = np.zeros_like(a)
    ps[idx, perm] = scales
    total = np.linalg.norm(a)
    residual = float(np.linalg.norm(a - ps) / total) if total > 0 else 0.0
    return RecoveryReport(perm, scales, residual)


def _entropy(p, base):
    p = p[p > 0]
    if base <= 1:
        return 0.0
    return float(-np.sum(p * np.log(p)) / np.log(base))


def _normalize_columns(importance):
    mass = importance.sum(axis=0, keepdims=True)
    return np.divide(importance, mass, out=np.zeros_like(importance), where=mass > 0)


def _dci_scores(importance):
    """Disentanglement and completeness of a column-normalized importance matrix."""
    n_codes, n_factors = importance.shape
    total = importance.sum()
    if total <= 0:
        return 0.0, 0.0
    row_mass = importance.sum(axis=1)
    dis = 0.0
    for i in range(n_codes):
        if row_mass[i] > 0:
            dis += row_mass[i] / total * (1.0 - _entropy(importance[i] / row_mass[i], n_factors))
    col_mass = importance.sum(axis=0)
    comp = 0.0
    for j in range(n_factors):
        if col_mass[j] > 0:
            comp += col_mass[j] / total * (1.0 - _entropy(importance[:, j] / col_mass[j], n_codes))
    return float(np.clip(dis, 0.0, 1.0)), float(np.clip(comp, 0.0, 1.0))


def dci_from_matrix(a):
    """DCI of an exact linear map ``a`` (codes x factors), e.g. ``M @ D``.

    Informativeness is 1 by construction: the map is linear and invertible.
    """
    a = as_matrix(a)
    mag = np.abs(a)
    if np.any(mag.sum(axis=1) == 0) or np.any(mag.sum(axis=0) == 0):
        raise ValueError("DCI undefined for a matrix with an all-zero row or column")
    importance = _normalize_columns(mag)
    dis, comp = _dci_scores(importance)
    return DciReport(dis, comp, 1.0, importance)


def _standardize(x):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    constant = std <= 1e-12 * np.maximum(np.abs(mean), 1.0)
    out = np.zeros_like(x)
    out[:, ~constant] = (x[:, ~constant] - mean[~constant]) / std[~constant]
    return out, constant


def dci_from_samples(z_true, z_pred, regressor_strength=0.01, test_fraction=0.2):
    """Sample-based DCI with one L1-regularized linear regressor per true component.

    Both sides are standardized. Importance ``[i, j]`` is ``|coef|`` of
    predicted component ``i`` in the regressor for true component ``j``;
    informativeness is the mean held-out R^2 clipped to [0, 1].
    """
    z_true = as_samples(z_true, "z_true")
    z_pred = as_samples(z_pred, "z_pred")
    n = z_true.shape[0]
    if z_pred.shape[0] != n:
        raise ValueError("z_true and z_pred must have the same number of rows")
    k_true, k_pred = z_true.shape[1], z_pred.shape[1]
    if n <= 10 * k_true:
        raise ValueError(f"need N > 10 K samples, got N={n}, K={k_true}")
    yt, const_true = _standardize(z_true)
    xp, const_pred = _standardize(z_pred)
    if np.any(const_pred):
        warnings.warn(f"constant predicted component(s) {np.flatnonzero(const_pred).tolist()} get zero importance")
    n_test = max(1, int(round(test_fraction * n)))
    n_train = n - n_test
    importance = np.zeros((k_pred, k_true))
    scores = []
    for j in range(k_true):
        if const_true[j]:
            scores.append(0.0)
            continue
        model = Lasso(alpha=regressor_strength, max_iter=10000)
        model.fit(xp[:n_train], yt[:n_train, j])
        importance[:, j] = np.abs(model.coef_)
        scores.append(model.score(xp[n_train:], yt[n_train:, j]))
    importance = _normalize_columns(importance)
    dis, comp = _dci_scores(importance)
    info = float(np.clip(np.mean(scores), 0.0, 1.0))
    return DciReport(dis, comp, info, importance)


def _discretize(x, bins):
    out = np.empty(x.shape, dtype=int)
    for c in range(x.shape[1]):
        edges = np.histogram_bin_edges(x[:, c], bins=bins)
        out[:, c] = np.clip(np.digitize(x[:, c], edges[1:-1]), 0, bins - 1)
    return out


def _mutual_info(a, b, bins):
    joint = np.zeros((bins, bins))
    np.add.at(joint, (a, b), 1.0)
    joint /= joint.sum()
    pa = joint.sum(axis=1, keepdims=True)
    pb = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / (pa @ pb)[nz])))


def _discrete_entropy(a, bins):
    p = np.bincount(a, minlength=bins) / a.size
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def mig(z_true, z_pred, bins=20):
    """Mutual information gap with equal-width binning of both sides."""
    z_true = as_samples(z_true, "z_true")
    z_pred = as_samples(z_pred, "z_pred")
    if z_true.shape[0] != z_pred.shape[0]:
        raise ValueError("z_true and z_pred must have the same number of rows")
    if z_true.shape[0] <= 100:
        raise ValueError("MIG needs more than 100 samples")
    dt = _discretize(z_true, bins)
    dp = _discretize(z_pred, bins)
    gaps = []
    for j in range(dt.shape[1]):
        h = _discrete_entropy(dt[:, j], bins)
        if h <= 0:
            warnings.warn(f"true component {j} has zero entropy; excluded from MIG")
            continue
        mi = np.sort([_mutual_info(dp[:, i], dt[:, j], bins) for i in range(dp.shape[1])])[::-1]
        second = mi[1] if mi.size > 1 else 0.0
        gaps.append((mi[0] - second) / h)
    if not gaps:
        raise ValueError("every true component has zero entropy")
    return float(np.mean(gaps))


def matched_correlations(z_true, z_pred):
    """Absolute correlations of predicted components matched one-to-one to true ones.

    Returns ``(correlations, perm)`` with ``correlations[i] = |corr(pred_i, true_perm[i])|``.
    """
    z_true = as_samples(z_true, "z_true")
    z_pred = as_samples(z_pred, "z_pred")
    k = z_true.shape[1]
    corr = np.corrcoef(z_pred.T, z_true.T)[:k, k:]
    corr = np.abs(np.nan_to_num(corr))
    perm = best_assignment(corr)
    return corr[np.arange(k), perm], perm


def recovery_report(a, z_true=None, z_pred=None):
    """:func:`decompose_ps` plus matched correlations when samples are given."""
    report = decompose_ps(a)
    if z_true is not None and z_pred is not None:
        report.matched_correlations = matched_correlations(z_true, z_pred)[0]
    return report


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float) or isinstance(value, np.floating):
        return "" if not np.isfinite(value) else f"{float(value):.9g}"
    return str(value)


def metrics_csv_row(method, dataset, seed, dci, mig_score=None, residual=None):
    """One ``method,dataset,seed,dci_d,dci_c,dci_i,mig,residual`` line (no newline)."""
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow(
        [method, dataset, seed, _fmt(dci.disentanglement), _fmt(dci.completeness),
         _fmt(dci.informativeness), _fmt(mig_score), _fmt(residual)]
    )
    return buf.getvalue()
