"""Experiment runner: one self-contained cell per (parameter, seed, method).

Each cell rebuilds its data from the cell key, so cells can run in any
order or in parallel and still produce identical rows. Data (mixing,
component samples, Jacobian noise) depend only on the seed and the swept
parameter, so all methods in a sweep see the same inputs.
"""

import csv
import io
import logging
import math
import os
import time
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields, replace

import numpy as np

from ..discovery.estimators import DMAConcepts, FastICAConcepts, IMAConcepts, PCAConcepts
from ..encoder import FaithfulEncoderOracle, identity_mixing, orthonormal_mixing, sample_mixing
from ..metrics import dci_from_matrix, decompose_ps, mig
from ..sampling import sample
from .gradcheck import VARIANTS, grad_check

logger = logging.getLogger(__name__)

MIG_MIN_SAMPLES = 101
GRAD_CHECK_INSTANCES = 20


@dataclass
class ResultRow:
    experiment: str
    method: str
    generator: str
    seed: int
    noise_sigma: float = None
    correlation_param: float = None
    dci_d: float = None
    dci_c: float = None
    dci_i: float = None
    mig: float = None
    residual: float = None
    final_loss: float = None
    wall_time_ms: float = None

    @property
    def failed(self):
        return self.dci_d is None and self.residual is None


CSV_HEADER = tuple(f.name for f in fields(ResultRow))
TIMING_COLUMNS = ("wall_time_ms",)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}" if math.isfinite(value) else ""
    return str(value)


def rows_to_csv(rows):
    """CSV text with the fixed header; floats with 9 significant digits, nulls empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in astuple(row)])
    return buf.getvalue()


def write_csv(rows, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    return path


def _cell_seed(*key):
    """Stable 32-bit seed from a cell key."""
    return zlib.crc32(repr(key).encode("utf-8"))


def _mixing(cfg, seed):
    k = cfg.generator.n_components
    if cfg.mixing == "identity":
        return identity_mixing(k)
    if cfg.mixing == "orthonormal":
        return orthonormal_mixing(k, seed=[seed, 1])
    return sample_mixing(k, seed=[seed, 1], max_condition=cfg.max_condition)


def _distribution(cfg, param):
    dist = cfg.distribution
    if param is None:
        return dist
    if dist.kind == "correlated_gaussian":
        return replace(dist, rho=float(param))
    return replace(dist, s=float(param))


def _fit(method, cfg, oracle, z, key_seed):
    """Run one method; returns the fitted estimator."""
    embeddings = oracle.embed(z)
    if method == "pca":
        return PCAConcepts().fit(embeddings)
    if method == "ica":
        return FastICAConcepts(random_state=key_seed).fit(embeddings)
    jac = oracle.jacobians(z[: cfg.jacobian_count])
    if method in ("dma_sgd", "ima_sgd"):
        sgd = replace(cfg.sgd, seed=key_seed)
        est = DMAConcepts if method == "dma_sgd" else IMAConcepts
        return est(solver="sgd", sgd_config=sgd).fit(jac)
    if method == "dma_analytic":
        return DMAConcepts().fit(jac)
    return IMAConcepts().fit(jac)


def _score(row, est, oracle, z):
    a = est.components_ @ oracle.d
    dci = dci_from_matrix(a)
    row.dci_d = dci.disentanglement
    row.dci_c = dci.completeness
    row.dci_i = dci.informativeness
    row.residual = decompose_ps(a).residual
    loss = est.concept_matrix_.diagnostics.get("final_loss")
    row.final_loss = None if loss is None else float(loss)
    if z.shape[0] >= MIG_MIN_SAMPLES:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            row.mig = mig(z, est.transform(oracle.embed(z)))


def run_cell(cfg, method, seed, noise=0.0, param=None):
    """Evaluate one (method, seed, noise, parameter) cell; never raises."""
    row = ResultRow(cfg.experiment, method, cfg.generator.kind, int(seed), float(noise),
                    None if param is None else float(param))
    start = time.perf_counter()
    try:
        mixing = _mixing(cfg, seed)
        z = sample(_distribution(cfg, param), cfg.n_samples, seed=[seed, 2]).z_samples
        oracle = FaithfulEncoderOracle(cfg.generator, mixing, noise, seed, cfg.noise_scale)
        key_seed = _cell_seed(cfg.experiment, method, seed, noise, param)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = _fit(method, cfg, oracle, z, key_seed)
        _score(row, est, oracle, z)
    except Exception as exc:  # failed cells become null rows
        logger.warning("cell %s seed=%s noise=%s param=%s failed: %s", method, seed, noise, param, exc)
        for name in ("dci_d", "dci_c", "dci_i", "mig", "residual", "final_loss"):
            setattr(row, name, None)
    row.wall_time_ms = (time.perf_counter() - start) * 1e3
    return row


def _grad_cell(cfg, variant, seed):
    row = ResultRow(cfg.experiment, variant, cfg.generator.kind, int(seed))
    start = time.perf_counter()
    try:
        row.residual = grad_check(variant, seed=[seed, 3], instances=GRAD_CHECK_INSTANCES)
    except Exception as exc:
        logger.warning("grad check %s seed=%s failed: %s", variant, seed, exc)
    row.wall_time_ms = (time.perf_counter() - start) * 1e3
    return row


def _cells(cfg):
    """All cell arguments in output order."""
    if cfg.experiment == "grad_check":
        return [("grad", v, s) for s in cfg.seeds for v in VARIANTS]
    if cfg.experiment == "noise_sweep":
        return [("fit", m, s, n, None) for n in cfg.noise_levels for s in cfg.seeds for m in cfg.methods]
    if cfg.experiment == "correlation_sweep":
        return [("fit", m, s, 0.0, p) for p in cfg.correlation_values for s in cfg.seeds for m in cfg.methods]
    return [("fit", m, s, 0.0, None) for s in cfg.seeds for m in cfg.methods]


def _run_one(args):
    cfg, cell = args
    if cell[0] == "grad":
        return _grad_cell(cfg, *cell[1:])
    return run_cell(cfg, *cell[1:])


def run(cfg, jobs=1):
    """Run every cell of ``cfg``; rows come back in deterministic cell order."""
    cells = [(cfg, c) for c in _cells(cfg)]
    if jobs is None or jobs <= 1:
        return [_run_one(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, cells))


def run_identifiability(cfg, jobs=1):
    return run(replace(cfg, experiment="identifiability"), jobs)


def run_noise_sweep(cfg, jobs=1):
    return run(replace(cfg, experiment="noise_sweep"), jobs)


def run_correlation_sweep(cfg, jobs=1):
    return run(replace(cfg, experiment="correlation_sweep"), jobs)


def run_grad_check(cfg, jobs=1):
    return run(replace(cfg, experiment="grad_check"), jobs)


def output_path(cfg, out_dir=None):
    return os.path.join(out_dir or cfg.output_dir, f"{cfg.experiment}.csv")


def summarize(rows):
    """Seed-mean disentanglement per (method, noise, parameter), in first-seen order."""
    groups = {}
    for row in rows:
        key = (row.method, row.noise_sigma, row.correlation_param)
        groups.setdefault(key, []).append(row.dci_d if row.dci_d is not None else row.residual)
    return {k: float(np.mean([v for v in vals if v is not None])) if any(v is not None for v in vals)
            else None for k, vals in groups.items()}
