"""Experiment configuration: a versioned JSON document.

Example::

    {
      "schema": 1,
      "experiment": "identifiability",
      "generator": {"kind": "fourbars", "image_size": [16, 16]},
      "methods": ["dma_analytic", "ima_analytic", "dma_sgd", "ima_sgd"],
      "distribution": {"kind": "independent_uniform"},
      "seeds": [0, 1, 2, 3, 4],
      "n_samples": 48,
      "sgd": {"preset": "robust", "epochs": 500},
      "output_dir": "results"
    }
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields

from ..discovery.sgd import SgdConfig
from ..encoder import NOISE_SCALES
from ..exceptions import ConfigError
from ..generators import GeneratorSpec
from ..sampling import ComponentDistribution

SCHEMA_VERSION = 1
EXPERIMENTS = ("identifiability", "noise_sweep", "correlation_sweep", "grad_check")
METHODS = ("pca", "ica", "dma_analytic", "ima_analytic", "dma_sgd", "ima_sgd")
MIXINGS = ("random", "identity", "orthonormal")
SEED_ENV = "IDENTCONCEPTS_SEED"


def _default_sgd():
    return SgdConfig.robust()


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings.

    ``correlation_values`` is the swept parameter of a correlation sweep:
    ``rho`` for a ``correlated_gaussian`` distribution and ``s`` for
    ``correlated_line``. ``n_jacobians`` limits how many of the ``n_samples``
    points get an encoder Jacobian (``None`` means all of them).
    """

    experiment: str = "identifiability"
    generator: GeneratorSpec = field(default_factory=lambda: GeneratorSpec("fourbars"))
    methods: tuple = ("dma_analytic", "ima_analytic", "dma_sgd", "ima_sgd")
    distribution: ComponentDistribution = None
    seeds: tuple = (0, 1, 2, 3, 4)
    n_samples: int = 48
    n_jacobians: int = None
    sgd: SgdConfig = field(default_factory=_default_sgd)
    noise_levels: tuple = (0.0,)
    noise_scale: str = "absolute"
    correlation_values: tuple = ()
    mixing: str = "random"
    max_condition: float = 20.0
    output_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.distribution is None:
            object.__setattr__(
                self, "distribution", ComponentDistribution(k=self.generator.n_components)
            )
        if self.distribution.k != self.generator.n_components:
            raise ConfigError(
                f"distribution has k={self.distribution.k} but generator "
                f"{self.generator.kind} has {self.generator.n_components} components"
            )
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; expected a subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must be distinct")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if self.n_jacobians is not None and not 1 <= self.n_jacobians <= self.n_samples:
            raise ConfigError("n_jacobians must lie in [1, n_samples]")
        levels = list(self.noise_levels)
        if not levels or any(v < 0 for v in levels) or levels != sorted(levels):
            raise ConfigError("noise_levels must be nonempty, nonnegative and ascending")
        if self.noise_scale not in NOISE_SCALES:
            raise ConfigError(f"noise_scale must be one of {NOISE_SCALES}")
        if self.mixing not in MIXINGS:
            raise ConfigError(f"mixing must be one of {MIXINGS}")
        if self.experiment == "noise_sweep":
            if self.generator.kind != "fourbars_nemr":
                raise ConfigError("noise_sweep needs the fourbars_nemr generator")
            if not set(self.methods) <= {"dma_sgd", "ima_sgd"}:
                raise ConfigError("noise_sweep methods must be a subset of dma_sgd, ima_sgd")
        if self.experiment == "correlation_sweep":
            if self.distribution.kind not in ("correlated_gaussian", "correlated_line"):
                raise ConfigError("correlation_sweep needs a correlated_gaussian or correlated_line distribution")
            if not self.correlation_values:
                raise ConfigError("correlation_sweep needs correlation_values")

    @property
    def jacobian_count(self):
        return self.n_samples if self.n_jacobians is None else self.n_jacobians

    def with_seeds(self, seeds):
        return _replace(self, seeds=tuple(seeds))

    def to_dict(self):
        out = {"schema": SCHEMA_VERSION}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("generator", "distribution", "sgd"):
                value = asdict(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        out["generator"]["image_size"] = list(out["generator"]["image_size"])
        out["distribution"]["pairs"] = [list(p) for p in out["distribution"]["pairs"]]
        out["distribution"]["domain"] = list(out["distribution"]["domain"])
        return out


def _replace(cfg, **changes):
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    values.update(changes)
    return ExperimentConfig(**values)


def _build(cls, data, what):
    if not isinstance(data, dict):
        raise ConfigError(f"{what} must be a JSON object")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {what}: {exc}") from exc


def _sgd_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("sgd must be a JSON object")
    data = dict(data)
    preset = data.pop("preset", None)
    try:
        if preset == "robust":
            return SgdConfig.robust(**data)
        if preset not in (None, "default"):
            raise ConfigError(f"unknown sgd preset {preset!r}")
        return SgdConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sgd settings: {exc}") from exc


def config_from_dict(data):
    """Validate a parsed JSON document and build an :class:`ExperimentConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    schema = data.pop("schema", None)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {schema!r}; expected {SCHEMA_VERSION}")
    known = {f.name for f in fields(ExperimentConfig)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown config keys {extra}")
    kwargs = {}
    gen = data.pop("generator", None)
    if gen is not None:
        if isinstance(gen, str):
            gen = {"kind": gen}
        gen = dict(gen)
        if "image_size" in gen:
            gen["image_size"] = tuple(gen["image_size"])
        kwargs["generator"] = _build(GeneratorSpec, gen, "generator")
    dist = data.pop("distribution", None)
    if dist is not None:
        dist = dict(dist)
        k = kwargs.get("generator", GeneratorSpec("fourbars")).n_components
        dist.setdefault("k", k)
        if "pairs" in dist:
            dist["pairs"] = tuple(tuple(p) for p in dist["pairs"])
        if "domain" in dist:
            dist["domain"] = tuple(dist["domain"])
        kwargs["distribution"] = _build(ComponentDistribution, dist, "distribution")
    if "sgd" in data:
        kwargs["sgd"] = _sgd_from_dict(data.pop("sgd"))
    for name in ("methods", "seeds", "noise_levels", "correlation_values"):
        if name in data:
            value = data.pop(name)
            if not isinstance(value, list):
                raise ConfigError(f"{name} must be a list")
            kwargs[name] = tuple(value)
    kwargs.update(data)
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def seeds_from_env(environ=None):
    """Seed list from ``IDENTCONCEPTS_SEED`` (comma-separated ints), or ``None``."""
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return tuple(int(s) for s in raw.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be a comma-separated list of integers, got {raw!r}") from exc
