"""
Experiment configuration and run results.

A config can be built in code, loaded from a JSON file whose keys mirror the
field names ("lambda" for lam), and overridden from the command line.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

from src.attacks.two_stage import default_T1
from src.utils import settings
from src.utils.common import load_json_file
from src.utils.errors import ConfigError

VICTIMS = ("linucb", "robust_phe")
ATTACKS = ("none", "oracle", "two_stage")
ENV_SOURCES = ("sample", "sample_attackable", "file")
SAMPLERS = ("gaussian", "orthonormal")
INTEGER_FIELDS = ("d", "k", "T", "T1", "max_tries", "solver_max_iter", "workers")
REAL_FIELDS = ("sigma", "lam", "delta", "bonus_noise_scale")


def _token(value):
    return str(value).strip().lower().replace("-", "_")


def _aliased(value, allowed, name):
    token = _token(value)
    token = {"robustphe": "robust_phe", "twostage": "two_stage", "sampleattackable": "sample_attackable"}.get(
        token, token
    )
    if token not in allowed:
        raise ConfigError(f"must be one of {', '.join(allowed)}, got {value!r}", field=name)
    return token


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything that determines a campaign, apart from the output directory.

    T1 None means the default rule (ceil(sqrt(T)) against LinUCB,
    ceil(T^(2/5)) against RobustPhE). compensate None means on for LinUCB
    and off for RobustPhE. bonus_noise_scale None means sigma.
    """

    d: int = 10
    k: int = 30
    sigma: float = 0.1
    T: int = 10_000
    T1: int = None
    victim: str = "linucb"
    attack: str = "two_stage"
    lam: float = 1.0
    delta: float = 0.01
    seeds: tuple = tuple(range(10))
    env_source: str = "sample_attackable"
    env_path: str = None
    sampler: str = "gaussian"
    allow_unnormalized: bool = False
    solver_max_iter: int = 200_000
    max_tries: int = 1000
    compensate: bool = None
    bonus_noise_scale: float = None
    workers: int = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "victim", _aliased(self.victim, VICTIMS, "victim"))
        object.__setattr__(self, "attack", _aliased(self.attack, ATTACKS, "attack"))
        object.__setattr__(self, "env_source", _aliased(self.env_source, ENV_SOURCES, "env_source"))
        object.__setattr__(self, "sampler", _aliased(self.sampler, SAMPLERS, "sampler"))
        if isinstance(self.seeds, int) and not isinstance(self.seeds, bool):
            object.__setattr__(self, "seeds", (self.seeds,))
        elif isinstance(self.seeds, (list, tuple)):
            object.__setattr__(self, "seeds", tuple(self.seeds))
        else:
            raise ConfigError(f"must be an integer or a list of integers, got {self.seeds!r}", field="seeds")
        self.validate()

    def validate(self):
        """Raises ConfigError naming the first offending field."""
        for name in INTEGER_FIELDS:
            value = getattr(self, name)
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"must be an integer, got {value!r}", field=name)
        for name in REAL_FIELDS:
            value = getattr(self, name)
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ConfigError(f"must be a number, got {value!r}", field="lambda" if name == "lam" else name)
        if self.T < 1:
            raise ConfigError(f"must be >= 1, got {self.T}", field="T")
        if not self.seeds:
            raise ConfigError("must not be empty", field="seeds")
        for seed in self.seeds:
            if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
                raise ConfigError(f"must be non-negative integers, got {seed!r}", field="seeds")
        if self.sigma < 0:
            raise ConfigError(f"must be >= 0, got {self.sigma}", field="sigma")
        if self.lam <= 0:
            raise ConfigError(f"must be > 0, got {self.lam}", field="lambda")
        if not 0 < self.delta < 1:
            raise ConfigError(f"must be in (0, 1), got {self.delta}", field="delta")
        if self.env_source == "file":
            if not self.env_path:
                raise ConfigError("required when env_source is file", field="env_path")
        elif self.d < 2 or self.k < 2:
            raise ConfigError(f"sampled environments need d >= 2 and k >= 2, got d={self.d}, k={self.k}", field="d")
        if self.sampler == "orthonormal" and self.env_source != "file" and self.k > self.d:
            raise ConfigError(f"orthonormal arms need k <= d, got k={self.k}, d={self.d}", field="k")
        if self.max_tries < 1:
            raise ConfigError(f"must be >= 1, got {self.max_tries}", field="max_tries")
        if self.solver_max_iter < 1:
            raise ConfigError(f"must be >= 1, got {self.solver_max_iter}", field="solver_max_iter")
        if self.bonus_noise_scale is not None and self.bonus_noise_scale < 0:
            raise ConfigError(f"must be >= 0, got {self.bonus_noise_scale}", field="bonus_noise_scale")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"must be >= 1, got {self.workers}", field="workers")
        if self.attack == "two_stage":
            T1 = self.resolved_T1()
            if not 0 < T1 < self.T:
                raise ConfigError(f"need 0 < T1 < T, got T1={T1}, T={self.T}", field="T1")

    def resolved_T1(self):
        return self.T1 if self.T1 is not None else default_T1(self.T, self.victim)

    def resolved_compensate(self):
        return self.compensate if self.compensate is not None else self.victim == "linucb"

    def resolved_noise_scale(self):
        return self.bonus_noise_scale if self.bonus_noise_scale is not None else self.sigma

    def resolved_workers(self):
        return self.workers or settings.WORKERS

    def to_dict(self):
        data = asdict(self)
        data["lambda"] = data.pop("lam")
        data["seeds"] = list(self.seeds)
        data.pop("workers")
        return data

    def config_hash(self):
        """Short stable digest of the run-determining fields."""
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]

    def with_overrides(self, **overrides):
        """Copy with non-None overrides applied and validated."""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        if "lambda" in overrides:
            overrides["lam"] = overrides.pop("lambda")
        try:
            return replace(self, **overrides)
        except TypeError as e:
            raise ConfigError(str(e)) from e


FIELD_NAMES = {f.name for f in fields(ExperimentConfig)} - {"lam"} | {"lambda"}


def config_from_dict(data, overrides=None):
    """
    Builds a config from a JSON-style dict plus overrides.

    Raises:
        ConfigError: On unknown keys or invalid values.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", field=unknown[0])
    merged = dict(data)
    merged.update({key: value for key, value in (overrides or {}).items() if value is not None})
    if "lambda" in merged:
        merged["lam"] = merged.pop("lambda")
    try:
        return ExperimentConfig(**merged)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path=None, overrides=None):
    """Loads a config file (or defaults when path is None) and applies overrides."""
    data = load_json_file(path) if path else {}
    return config_from_dict(data, overrides)


@dataclass(eq=False)
class RunResult:
    """
    Outcome of one seed.

    Attributes:
        config_hash: Digest of the config that produced it.
        seed: Master seed.
        summary: JSON-serializable metrics.
        ledger: The adversary's AttackLedger (round log).
        checkpoints: Robustness-bound checkpoint records.
    """

    config_hash: str
    seed: int
    summary: dict
    ledger: object = None
    checkpoints: list = field(default_factory=list)

    def log_frame(self):
        return self.ledger.to_frame()
