"""Experiment configuration: INI-style input files, JSON snapshots, overrides.

An input file has sections ``[experiment]``, ``[model]``, ``[sampler]``
and ``[ensemble]`` with ``key = value`` lines; lists are comma-separated.
The JSON produced by :func:`config_to_json` is the normative form and
reads back into an equal :class:`ExperimentConfig`.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

from augmc.core import validate_ladder
from augmc.ensemble import EXCHANGE_KINDS
from augmc.samplers import SAMPLER_NAMES

EXPERIMENTS = ("toy", "fhmm-sim", "fhmm-data")
EMISSIONS = ("additive", "marginalized")
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    T: int = 50
    n_blocks: int = 10
    alphas: list[float] = field(default_factory=list)
    K: int = 3
    block_length: int = 10
    weights: list[float] = field(default_factory=list)
    emission: str = "additive"
    depth: float = 15.0
    mu_h: float = 180.0
    sigma_h: float = 30.0
    sigma2: float = 1.0
    self_transition: float = 0.99
    init_prob: float = 0.5
    fixed_rows: list[int] = field(default_factory=list)
    counts_path: str = ""
    init: str = "zeros"


@dataclass
class SamplerConfig:
    sampler: str = "gibbs"
    hb_radius: int = 3


@dataclass
class EnsembleConfig:
    n_chains: int = 2
    betas: list[float] = field(default_factory=lambda: [1.0, 0.2])
    exchange: str = "augmented-cr"
    exchange_period: int = 10
    n_iterations: int = 10_000
    thin: int = 1
    burn_in: int = 0


@dataclass
class ExperimentConfig:
    experiment: str = "toy"
    seed: int = 0
    output_dir: str = "out"
    repeats: int = 1
    model: ModelConfig = field(default_factory=ModelConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)


SECTIONS = {"model": ModelConfig, "sampler": SamplerConfig, "ensemble": EnsembleConfig}
TOP_LEVEL = ("experiment", "seed", "output_dir", "repeats")

SIM_WEIGHTS = [0.21, 0.31, 0.48]
DATA_WEIGHTS = [0.075, 0.125, 0.15, 0.175, 0.2, 0.275]
DATA_T = 10_877


def default_config(experiment: str) -> ExperimentConfig:
    """Default settings for the three experiments."""
    if experiment == "toy":
        return ExperimentConfig(experiment="toy", repeats=10)
    if experiment == "fhmm-sim":
        return ExperimentConfig(
            experiment="fhmm-sim",
            model=ModelConfig(K=3, n_blocks=20, block_length=10, weights=list(SIM_WEIGHTS),
                              emission="additive", depth=15.0, sigma2=1.0, init="truth"),
            sampler=SamplerConfig(sampler="ffbs-row"),
        )
    if experiment == "fhmm-data":
        return ExperimentConfig(
            experiment="fhmm-data",
            model=ModelConfig(K=6, T=DATA_T, weights=list(DATA_WEIGHTS), emission="marginalized",
                              mu_h=180.0, sigma_h=30.0, sigma2=1.0, fixed_rows=[0], init="zeros"),
            sampler=SamplerConfig(sampler="hb", hb_radius=3),
            ensemble=EnsembleConfig(n_iterations=20_000, burn_in=10_000),
        )
    raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")


def _hints(cls):
    return typing.get_type_hints(cls)


def _coerce(raw, hint, name: str):
    try:
        if typing.get_origin(hint) is list:
            (item,) = typing.get_args(hint)
            if isinstance(raw, str):
                raw = [p for p in (s.strip() for s in raw.strip().strip("[]").split(",")) if p]
            return [item(v) for v in raw]
        if hint is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(raw)
            return int(raw)
        if hint is float:
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def _apply(obj, key: str, raw, where: str):
    hints = _hints(type(obj))
    if key not in hints or (isinstance(obj, ExperimentConfig) and key in SECTIONS):
        raise ConfigError(f"unknown key {where}.{key}")
    setattr(obj, key, _coerce(raw, hints[key], f"{where}.{key}"))


def apply_override(cfg: ExperimentConfig, assignment: str) -> None:
    """Apply one ``section.key=value`` (or ``key=value`` for top-level keys)."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
    path, value = assignment.split("=", 1)
    path = path.strip()
    if "." in path:
        section, key = path.split(".", 1)
        if section == "experiment":
            _apply(cfg, key, value.strip(), "experiment")
        elif section in SECTIONS:
            _apply(getattr(cfg, section), key, value.strip(), section)
        else:
            raise ConfigError(f"unknown section {section!r}")
    else:
        _apply(cfg, path, value.strip(), "experiment")


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read an INI-style file (or a JSON snapshot, by extension) over ``base``."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    if path.suffix == ".json":
        return config_from_dict(json.loads(path.read_text()))
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    experiment = parser.get("experiment", "experiment", fallback=None)
    cfg = base if base is not None else default_config(experiment or "toy")
    for section in parser.sections():
        for key, value in parser.items(section):
            if section == "experiment":
                _apply(cfg, key, value, section)
            elif section in SECTIONS:
                _apply(getattr(cfg, section), key, value, section)
            else:
                raise ConfigError(f"unknown section [{section}] in {path}")
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_from_dict(data: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, value in data.items():
        if key in SECTIONS:
            sub = SECTIONS[key]()
            for k, v in value.items():
                _apply(sub, k, v, key)
            setattr(cfg, key, sub)
        else:
            _apply(cfg, key, value, "experiment")
    return cfg


def config_to_json(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Raise :class:`ConfigError` describing the first problem found."""
    m, s, e = cfg.model, cfg.sampler, cfg.ensemble
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    if not 0 <= cfg.seed <= MAX_SEED:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if cfg.repeats < 1:
        raise ConfigError("repeats must be positive")
    try:
        validate_ladder(e.betas)
    except ValueError as exc:
        raise ConfigError(f"ensemble.betas: {exc}") from exc
    if e.n_chains != len(e.betas):
        raise ConfigError(f"ensemble.n_chains={e.n_chains} but {len(e.betas)} betas given")
    if e.exchange not in EXCHANGE_KINDS:
        raise ConfigError(f"ensemble.exchange must be one of {EXCHANGE_KINDS}")
    if e.exchange_period < 1 or e.thin < 1 or e.n_iterations < 0 or e.burn_in < 0:
        raise ConfigError("exchange_period and thin must be >= 1; n_iterations and burn_in >= 0")
    if s.sampler not in SAMPLER_NAMES:
        raise ConfigError(f"sampler.sampler must be one of {SAMPLER_NAMES}")
    if not 0.0 <= m.self_transition <= 1.0 or not 0.0 <= m.init_prob <= 1.0:
        raise ConfigError("model.self_transition and model.init_prob must be probabilities")

    if cfg.experiment == "toy":
        if s.sampler != "gibbs":
            raise ConfigError("toy experiment uses sampler = gibbs")
        if not 1 <= m.n_blocks <= m.T:
            raise ConfigError("model.n_blocks must be between 1 and model.T")
        if m.alphas:
            if len(m.alphas) != m.n_blocks:
                raise ConfigError(f"model.alphas needs {m.n_blocks} entries")
            if any(not 0.0 < a < 1.0 for a in m.alphas):
                raise ConfigError("model.alphas must lie in (0, 1)")
        if m.init not in ("zeros", "ones"):
            raise ConfigError("toy model.init must be zeros or ones")
        return cfg

    if s.sampler == "gibbs":
        raise ConfigError("FHMM experiments use sampler = ffbs-row or hb")
    if s.sampler == "hb" and not 1 <= s.hb_radius <= m.K:
        raise ConfigError(f"sampler.hb_radius must lie in 1..{m.K}")
    if m.emission not in EMISSIONS:
        raise ConfigError(f"model.emission must be one of {EMISSIONS}")
    if len(m.weights) != m.K:
        raise ConfigError(f"model.weights needs K={m.K} entries")
    if any(w < 0 for w in m.weights) or abs(sum(m.weights) - 1.0) > 1e-12:
        raise ConfigError("model.weights must be non-negative and sum to 1")
    if m.sigma2 <= 0 or m.sigma_h < 0:
        raise ConfigError("model.sigma2 must be positive and sigma_h non-negative")
    if any(not 0 <= k < m.K for k in m.fixed_rows):
        raise ConfigError("model.fixed_rows out of range")
    if cfg.experiment == "fhmm-sim":
        if m.K != 3 or m.n_blocks < 1 or m.block_length < 1:
            raise ConfigError("fhmm-sim needs K = 3 and positive n_blocks, block_length")
        if m.init not in ("truth", "zeros"):
            raise ConfigError("fhmm-sim model.init must be truth or zeros")
    else:
        if m.counts_path and not Path(m.counts_path).exists():
            raise ConfigError(f"model.counts_path {m.counts_path} does not exist")
        if m.T < 1:
            raise ConfigError("model.T must be positive")
        if m.init != "zeros":
            raise ConfigError("fhmm-data model.init must be zeros")
    return cfg
