"""Synthetic data, toy-study configuration and count-file ingestion."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from augmc.config import ExperimentConfig, ModelConfig, default_config
from augmc.core import STATE_DTYPE

ALPHA_CHOICES = (0.01, 0.02, 0.03, 0.04, 0.05)
SIM_EPSILON = 0.01
COUNTS_HEADER = ("chromosome", "position", "count")

# fixed stream tags so data draws never overlap the chain streams
_DATA_TAG = 0xDA7A
_ALPHA_TAG = 0xA1FA


class CountsFormatError(ValueError):
    pass


@dataclass
class Observations:
    y: np.ndarray
    chromosome: list[str] = field(default_factory=list)
    position: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 1 or self.y.size == 0:
            raise ValueError("no observations")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("observations must be finite")

    def __len__(self):
        return self.y.shape[0]


def draw_alphas(n_blocks: int, seed: int) -> list[float]:
    rng = np.random.default_rng([int(seed), _ALPHA_TAG])
    return [float(a) for a in rng.choice(ALPHA_CHOICES, size=n_blocks)]


def generate_toy_config(B: int, seed: int) -> ExperimentConfig:
    """Toy-study settings: T = 50 in ``B`` equal blocks, alphas drawn from ``seed``."""
    cfg = default_config("toy")
    cfg.seed = int(seed)
    cfg.model = ModelConfig(T=50, n_blocks=int(B), alphas=draw_alphas(B, seed), init="zeros")
    return cfg


def sim_weights(eps: float = SIM_EPSILON) -> np.ndarray:
    return np.array([0.2 + eps, 0.3 + eps, 0.5 - 2 * eps])


def sim_truth(n_blocks: int = 20, block_length: int = 10) -> np.ndarray:
    """Alternating column blocks (1,1,0) and (0,0,0), ``n_blocks`` in total."""
    pattern = np.array([[1, 1, 0], [0, 0, 0]], dtype=STATE_DTYPE)
    cols = np.repeat(pattern[np.arange(n_blocks) % 2], block_length, axis=0)
    return np.ascontiguousarray(cols.T)


def generate_sim_data(seed: int, n_blocks: int = 20, block_length: int = 10, weights=None,
                      h: float = 15.0, sigma2: float = 1.0) -> tuple[Observations, np.ndarray]:
    """Simulated read counts with two near-equivalent latent explanations.

    Returns the observations and the generating ``3 x T`` matrix.
    """
    w = sim_weights() if weights is None else np.asarray(weights, dtype=float)
    X = sim_truth(n_blocks, block_length)
    rng = np.random.default_rng([int(seed), _DATA_TAG])
    y = rng.normal(h * (w @ X), math.sqrt(sigma2))
    return Observations(y), X


def synthetic_counts(seed: int, model: ModelConfig) -> tuple[Observations, np.ndarray]:
    """Stand-in for sequencing counts: X from the Markov prior, one shared depth.

    Fixed rows are set to 1; depth ``h ~ N(mu_h, sigma_h^2)`` is drawn once
    and every locus gets ``y_t ~ N(h * sum_k w_k x_{k,t}, sigma2)``.
    """
    rng = np.random.default_rng([int(seed), _DATA_TAG])
    K, T = model.K, model.T
    p = model.self_transition
    X = np.empty((K, T), dtype=STATE_DTYPE)
    X[:, 0] = rng.random(K) < model.init_prob
    flips = rng.random((K, T - 1)) >= p
    for t in range(1, T):
        X[:, t] = X[:, t - 1] ^ flips[:, t - 1]
    X[list(model.fixed_rows)] = 1
    h = rng.normal(model.mu_h, model.sigma_h)
    y = rng.normal(h * (np.asarray(model.weights) @ X), math.sqrt(model.sigma2))
    chrom = [f"chr{1 + 22 * t // T}" for t in range(T)]
    pos = [1000 * (t + 1) for t in range(T)]
    return Observations(y, chrom, pos), X


def load_counts(path) -> Observations:
    """Read a tab-separated ``chromosome, position, count`` file with a header row."""
    path = Path(path)
    chrom, pos, y = [], [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != COUNTS_HEADER:
            raise CountsFormatError(f"{path}: line 1: expected header {', '.join(COUNTS_HEADER)} (tab-separated)")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise CountsFormatError(f"{path}: line {lineno}: expected 3 columns, got {len(row)}")
            try:
                p = int(row[1])
                c = float(row[2])
            except ValueError as exc:
                raise CountsFormatError(f"{path}: line {lineno}: {exc}") from None
            if not math.isfinite(c):
                raise CountsFormatError(f"{path}: line {lineno}: non-finite count {row[2]!r}")
            chrom.append(row[0])
            pos.append(p)
            y.append(c)
    if not y:
        raise CountsFormatError(f"{path}: no observations")
    return Observations(np.array(y), chrom, pos)


def write_counts(path, obs: Observations) -> None:
    chrom = obs.chromosome or ["chr1"] * len(obs)
    pos = obs.position or list(range(1, len(obs) + 1))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(COUNTS_HEADER)
        for c, p, v in zip(chrom, pos, obs.y):
            w.writerow([c, p, format(float(v), ".17g")])
