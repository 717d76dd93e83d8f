"""Target densities: the multimodal block toy and FHMM posteriors."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from augmc.core import (
    CapacityError,
    DimensionError,
    STATE_DTYPE,
    TargetDensity,
    as_binary_matrix,
    as_binary_sequence,
)

LOG_2PI = float(np.log(2.0 * np.pi))
MAX_ENUMERATED_BLOCKS = 20


def _gaussian_logpdf(y, mean, var):
    return -0.5 * (LOG_2PI + np.log(var)) - 0.5 * (y - mean) ** 2 / var


def equal_blocks(T: int, n_blocks: int) -> list[tuple[int, int]]:
    """Partition ``range(T)`` into ``n_blocks`` contiguous near-equal blocks."""
    if not 1 <= n_blocks <= T:
        raise ValueError(f"need 1 <= n_blocks <= T, got n_blocks={n_blocks}, T={T}")
    edges = np.linspace(0, T, n_blocks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


class ToyBlockTarget(TargetDensity):
    """Product of bimodal blocks, each peaked at all-ones and all-zeros.

    Block ``j`` contributes ``min(d_ones, d_zeros) * log(alpha_j)`` where the
    distances are Hamming distances of the block to its two modes.

    Parameters
    ----------
    blocks:
        Half-open ``(start, stop)`` index ranges that partition ``0..T-1``
        contiguously.
    alphas:
        Per-block peakedness in (0, 1); smaller is more peaked.
    """

    def __init__(self, blocks, alphas):
        blocks = [(int(a), int(b)) for a, b in blocks]
        if not blocks or blocks[0][0] != 0:
            raise ValueError("blocks must start at index 0")
        for (a0, b0), (a1, _) in zip(blocks, blocks[1:]):
            if b0 != a1:
                raise ValueError("blocks must be contiguous and disjoint")
        if any(b <= a for a, b in blocks):
            raise ValueError("blocks must be non-empty")
        alphas = np.asarray(alphas, dtype=float)
        if alphas.shape != (len(blocks),):
            raise ValueError(f"expected {len(blocks)} alphas, got {alphas.shape}")
        if np.any(alphas <= 0.0) or np.any(alphas >= 1.0):
            raise ValueError("alphas must lie strictly between 0 and 1")
        self.blocks = blocks
        self.alphas = alphas
        self.T = blocks[-1][1]
        self.block_len = np.array([b - a for a, b in blocks], dtype=np.int64)
        self.block_of = np.repeat(np.arange(len(blocks)), self.block_len).astype(np.int64)
        self.log_alpha = np.log(alphas)

    @classmethod
    def equal(cls, T: int, alphas) -> "ToyBlockTarget":
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        return cls(equal_blocks(T, len(alphas)), alphas)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def block_ones(self, x: np.ndarray) -> np.ndarray:
        """Count of ones in each block; works on a stack of sequences too."""
        x = np.asarray(x)
        starts = np.array([a for a, _ in self.blocks])
        return np.add.reduceat(x.astype(np.int64), starts, axis=-1)

    def log_density(self, x) -> float:
        x = np.asarray(x)
        if x.shape != (self.T,):
            raise DimensionError(f"expected length {self.T}, got shape {x.shape}")
        ones = self.block_ones(x)
        d = np.minimum(ones, self.block_len - ones)
        return float(np.dot(d, self.log_alpha))

    def log_density_batch(self, xs) -> np.ndarray:
        """Log-density of every sequence in an ``(n, T)`` stack."""
        ones = self.block_ones(xs)
        return np.minimum(ones, self.block_len - ones) @ self.log_alpha


def toy_block_log_density(x, target: ToyBlockTarget) -> float:
    x = as_binary_sequence(x)
    return target.log_density(x)


def enumerate_modes(target: ToyBlockTarget) -> list[np.ndarray]:
    """All ``2**B`` states with every block constant."""
    B = target.n_blocks
    if B > MAX_ENUMERATED_BLOCKS:
        raise CapacityError(f"refusing to enumerate 2**{B} modes (limit B <= {MAX_ENUMERATED_BLOCKS})")
    modes = []
    for labels in itertools.product((0, 1), repeat=B):
        modes.append(np.repeat(np.array(labels, dtype=STATE_DTYPE), target.block_len))
    return modes


@dataclass(frozen=True)
class MarkovChainPrior:
    """Independent two-state Markov chains, one per row.

    ``init_prob[k]`` is p(x_{k,1} = 1) and ``trans[k, a, b]`` is
    p(x_{k,t} = b | x_{k,t-1} = a).
    """

    init_prob: np.ndarray
    trans: np.ndarray
    log_init: np.ndarray = field(init=False, repr=False, compare=False)
    log_trans: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        init = np.atleast_1d(np.asarray(self.init_prob, dtype=float))
        trans = np.asarray(self.trans, dtype=float)
        if trans.ndim != 3 or trans.shape[1:] != (2, 2) or trans.shape[0] != init.shape[0]:
            raise DimensionError(f"trans must be (K, 2, 2) with K={init.shape[0]}, got {trans.shape}")
        if np.any((init < 0) | (init > 1)) or np.any((trans < 0) | (trans > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.abs(trans.sum(axis=-1) - 1.0) > 1e-12):
            raise ValueError("transition rows must sum to 1")
        object.__setattr__(self, "init_prob", init)
        object.__setattr__(self, "trans", trans)
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "log_init", np.log(np.stack([1.0 - init, init], axis=-1)))
            object.__setattr__(self, "log_trans", np.log(trans))

    @classmethod
    def sticky(cls, K: int, self_transition: float = 0.99, init_prob: float = 0.5) -> "MarkovChainPrior":
        p = float(self_transition)
        row = np.array([[p, 1.0 - p], [1.0 - p, p]])
        return cls(np.full(K, float(init_prob)), np.tile(row, (K, 1, 1)))

    @property
    def K(self) -> int:
        return self.init_prob.shape[0]

    def row_log_prior(self, X: np.ndarray) -> np.ndarray:
        k = np.arange(X.shape[0])[:, None]
        first = self.log_init[k[:, 0], X[:, 0]]
        steps = self.log_trans[k, X[:, :-1], X[:, 1:]].sum(axis=1)
        return first + steps


def fhmm_log_prior(X, prior: MarkovChainPrior) -> float:
    X = as_binary_matrix(X)
    if X.shape[0] != prior.K:
        raise DimensionError(f"X has {X.shape[0]} rows, prior has {prior.K}")
    return float(prior.row_log_prior(X).sum())


def _check_weights(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to 1")
    return w


@dataclass(frozen=True)
class AdditiveGaussianEmission:
    """y_t ~ N(h * sum_k w_k x_{k,t}, sigma2)."""

    w: np.ndarray
    h: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "w", _check_weights(self.w))
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    def log_lik_load(self, y, load):
        return _gaussian_logpdf(y, self.h * load, self.sigma2)


@dataclass(frozen=True)
class MarginalizedDepthEmission:
    """Additive Gaussian emission with the depth h ~ N(mu_h, sigma2_h) integrated out."""

    w: np.ndarray
    mu_h: float
    sigma2_h: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "w", _check_weights(self.w))
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.sigma2_h < 0:
            raise ValueError("sigma2_h must be non-negative")

    def log_lik_load(self, y, load):
        return _gaussian_logpdf(y, self.mu_h * load, self.sigma2 + self.sigma2_h * load * load)


def _column_load(x_t, w) -> float:
    x_t = np.asarray(x_t)
    if x_t.shape != w.shape:
        raise DimensionError(f"column has {x_t.shape} entries, weights {w.shape}")
    return float(np.dot(w, x_t))


def additive_gaussian_log_lik(y_t: float, x_t, em: AdditiveGaussianEmission) -> float:
    return float(em.log_lik_load(y_t, _column_load(x_t, em.w)))


def marginalized_gaussian_log_lik(y_t: float, x_t, em: MarginalizedDepthEmission) -> float:
    return float(em.log_lik_load(y_t, _column_load(x_t, em.w)))


class FhmmModel(TargetDensity):
    """Posterior over a binary ``K x T`` latent matrix of a factorial HMM.

    Tempering applies to the emission likelihood only: the tempered
    log-density is ``log p(X) + beta * log p(y | X)``. Rows listed in
    ``fixed_rows`` are pinned to 1 and never touched by the samplers.
    """

    def __init__(self, prior: MarkovChainPrior, emission, y, fixed_rows=()):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise DimensionError("observations must be a non-empty vector")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations must be finite")
        if emission.w.shape[0] != prior.K:
            raise DimensionError(f"emission has {emission.w.shape[0]} weights, prior has {prior.K} rows")
        fixed = sorted({int(k) for k in fixed_rows})
        if any(not 0 <= k < prior.K for k in fixed):
            raise ValueError(f"fixed rows {fixed} out of range for K={prior.K}")
        self.prior = prior
        self.emission = emission
        self.y = y
        self.fixed_rows = tuple(fixed)
        self.free_rows = tuple(k for k in range(prior.K) if k not in fixed)

    @property
    def K(self) -> int:
        return self.prior.K

    @property
    def T(self) -> int:
        return self.y.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.K, self.T

    def check_state(self, X):
        X = np.asarray(X)
        if X.shape != self.shape:
            raise DimensionError(f"expected state of shape {self.shape}, got {X.shape}")
        return X

    def loads(self, X):
        """Weighted column sums ``sum_k w_k x_{k,t}``; broadcasts over leading axes."""
        return np.einsum("k,...kt->...t", self.emission.w, X)

    def column_log_lik(self, X) -> np.ndarray:
        return self.emission.log_lik_load(self.y, self.loads(X))

    def log_prior(self, X) -> float:
        return float(self.prior.row_log_prior(X).sum())

    def log_lik(self, X) -> float:
        return float(self.column_log_lik(X).sum())

    def log_parts(self, X):
        X = self.check_state(X)
        return self.log_prior(X), self.log_lik(X)

    def log_density(self, X) -> float:
        base, lik = self.log_parts(X)
        return base + lik

    def initial_state(self, X=None) -> np.ndarray:
        """Copy of ``X`` (zeros by default) with fixed rows set to 1."""
        out = np.zeros(self.shape, dtype=STATE_DTYPE) if X is None else as_binary_matrix(X).copy()
        self.check_state(out)
        out[list(self.fixed_rows)] = 1
        return out


def fhmm_log_posterior(X, model: FhmmModel, beta: float) -> float:
    X = as_binary_matrix(X)
    return model.tempered_log_density(X, beta)
