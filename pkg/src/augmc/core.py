"""Binary states, tempering and the one-point crossover primitive.

States are plain ``numpy`` int8 arrays: a 1-D array of length ``T`` for a
binary sequence, a ``(K, T)`` array for a binary matrix whose columns are
time points. Crossovers always act on the last (time) axis, so the same
code serves both shapes and batches of them.
"""
from __future__ import annotations

import abc

import numpy as np

STATE_DTYPE = np.int8


class DimensionError(ValueError):
    """Raised when array shapes do not conform."""


class CapacityError(ValueError):
    """Raised when an enumeration would be too large to materialise."""


def as_binary_sequence(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionError(f"expected a non-empty 1-D binary sequence, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("binary sequence entries must be 0 or 1")
    return arr.astype(STATE_DTYPE, copy=False)


def as_binary_matrix(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty K x T binary matrix, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("binary matrix entries must be 0 or 1")
    return arr.astype(STATE_DTYPE, copy=False)


def validate_ladder(betas) -> np.ndarray:
    """Check an inverse-temperature ladder and return it as a float array.

    The ladder must start at exactly 1.0, be strictly decreasing and stay
    in (0, 1].
    """
    b = np.asarray(betas, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("temperature ladder must be a non-empty list")
    if b[0] != 1.0:
        raise ValueError(f"first inverse temperature must be 1.0, got {b[0]!r}")
    if np.any(b <= 0.0) or np.any(b > 1.0):
        raise ValueError("inverse temperatures must lie in (0, 1]")
    if np.any(np.diff(b) >= 0.0):
        raise ValueError("inverse temperatures must be strictly decreasing")
    return b


def hamming_distance(a, b) -> int:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def crossover(x: np.ndarray, y: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """One-point crossover on the last axis, without argument checks.

    Returns ``u = (y[..., :t], x[..., t:])`` and ``v = (x[..., :t], y[..., t:])``.
    Works on sequences, matrices and stacked batches of either.
    """
    u = np.concatenate((y[..., :t], x[..., t:]), axis=-1)
    v = np.concatenate((x[..., :t], y[..., t:]), axis=-1)
    return u, v


def _check_point(t, T: int) -> int:
    if isinstance(t, (bool, np.bool_)) or int(t) != t:
        raise ValueError(f"crossover point must be an integer, got {t!r}")
    t = int(t)
    if not 1 <= t <= T:
        raise ValueError(f"crossover point {t} outside 1..{T}")
    return t


def crossover_point(x, y, t: int) -> tuple[np.ndarray, np.ndarray]:
    """One-point crossover of two binary sequences at point ``t`` (1-based).

    The prefix ``1..t`` is exchanged; ``t == T`` swaps the sequences
    entirely. Applying the operation twice at the same ``t`` gives back
    the original pair.
    """
    x = as_binary_sequence(x)
    y = as_binary_sequence(y)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape} vs {y.shape}")
    return crossover(x, y, _check_point(t, x.shape[0]))


def crossover_matrix(Xa, Xb, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise one-point crossover of two ``K x T`` matrices.

    Every row is cut at the same point, which is the same as exchanging
    the leading column block ``[:, :t]``.
    """
    Xa = as_binary_matrix(Xa)
    Xb = as_binary_matrix(Xb)
    if Xa.shape != Xb.shape:
        raise DimensionError(f"shape mismatch: {Xa.shape} vs {Xb.shape}")
    return crossover(Xa, Xb, _check_point(t, Xa.shape[1]))


class TargetDensity(abc.ABC):
    """Unnormalised log-density over binary states.

    Subclasses split the log-density into an untempered part and a
    tempered part via :meth:`log_parts`; the tempered log-density at
    inverse temperature ``beta`` is ``base + beta * tempered``. The default
    split tempers everything. Implementations must not mutate state so one
    instance can be shared by every chain.
    """

    @abc.abstractmethod
    def log_density(self, state: np.ndarray) -> float:
        ...

    def log_parts(self, state: np.ndarray) -> tuple[float, float]:
        return 0.0, float(self.log_density(state))

    def tempered_log_density(self, state: np.ndarray, beta: float) -> float:
        base, tempered = self.log_parts(state)
        if beta == 1.0:
            return base + tempered
        return base + beta * tempered


def tempered_log_density(target: TargetDensity, beta: float, state) -> float:
    return target.tempered_log_density(np.asarray(state), beta)


def logsumexp(a, axis=None, keepdims=False):
    """Max-shifted log of summed exponentials; all ``-inf`` input gives ``-inf``."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if not keepdims:
        out = np.squeeze(out, axis=axis) if axis is not None else out.reshape(())
    return out if out.ndim else float(out)


def normalize_log_weights(log_w) -> np.ndarray:
    """Shift log-weights so that their exponentials sum to one."""
    log_w = np.asarray(log_w, dtype=float)
    if np.any(np.isnan(log_w)):
        raise ValueError("log-weights contain NaN")
    total = logsumexp(log_w)
    if not np.isfinite(total):
        raise ValueError("log-weights have no finite mass")
    return log_w - total


def sample_log_weights(log_w: np.ndarray, u: float) -> int:
    """Inverse-CDF draw of a 0-based index from log-weights.

    ``u`` is a uniform variate on [0, 1). Zero-weight entries are never
    selected; ties go to the lowest index.
    """
    w = np.exp(log_w - np.max(log_w))
    cdf = np.cumsum(w)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, len(w) - 1)
