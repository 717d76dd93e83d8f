"""Trace container and post-processing statistics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from augmc.targets import ToyBlockTarget

MODE1 = 1  # block closest to all-ones
MODE2 = 0  # block closest to all-zeros


@dataclass
class TraceStore:
    """Everything recorded by one ensemble run.

    ``log_posterior[n, c]`` is chain ``c``'s tempered log-density after
    iteration ``iterations[n]``; ``states`` holds chain 0 at
    ``state_iterations``.
    """

    iterations: np.ndarray
    betas: np.ndarray
    log_posterior: np.ndarray
    state_iterations: np.ndarray
    states: np.ndarray
    exchanges: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("iterations", "state_iterations"):
            it = np.asarray(getattr(self, name))
            if it.size > 1 and np.any(np.diff(it) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if self.log_posterior.shape != (len(self.iterations), len(self.betas)):
            raise ValueError("log_posterior must be (n_iterations, n_chains)")
        if len(self.states) != len(self.state_iterations):
            raise ValueError("one stored state per state iteration")


def mode_label(x, target: ToyBlockTarget, previous=None) -> np.ndarray:
    """Per-block nearest-mode label; ties keep ``previous`` (``MODE2`` if none)."""
    ones = target.block_ones(np.asarray(x))
    L = target.block_len
    label = np.where(2 * ones > L, MODE1, MODE2).astype(np.int8)
    tie = 2 * ones == L
    if np.any(tie):
        fallback = np.full(target.n_blocks, MODE2, np.int8) if previous is None else np.asarray(previous, np.int8)
        label[tie] = fallback[tie]
    return label


def mode_labels(states, target: ToyBlockTarget) -> np.ndarray:
    """Labels for a stack of sequences, carrying labels through ties."""
    ones = target.block_ones(np.asarray(states))
    twice = 2 * ones
    L = target.block_len
    out = np.empty(ones.shape, dtype=np.int8)
    prev = np.full(target.n_blocks, MODE2, np.int8)
    for n in range(ones.shape[0]):
        lab = np.where(twice[n] > L, MODE1, MODE2).astype(np.int8)
        tie = twice[n] == L
        lab[tie] = prev[tie]
        out[n] = lab
        prev = lab
    return out


@dataclass
class ModeJumpSummary:
    cumulative_jumps: np.ndarray
    distinct_labels: int
    distinct_exact_modes: int


def count_mode_jumps(trace: TraceStore, target: ToyBlockTarget) -> ModeJumpSummary:
    """Cumulative label changes along the stored trace, plus distinct-mode tallies.

    ``distinct_labels`` counts distinct nearest-mode labellings visited;
    ``distinct_exact_modes`` counts only states that sit exactly on a mode.
    """
    states = np.asarray(trace.states)
    labels = mode_labels(states, target)
    jumps = np.zeros(len(labels), dtype=np.int64)
    if len(labels) > 1:
        jumps[1:] = np.cumsum(np.any(labels[1:] != labels[:-1], axis=1))
    ones = target.block_ones(states)
    exact = np.all((ones == 0) | (ones == target.block_len), axis=1)
    distinct = len({lab.tobytes() for lab in labels})
    distinct_exact = len({lab.tobytes() for lab in labels[exact]})
    return ModeJumpSummary(jumps, distinct, distinct_exact)


def hamming_lag_stats(trace: TraceStore, lags, start_iteration: int = 0, with_iterations: bool = False):
    """Normalised Hamming distances between stored states ``lag`` iterations apart.

    Only pairs whose earlier iteration is at least ``start_iteration`` are
    used. Distances are divided by the number of entries in a state. With
    ``with_iterations`` each value array comes paired with the iterations
    of the earlier states.
    """
    its = np.asarray(trace.state_iterations)
    states = np.asarray(trace.states)
    size = states[0].size if len(states) else 1
    flat = states.reshape(len(states), -1)
    out = {}
    for lag in lags:
        lag = int(lag)
        if lag < 1:
            raise ValueError("lags must be positive")
        first = np.nonzero(its >= start_iteration)[0]
        pos = np.searchsorted(its, its[first] + lag)
        ok = pos < len(its)
        ok[ok] = its[pos[ok]] == its[first[ok]] + lag
        a, b = first[ok], pos[ok]
        values = np.count_nonzero(flat[a] != flat[b], axis=1) / size
        out[lag] = (its[a], values) if with_iterations else values
    return out


def log_posterior_summary(trace: TraceStore) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Per chain: the log-posterior series and its running maximum."""
    lp = np.asarray(trace.log_posterior)
    return {c: (lp[:, c].copy(), np.maximum.accumulate(lp[:, c])) for c in range(lp.shape[1])}
