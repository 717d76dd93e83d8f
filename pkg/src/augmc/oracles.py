"""Exact small-instance references built by brute-force enumeration.

Everything here is exponential in the number of state entries and meant
for instances with at most ~16 binary entries.
"""
from __future__ import annotations

from math import comb

import numpy as np
from scipy.special import logsumexp

from augmc.core import CapacityError, STATE_DTYPE, crossover
from augmc.ensemble import auxiliary_pair, crossover_candidates, crossover_log_weights

MAX_ENTRIES = 16


def enumerate_binary(shape) -> np.ndarray:
    """All binary arrays of ``shape``; entry order matches :func:`state_codes`."""
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    n = int(np.prod(shape))
    if n > MAX_ENTRIES:
        raise CapacityError(f"refusing to enumerate 2**{n} states")
    codes = np.arange(2**n)
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
    return bits.astype(STATE_DTYPE).reshape((2**n,) + shape)


def state_codes(states) -> np.ndarray:
    """Integer code of each state in a stack (inverse of :func:`enumerate_binary`)."""
    states = np.asarray(states)
    flat = states.reshape(states.shape[0], -1).astype(np.int64)
    return flat @ (1 << np.arange(flat.shape[1], dtype=np.int64))


def log_probs(target, beta: float, states) -> np.ndarray:
    """Normalised tempered log-probabilities over an enumerated state list."""
    lp = np.array([target.tempered_log_density(s, beta) for s in states])
    return lp - logsumexp(lp)


def entry_marginals(target, beta: float, shape, fixed_rows=()) -> np.ndarray:
    """Exact P(entry = 1) for every entry, by summing over all states."""
    states = enumerate_binary(shape)
    if fixed_rows:
        keep = np.all(states[:, list(fixed_rows), :] == 1, axis=(1, 2))
        states = states[keep]
    p = np.exp(log_probs(target, beta, states))
    return np.tensordot(p, states.astype(float), axes=1)


def forward_backward_marginals(log_init, log_trans, log_emis) -> np.ndarray:
    """Smoothed P(x_t = 1) of a two-state HMM by the forward-backward recursions."""
    T = log_emis.shape[0]
    fwd = np.empty((T, 2))
    bwd = np.zeros((T, 2))
    fwd[0] = log_init + log_emis[0]
    for t in range(1, T):
        fwd[t] = logsumexp(fwd[t - 1][:, None] + log_trans, axis=0) + log_emis[t]
    for t in range(T - 2, -1, -1):
        bwd[t] = logsumexp(log_trans + (log_emis[t + 1] + bwd[t + 1])[None, :], axis=1)
    post = fwd + bwd
    post -= logsumexp(post, axis=1, keepdims=True)
    return np.exp(post[:, 1])


def single_site_gibbs_kernel(target, beta: float, T: int) -> np.ndarray:
    """Transition matrix of one systematic single-site Gibbs scan."""
    states = enumerate_binary(T)
    lp = log_probs(target, beta, states)
    n = len(states)
    P = np.eye(n)
    idx = np.arange(n)
    for t in range(T):
        partner = idx ^ (1 << t)
        site = np.zeros((n, n))
        norm = np.logaddexp(lp, lp[partner])
        site[idx, idx] = np.exp(lp - norm)
        site[idx, partner] = np.exp(lp[partner] - norm)
        P = P @ site
    return P


def row_gibbs_kernel(model, beta: float) -> np.ndarray:
    """Transition matrix of one ascending-row exact conditional sweep."""
    K, T = model.shape
    states = enumerate_binary((K, T))
    lp = log_probs(model, beta, states)
    n = len(states)
    codes = np.arange(n)
    P = np.eye(n)
    for k in model.free_rows:
        row_mask = sum(1 << (k * T + t) for t in range(T))
        rest = codes & ~row_mask
        step = np.zeros((n, n))
        for group in np.unique(rest):
            members = codes[rest == group]
            w = np.exp(lp[members] - logsumexp(lp[members]))
            step[np.ix_(members, members)] = w[None, :]
        P = P @ step
    return P


def hamming_ball_kernel(model, beta: float, r: int) -> np.ndarray:
    """Transition matrix of one Hamming Ball step (auxiliary draw, restricted exact draw)."""
    K, T = model.shape
    if model.fixed_rows:
        raise ValueError("hamming_ball_kernel supports models without fixed rows")
    states = enumerate_binary((K, T))
    p = np.exp(log_probs(model, beta, states))
    # columns within radius r of each other, for every column
    diff = np.abs(states[:, None, :, :] - states[None, :, :, :]).sum(axis=2)
    M = np.all(diff <= r, axis=-1).astype(float)
    ball = sum(comb(K, m) for m in range(min(r, K) + 1))
    Z = M @ p
    return (M / ball**T) @ (M * p[None, :] / Z[:, None])


def product_log_target(target, beta_i, beta_j, states):
    li = np.array([target.tempered_log_density(s, beta_i) for s in states])
    lj = np.array([target.tempered_log_density(s, beta_j) for s in states])
    joint = li[:, None] + lj[None, :]
    return joint - logsumexp(joint)


def augmented_kernel_defect(target, beta_i: float, beta_j: float, shape, weights=None) -> float:
    """Max |pi Q - pi| of the exact augmented-crossover kernel on the product target.

    The kernel is assembled by enumerating every current pair, crossover
    point, direction coin and selected candidate. Auxiliary pairs, candidate
    sets and weights come from the library routines under test; the sums
    over all random choices are done here.
    """
    if weights is None:
        def weights(U, V):
            return crossover_log_weights(U, V, target, beta_i, beta_j)
    states = enumerate_binary(shape)
    n = len(states)
    T = states.shape[-1]
    pi = np.exp(product_log_target(target, beta_i, beta_j, states))
    xi = np.repeat(states, n, axis=0)
    xj = np.tile(states, (n,) + (1,) * (states.ndim - 1))
    mass = pi.ravel()

    # probability mass flowing into each auxiliary pair (U, V)
    inflow = np.zeros(n * n)
    for t in range(1, T + 1):
        for normal in (True, False):
            U, V = auxiliary_pair(xi, xj, t, normal)
            aux = state_codes(U) * n + state_codes(V)
            np.add.at(inflow, aux, mass / (2 * T))

    out = np.zeros(n * n)
    for a in np.nonzero(inflow)[0]:
        U, V = states[a // n], states[a % n]
        w = np.exp(weights(U, V))
        cands = crossover_candidates(U, V)
        dest = state_codes(cands[:, 0]) * n + state_codes(cands[:, 1])
        np.add.at(out, dest, inflow[a] * w)
    return float(np.max(np.abs(out - mass)))


def mh_exchange_kernel(target, beta_i: float, beta_j: float, shape, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Exact pair kernel of the swap or random-crossover MH exchange.

    Returns ``(pi, Q)`` over pairs coded ``code(x_i) * n + code(x_j)``.
    """
    if kind not in ("swap", "random-cr"):
        raise ValueError(f"kind must be 'swap' or 'random-cr', got {kind!r}")
    states = enumerate_binary(shape)
    n = len(states)
    T = states.shape[-1]
    li = np.array([target.tempered_log_density(s, beta_i) for s in states])
    lj = np.array([target.tempered_log_density(s, beta_j) for s in states])
    xi = np.repeat(states, n, axis=0)
    xj = np.tile(states, (n,) + (1,) * (states.ndim - 1))
    ci, cj = np.repeat(np.arange(n), n), np.tile(np.arange(n), n)
    src = np.arange(n * n)
    cuts = [T] if kind == "swap" else range(1, T + 1)
    Q = np.zeros((n * n, n * n))
    for t in cuts:
        zi, zj = crossover(xi, xj, t)
        di, dj = state_codes(zi), state_codes(zj)
        log_r = li[di] + lj[dj] - li[ci] - lj[cj]
        acc = np.exp(np.minimum(log_r, 0.0)) / len(cuts)
        np.add.at(Q, (src, di * n + dj), acc)
        np.add.at(Q, (src, src), 1.0 / len(cuts) - acc)
    pi = np.exp(product_log_target(target, beta_i, beta_j, states)).ravel()
    return pi, Q


def augmented_kernel_row(target, beta_i: float, beta_j: float, xi, xj) -> dict[tuple[bytes, bytes], float]:
    """Exact next-pair distribution of one augmented crossover from ``(xi, xj)``.

    Keys are ``(zi.tobytes(), zj.tobytes())`` of int8 states.
    """
    xi = np.asarray(xi, dtype=STATE_DTYPE)
    xj = np.asarray(xj, dtype=STATE_DTYPE)
    T = xi.shape[-1]
    row: dict[tuple[bytes, bytes], float] = {}
    for t in range(1, T + 1):
        for normal in (True, False):
            U, V = auxiliary_pair(xi, xj, t, normal)
            w = np.exp(crossover_log_weights(U, V, target, beta_i, beta_j))
            for (zi, zj), p in zip(crossover_candidates(U, V), w):
                key = (zi.tobytes(), zj.tobytes())
                row[key] = row.get(key, 0.0) + p / (2 * T)
    return row
