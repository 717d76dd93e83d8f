"""Compiled inner loops.

Every kernel takes its random numbers as a pre-drawn array of uniforms so
that it consumes exactly the same stream as its twin in
:mod:`augmc.kernels_numpy`.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def _logsumexp(a):
    m = -np.inf
    for i in range(a.shape[0]):
        if a[i] > m:
            m = a[i]
    if m == -np.inf:
        return m
    s = 0.0
    for i in range(a.shape[0]):
        s += math.exp(a[i] - m)
    return m + math.log(s)


@njit(cache=True)
def _draw(logp, u):
    m = -np.inf
    for i in range(logp.shape[0]):
        if logp[i] > m:
            m = logp[i]
    n = logp.shape[0]
    cdf = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc += math.exp(logp[i] - m)
        cdf[i] = acc
    target = u * acc
    for i in range(n):
        if cdf[i] > target:
            return i
    return n - 1


@njit(cache=True)
def toy_gibbs_sweep(x, block_of, block_len, log_alpha, beta, uniforms):
    """Systematic-scan single-site Gibbs sweep on the block target, in place."""
    n_blocks = block_len.shape[0]
    ones = np.zeros(n_blocks, np.int64)
    for t in range(x.shape[0]):
        ones[block_of[t]] += x[t]
    for t in range(x.shape[0]):
        b = block_of[t]
        L = block_len[b]
        rest = ones[b] - x[t]
        d1 = min(L - rest - 1, rest + 1)
        d0 = min(L - rest, rest)
        logit = beta * (d1 - d0) * log_alpha[b]
        if logit >= 0.0:
            p1 = 1.0 / (1.0 + math.exp(-logit))
        else:
            e = math.exp(logit)
            p1 = e / (1.0 + e)
        new = 1 if uniforms[t] < p1 else 0
        ones[b] += new - x[t]
        x[t] = new


@njit(cache=True)
def ffbs_binary(log_init, log_trans, log_emis, uniforms):
    """Forward-filter backward-sample a two-state chain.

    Returns the sampled path and the log normalising constant
    ``log sum_x p(x) prod_t exp(log_emis[t, x_t])``.
    """
    T = log_emis.shape[0]
    alpha = np.empty((T, 2))
    log_z = 0.0
    buf = np.empty(2)
    for s in range(2):
        alpha[0, s] = log_init[s] + log_emis[0, s]
    c = _logsumexp(alpha[0])
    log_z += c
    alpha[0, 0] -= c
    alpha[0, 1] -= c
    for t in range(1, T):
        for s in range(2):
            buf[0] = alpha[t - 1, 0] + log_trans[0, s]
            buf[1] = alpha[t - 1, 1] + log_trans[1, s]
            alpha[t, s] = _logsumexp(buf) + log_emis[t, s]
        c = _logsumexp(alpha[t])
        log_z += c
        alpha[t, 0] -= c
        alpha[t, 1] -= c
    path = np.empty(T, np.int8)
    path[T - 1] = _draw(alpha[T - 1], uniforms[T - 1])
    for t in range(T - 2, -1, -1):
        nxt = path[t + 1]
        buf[0] = alpha[t, 0] + log_trans[0, nxt]
        buf[1] = alpha[t, 1] + log_trans[1, nxt]
        path[t] = _draw(buf, uniforms[t])
    return path, log_z


@njit(cache=True)
def _column_transition(a, b, log_trans):
    acc = 0.0
    for k in range(a.shape[0]):
        acc += log_trans[k, a[k], b[k]]
    return acc


@njit(cache=True)
def ffbs_restricted(cand, log_init, log_trans, log_emis, uniforms):
    """FF-BS over per-column candidate sets of K-bit columns.

    ``cand[t, s]`` is the s-th admissible column at time t. The transition
    between two columns is the product of the per-row transitions. Returns
    the chosen candidate index per column.
    """
    T, S, K = cand.shape
    alpha = np.empty((T, S))
    buf = np.empty(S)
    for s in range(S):
        acc = 0.0
        for k in range(K):
            acc += log_init[k, cand[0, s, k]]
        alpha[0, s] = acc + log_emis[0, s]
    c = _logsumexp(alpha[0])
    for s in range(S):
        alpha[0, s] -= c
    for t in range(1, T):
        for s in range(S):
            for r in range(S):
                buf[r] = alpha[t - 1, r] + _column_transition(cand[t - 1, r], cand[t, s], log_trans)
            alpha[t, s] = _logsumexp(buf) + log_emis[t, s]
        c = _logsumexp(alpha[t])
        for s in range(S):
            alpha[t, s] -= c
    idx = np.empty(T, np.int64)
    idx[T - 1] = _draw(alpha[T - 1], uniforms[T - 1])
    for t in range(T - 2, -1, -1):
        nxt = cand[t + 1, idx[t + 1]]
        for r in range(S):
            buf[r] = alpha[t, r] + _column_transition(cand[t, r], nxt, log_trans)
        idx[t] = _draw(buf, uniforms[t])
    return idx


@njit(cache=True)
def _switch_deltas(A, B, log_init, log_trans, beta, e_A, e_B, out):
    # out[c] += change as column c switches from A_c to B_c, left of c already B
    K, T = A.shape
    for c in range(T):
        d = beta * (e_B[c] - e_A[c])
        for k in range(K):
            if c == 0:
                d += log_init[k, B[k, 0]] - log_init[k, A[k, 0]]
            else:
                d += log_trans[k, B[k, c - 1], B[k, c]] - log_trans[k, B[k, c - 1], A[k, c]]
            if c < T - 1:
                d += log_trans[k, B[k, c], A[k, c + 1]] - log_trans[k, A[k, c], A[k, c + 1]]
        out[c] += d


@njit(cache=True)
def crossover_switch_log_weights(U, V, log_init, log_trans, e_U, e_V, beta_i, beta_j):
    T = U.shape[1]
    normal = np.zeros(T)
    flipped = np.zeros(T)
    _switch_deltas(U, V, log_init, log_trans, beta_i, e_U, e_V, normal)
    _switch_deltas(V, U, log_init, log_trans, beta_j, e_V, e_U, normal)
    _switch_deltas(V, U, log_init, log_trans, beta_i, e_V, e_U, flipped)
    _switch_deltas(U, V, log_init, log_trans, beta_j, e_U, e_V, flipped)
    out = np.empty(2 * T)
    acc = 0.0
    for c in range(T):
        acc += normal[c]
        out[c] = acc
    for c in range(T):
        acc += flipped[c]
        out[T + c] = acc
    return out
