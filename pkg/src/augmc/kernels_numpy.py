"""Pure-numpy twins of :mod:`augmc.kernels_numba`.

Same signatures, same consumption of the uniform arrays. The time
recursions stay sequential; work across states is vectorised.
"""
import numpy as np

from augmc.core import logsumexp


def _draw(logp, u):
    w = np.exp(logp - np.max(logp))
    cdf = np.cumsum(w)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, len(w) - 1)


def toy_gibbs_sweep(x, block_of, block_len, log_alpha, beta, uniforms):
    ones = np.bincount(block_of, weights=x, minlength=len(block_len)).astype(np.int64)
    for t in range(x.shape[0]):
        b = block_of[t]
        L = block_len[b]
        rest = ones[b] - x[t]
        d1 = min(L - rest - 1, rest + 1)
        d0 = min(L - rest, rest)
        logit = beta * (d1 - d0) * log_alpha[b]
        if logit >= 0.0:
            p1 = 1.0 / (1.0 + np.exp(-logit))
        else:
            e = np.exp(logit)
            p1 = e / (1.0 + e)
        new = 1 if uniforms[t] < p1 else 0
        ones[b] += new - x[t]
        x[t] = new


def ffbs_binary(log_init, log_trans, log_emis, uniforms):
    T = log_emis.shape[0]
    alpha = np.empty((T, 2))
    alpha[0] = log_init + log_emis[0]
    c = logsumexp(alpha[0])
    log_z = c
    alpha[0] -= c
    for t in range(1, T):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + log_trans, axis=0) + log_emis[t]
        c = logsumexp(alpha[t])
        log_z += c
        alpha[t] -= c
    path = np.empty(T, np.int8)
    path[T - 1] = _draw(alpha[T - 1], uniforms[T - 1])
    for t in range(T - 2, -1, -1):
        path[t] = _draw(alpha[t] + log_trans[:, path[t + 1]], uniforms[t])
    return path, float(log_z)


def _transition_block(prev, cur, log_trans):
    # prev (R, K), cur (S, K) -> (R, S)
    k = np.arange(prev.shape[1])
    return log_trans[k, prev[:, None, :], cur[None, :, :]].sum(axis=-1)


def ffbs_restricted(cand, log_init, log_trans, log_emis, uniforms):
    T, S, K = cand.shape
    k = np.arange(K)
    alpha = np.empty((T, S))
    alpha[0] = log_init[k, cand[0]].sum(axis=-1) + log_emis[0]
    alpha[0] -= logsumexp(alpha[0])
    for t in range(1, T):
        trans = _transition_block(cand[t - 1], cand[t], log_trans)
        alpha[t] = logsumexp(alpha[t - 1][:, None] + trans, axis=0) + log_emis[t]
        alpha[t] -= logsumexp(alpha[t])
    idx = np.empty(T, np.int64)
    idx[T - 1] = _draw(alpha[T - 1], uniforms[T - 1])
    for t in range(T - 2, -1, -1):
        nxt = cand[t + 1, idx[t + 1]][None, :]
        idx[t] = _draw(alpha[t] + _transition_block(cand[t], nxt, log_trans)[:, 0], uniforms[t])
    return idx


def _switch_deltas(A, B, log_init, log_trans, beta, e_A, e_B):
    lt = log_trans.reshape(-1)
    K = A.shape[0]
    rows = np.arange(K)
    row_base = 4 * rows[:, None]
    d = beta * (e_B - e_A)
    d[0] += log_init[rows, B[:, 0]].sum() - log_init[rows, A[:, 0]].sum()
    if A.shape[1] > 1:
        a_prev, a_next = 2 * A[:, :-1] + row_base, A[:, 1:]
        b_prev, b_next = 2 * B[:, :-1] + row_base, B[:, 1:]
        cross = lt[b_prev + a_next].sum(axis=0)
        d[1:] += lt[b_prev + b_next].sum(axis=0) - cross
        d[:-1] += cross - lt[a_prev + a_next].sum(axis=0)
    return d


def crossover_switch_log_weights(U, V, log_init, log_trans, e_U, e_V, beta_i, beta_j):
    normal = (_switch_deltas(U, V, log_init, log_trans, beta_i, e_U, e_V)
              + _switch_deltas(V, U, log_init, log_trans, beta_j, e_V, e_U))
    flipped = (_switch_deltas(V, U, log_init, log_trans, beta_i, e_V, e_U)
               + _switch_deltas(U, V, log_init, log_trans, beta_j, e_U, e_V))
    return np.cumsum(np.concatenate((normal, flipped)))
