"""Within-chain MCMC kernels.

* single-site Gibbs, systematic scan, for sequence targets;
* row-wise FF-BS Gibbs for FHMMs, each row drawn exactly given the rest;
* the Hamming Ball sampler: a uniform auxiliary column inside radius ``r``
  of each current column, then exact FF-BS restricted to the balls around
  the auxiliaries.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from augmc._backend import kernels
from augmc.core import STATE_DTYPE, TargetDensity
from augmc.targets import FhmmModel, ToyBlockTarget

SAMPLER_NAMES = ("gibbs", "ffbs-row", "hb")


@dataclass(frozen=True)
class SamplerKind:
    name: str
    radius: int | None = None

    def __post_init__(self):
        if self.name not in SAMPLER_NAMES:
            raise ValueError(f"unknown sampler {self.name!r}; expected one of {SAMPLER_NAMES}")
        if self.name == "hb":
            if self.radius is None or int(self.radius) < 1:
                raise ValueError("Hamming Ball sampler needs radius >= 1")
        elif self.radius is not None:
            raise ValueError(f"sampler {self.name!r} takes no radius")


@dataclass
class ChainState:
    """One chain: its state, temperature, RNG stream and cached density parts.

    ``base`` is the untempered part of the log-density and ``tempered`` the
    part scaled by ``beta``; see :meth:`TargetDensity.log_parts`.
    """

    state: np.ndarray
    beta: float
    rng: np.random.Generator
    base: float = 0.0
    tempered: float = 0.0

    @classmethod
    def create(cls, target: TargetDensity, state, beta: float, rng) -> "ChainState":
        chain = cls(np.array(state, dtype=STATE_DTYPE), float(beta), rng)
        chain.refresh(target)
        return chain

    @property
    def log_posterior(self) -> float:
        return self.base + self.beta * self.tempered

    def refresh(self, target: TargetDensity):
        self.base, self.tempered = target.log_parts(self.state)


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def single_site_gibbs_sweep(x, target: TargetDensity, beta: float, rng) -> np.ndarray:
    """One systematic scan over positions, each bit drawn from its tempered full conditional.

    Block toy targets run through the compiled kernel; any other target is
    handled by evaluating the density at both values of each bit. Both
    paths use one uniform per position, so they agree draw for draw.
    """
    x = np.array(x, dtype=STATE_DTYPE)
    uniforms = rng.random(x.shape[0])
    if isinstance(target, ToyBlockTarget):
        kernels.toy_gibbs_sweep(x, target.block_of, target.block_len, target.log_alpha, float(beta), uniforms)
        return x
    for t in range(x.shape[0]):
        x[t] = 1
        l1 = target.tempered_log_density(x, beta)
        x[t] = 0
        l0 = target.tempered_log_density(x, beta)
        x[t] = 1 if uniforms[t] < _sigmoid(l1 - l0) else 0
    return x


def _check_row(model: FhmmModel, k: int) -> int:
    if not 0 <= k < model.K:
        raise ValueError(f"row {k} out of range for K={model.K}")
    if k in model.fixed_rows:
        raise ValueError(f"row {k} is fixed")
    return k


def _row_emissions(X, k, model: FhmmModel, beta: float, loads=None):
    w = model.emission.w
    if loads is None:
        loads = model.loads(X)
    rest = loads - w[k] * X[k]
    log_emis = np.empty((model.T, 2))
    log_emis[:, 0] = model.emission.log_lik_load(model.y, rest)
    log_emis[:, 1] = model.emission.log_lik_load(model.y, rest + w[k])
    if beta != 1.0:
        log_emis *= beta
    return log_emis, rest


def ffbs_row_conditional(X, k: int, model: FhmmModel, beta: float, rng) -> np.ndarray:
    """Redraw row ``k`` exactly from its tempered conditional given the other rows."""
    k = _check_row(model, int(k))
    X = np.array(model.check_state(X), dtype=STATE_DTYPE)
    log_emis, _ = _row_emissions(X, k, model, beta)
    row, _ = kernels.ffbs_binary(model.prior.log_init[k], model.prior.log_trans[k], log_emis, rng.random(model.T))
    X[k] = row
    return X


def _row_sweep(X, model: FhmmModel, beta: float, rng):
    """Ascending-k row FF-BS sweep in place, carrying the column loads along."""
    w = model.emission.w
    loads = model.loads(X)
    for k in model.free_rows:
        log_emis, rest = _row_emissions(X, k, model, beta, loads)
        row, _ = kernels.ffbs_binary(model.prior.log_init[k], model.prior.log_trans[k], log_emis, rng.random(model.T))
        X[k] = row
        loads = rest + w[k] * row


@functools.lru_cache(maxsize=None)
def ball_masks(K: int, r: int) -> np.ndarray:
    """All K-bit flip masks of weight <= r, zero mask first, by increasing weight."""
    masks = []
    for m in range(min(r, K) + 1):
        for pos in itertools.combinations(range(K), m):
            mask = np.zeros(K, dtype=STATE_DTYPE)
            mask[list(pos)] = 1
            masks.append(mask)
    out = np.array(masks, dtype=STATE_DTYPE)
    out.setflags(write=False)
    return out


def hamming_ball_step(X, r: int, model: FhmmModel, beta: float, rng) -> np.ndarray:
    """One Hamming Ball update of the free rows of ``X``.

    With ``r`` at least the number of free rows the restricted space is the
    whole column space and the step is an exact joint FF-BS draw.
    """
    if not 1 <= int(r) <= model.K:
        raise ValueError(f"radius {r} outside 1..{model.K}")
    X = np.array(model.check_state(X), dtype=STATE_DTYPE)
    free = list(model.free_rows)
    if not free:
        return X
    masks = ball_masks(len(free), int(r))
    T = model.T
    current = X[free].T                                        # (T, Kf)
    aux = current ^ masks[rng.integers(masks.shape[0], size=T)]
    cand = aux[:, None, :] ^ masks[None, :, :]                 # (T, S, Kf)
    w = model.emission.w
    fixed_load = float(w[list(model.fixed_rows)].sum())
    loads = fixed_load + cand @ w[free]
    log_emis = model.emission.log_lik_load(model.y[:, None], loads)
    if beta != 1.0:
        log_emis = beta * log_emis
    idx = kernels.ffbs_restricted(
        cand, model.prior.log_init[free], model.prior.log_trans[free], log_emis, rng.random(T)
    )
    chosen = cand[np.arange(T), idx]
    assert np.all((chosen ^ aux).sum(axis=1) <= r), "column left its Hamming ball"
    X[free] = chosen.T
    return X


def chain_sweep(chain: ChainState, kind: SamplerKind, target: TargetDensity) -> ChainState:
    """Apply one full sweep of ``kind`` to ``chain`` in place and refresh its cache."""
    if kind.name == "gibbs":
        if chain.state.ndim != 1:
            raise ValueError("single-site Gibbs needs a sequence state")
        chain.state = single_site_gibbs_sweep(chain.state, target, chain.beta, chain.rng)
    else:
        if not isinstance(target, FhmmModel):
            raise ValueError(f"sampler {kind.name!r} needs an FHMM target")
        if not target.free_rows:
            return chain
        if kind.name == "ffbs-row":
            _row_sweep(chain.state, target, chain.beta, chain.rng)
        else:
            chain.state = hamming_ball_step(chain.state, kind.radius, target, chain.beta, chain.rng)
    chain.refresh(target)
    return chain
