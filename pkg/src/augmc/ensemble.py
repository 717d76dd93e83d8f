"""Parallel tempering with swap, random-crossover and augmented-crossover exchanges.

The augmented crossover is a two-step Gibbs move on a pair of chains
``(i, j)``. First an auxiliary pair ``(U, V)`` is drawn uniformly from the
``2T`` one-point crossovers of the current states (crossover point and
direction both uniform). Then the new pair is drawn from all ``2T``
crossovers of ``(U, V)`` with probability proportional to
``pi_i(z_i) * pi_j(z_j)``. The move is always accepted.

Candidate ``n`` (1-based) of ``(U, V)``:

* ``n <= T``:   ``z_i = (V[..., :n], U[..., n:])``, ``z_j = (U[..., :n], V[..., n:])``
* ``n = T + t``: the same cut at ``t`` with the two halves handed out the other way.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from augmc._backend import kernels
from augmc.core import (
    DimensionError,
    STATE_DTYPE,
    TargetDensity,
    crossover,
    normalize_log_weights,
    sample_log_weights,
    validate_ladder,
)
from augmc.diagnostics import TraceStore
from augmc.samplers import ChainState, SamplerKind, chain_sweep
from augmc.targets import FhmmModel

EXCHANGE_KINDS = ("none", "swap", "random-cr", "augmented-cr")


@dataclass
class ExchangeRecord:
    iteration: int
    i: int
    j: int
    kind: str
    accepted: bool
    t0: int | None = None


def chain_rng(seed: int, index: int) -> np.random.Generator:
    """Per-chain stream; depends only on (seed, chain index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(0, int(index)))))


def exchange_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(1,))))


@dataclass
class TemperedEnsemble:
    """Chains sharing one target at decreasing inverse temperatures.

    ``chains[0]`` runs at beta = 1 and samples the untempered posterior.
    """

    target: TargetDensity
    chains: list[ChainState]
    sampler: SamplerKind
    exchange: str = "none"
    exchange_period: int = 10
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    n_exchanges: int = 0

    def __post_init__(self):
        if self.exchange not in EXCHANGE_KINDS:
            raise ValueError(f"unknown exchange {self.exchange!r}; expected one of {EXCHANGE_KINDS}")
        if int(self.exchange_period) < 1:
            raise ValueError("exchange_period must be a positive integer")
        validate_ladder([c.beta for c in self.chains])
        shapes = {c.state.shape for c in self.chains}
        if len(shapes) != 1:
            raise DimensionError(f"chains disagree on state shape: {shapes}")

    @classmethod
    def create(cls, target, init_state, betas, sampler: SamplerKind, exchange="none", exchange_period=10, seed=0):
        """Build an ensemble with every chain started at ``init_state``."""
        betas = validate_ladder(betas)
        chains = [ChainState.create(target, init_state, b, chain_rng(seed, k)) for k, b in enumerate(betas)]
        return cls(target, chains, sampler, exchange, int(exchange_period), exchange_rng(seed))

    @property
    def betas(self) -> np.ndarray:
        return np.array([c.beta for c in self.chains])

    def next_pair(self) -> tuple[int, int]:
        """Adjacent-temperature pairs in round-robin order."""
        k = self.n_exchanges % (len(self.chains) - 1)
        self.n_exchanges += 1
        return k, k + 1


def _install(chain: ChainState, state, base, tempered):
    chain.state = state
    chain.base = base
    chain.tempered = tempered


def swap_move(ens: TemperedEnsemble, i: int, j: int, rng=None, iteration: int = 0) -> ExchangeRecord:
    """Metropolis-Hastings swap of the states of chains ``i`` and ``j``."""
    rng = ens.rng if rng is None else rng
    ci, cj = ens.chains[i], ens.chains[j]
    # base parts cancel; only the tempered parts see different betas
    log_ratio = (ci.beta - cj.beta) * (cj.tempered - ci.tempered)
    accepted = bool(rng.random() < np.exp(min(0.0, log_ratio)))
    if accepted:
        si, bi, ti = ci.state, ci.base, ci.tempered
        _install(ci, cj.state, cj.base, cj.tempered)
        _install(cj, si, bi, ti)
    return ExchangeRecord(iteration, i, j, "swap", accepted)


def random_crossover_move(ens: TemperedEnsemble, i: int, j: int, rng=None, iteration: int = 0) -> ExchangeRecord:
    """Metropolis-Hastings one-point crossover at a uniform point."""
    rng = ens.rng if rng is None else rng
    ci, cj = ens.chains[i], ens.chains[j]
    T = ci.state.shape[-1]
    t = int(rng.integers(1, T + 1))
    zi, zj = crossover(ci.state, cj.state, t)
    bi, ti = ens.target.log_parts(zi)
    bj, tj = ens.target.log_parts(zj)
    log_ratio = (bi + ci.beta * ti) + (bj + cj.beta * tj) - ci.log_posterior - cj.log_posterior
    accepted = bool(rng.random() < np.exp(min(0.0, log_ratio)))
    if accepted:
        _install(ci, zi, bi, ti)
        _install(cj, zj, bj, tj)
    return ExchangeRecord(iteration, i, j, "random-cr", accepted)


def auxiliary_pair(xi, xj, t: int, normal: bool) -> tuple[np.ndarray, np.ndarray]:
    """Auxiliary ``(U, V)``: the crossover of ``(xi, xj)`` at ``t``, reversed unless ``normal``."""
    u, v = crossover(xi, xj, t)
    return (u, v) if normal else (v, u)


def _prefix_masks(T: int) -> np.ndarray:
    # row n-1 selects the first n time points, n = 1..T
    return np.tri(T, T, dtype=bool)


def crossover_candidates(U, V) -> np.ndarray:
    """All ``2T`` candidate pairs of ``(U, V)`` as an array ``(2T, 2, *U.shape)``."""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape != V.shape:
        raise DimensionError(f"shape mismatch: {U.shape} vs {V.shape}")
    T = U.shape[-1]
    pre = _prefix_masks(T).reshape((T,) + (1,) * (U.ndim - 1) + (T,))
    vu = np.where(pre, V, U)
    uv = np.where(pre, U, V)
    out = np.empty((2 * T, 2) + U.shape, dtype=STATE_DTYPE)
    out[:T, 0], out[:T, 1] = vu, uv
    out[T:, 0], out[T:, 1] = uv, vu
    return out


def candidate_pair(U, V, t0: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidate ``t0`` in ``1..2T`` of the auxiliary pair."""
    T = np.shape(U)[-1]
    if not 1 <= t0 <= 2 * T:
        raise ValueError(f"candidate index {t0} outside 1..{2 * T}")
    if t0 <= T:
        return crossover(U, V, t0)
    zj, zi = crossover(U, V, t0 - T)
    return zi, zj


def crossover_log_weights_generic(U, V, dens_i, dens_j) -> np.ndarray:
    """Normalised log-weights of the ``2T`` candidates by direct evaluation.

    ``dens_i`` and ``dens_j`` map a state to the tempered log-density of
    chain ``i`` and ``j``.
    """
    cands = crossover_candidates(U, V)
    log_w = np.array([dens_i(zi) + dens_j(zj) for zi, zj in cands])
    return normalize_log_weights(log_w)


def crossover_log_weights_fhmm(U, V, model: FhmmModel, beta_i: float, beta_j: float) -> np.ndarray:
    """Normalised log-weights of the ``2T`` row crossovers in O(KT).

    Consecutive candidates differ in one column, so the log-weights are a
    running sum of per-column changes from the reference pair ``(U, V)``.
    The flipped half starts from ``(V, U)``, which is the last normal
    candidate, so both halves share one reference.
    """
    U = model.check_state(U)
    V = model.check_state(V)
    log_w = kernels.crossover_switch_log_weights(
        U, V, model.prior.log_init, model.prior.log_trans,
        model.column_log_lik(U), model.column_log_lik(V), float(beta_i), float(beta_j))
    return normalize_log_weights(log_w)


def crossover_log_weights(U, V, target: TargetDensity, beta_i: float, beta_j: float) -> np.ndarray:
    """Dispatch to the FHMM recursion when available, else direct evaluation."""
    if isinstance(target, FhmmModel):
        return crossover_log_weights_fhmm(U, V, target, beta_i, beta_j)
    if hasattr(target, "log_density_batch"):
        cands = crossover_candidates(U, V)
        lp_i = target.log_density_batch(cands[:, 0])
        lp_j = target.log_density_batch(cands[:, 1])
        return normalize_log_weights(beta_i * lp_i + beta_j * lp_j)
    return crossover_log_weights_generic(
        U, V,
        lambda z: target.tempered_log_density(z, beta_i),
        lambda z: target.tempered_log_density(z, beta_j),
    )


def augmented_crossover_move(ens: TemperedEnsemble, i: int, j: int, rng=None, iteration: int = 0) -> ExchangeRecord:
    """Auxiliary-variable crossover Gibbs exchange between chains ``i`` and ``j``."""
    rng = ens.rng if rng is None else rng
    ci, cj = ens.chains[i], ens.chains[j]
    T = ci.state.shape[-1]
    t = int(rng.integers(1, T + 1))
    normal = bool(rng.random() < 0.5)
    U, V = auxiliary_pair(ci.state, cj.state, t, normal)
    log_w = crossover_log_weights(U, V, ens.target, ci.beta, cj.beta)
    t0 = sample_log_weights(log_w, rng.random()) + 1
    zi, zj = candidate_pair(U, V, t0)
    _install(ci, zi, *ens.target.log_parts(zi))
    _install(cj, zj, *ens.target.log_parts(zj))
    return ExchangeRecord(iteration, i, j, "augmented-cr", True, t0)


EXCHANGE_MOVES = {
    "swap": swap_move,
    "random-cr": random_crossover_move,
    "augmented-cr": augmented_crossover_move,
}


def pt_run(ens: TemperedEnsemble, n_iterations: int, thin: int = 1, record_states: bool = True,
           metadata=None) -> TraceStore:
    """Run the ensemble for ``n_iterations`` and collect a trace.

    Each iteration sweeps every chain once; every ``exchange_period``-th
    iteration then applies the exchange move to the next adjacent pair.
    Iteration 0 is the initial state.
    """
    if n_iterations < 0 or thin < 1:
        raise ValueError("need n_iterations >= 0 and thin >= 1")
    n_chains = len(ens.chains)
    log_post = np.empty((n_iterations + 1, n_chains))
    log_post[0] = [c.log_posterior for c in ens.chains]
    state_iters = np.arange(0, n_iterations + 1, thin) if record_states else np.empty(0, dtype=np.int64)
    states = np.empty((len(state_iters),) + ens.chains[0].state.shape, dtype=STATE_DTYPE)
    if record_states:
        states[0] = ens.chains[0].state
    slot = 1
    records = []
    move = EXCHANGE_MOVES.get(ens.exchange)
    can_exchange = move is not None and n_chains > 1

    for n in range(1, n_iterations + 1):
        for chain in ens.chains:
            chain_sweep(chain, ens.sampler, ens.target)
        if can_exchange and n % ens.exchange_period == 0:
            i, j = ens.next_pair()
            records.append(move(ens, i, j, iteration=n))
        log_post[n] = [c.log_posterior for c in ens.chains]
        if record_states and n % thin == 0:
            states[slot] = ens.chains[0].state
            slot += 1

    return TraceStore(
        iterations=np.arange(n_iterations + 1),
        betas=ens.betas,
        log_posterior=log_post,
        state_iterations=state_iters,
        states=states,
        exchanges=records,
        metadata=dict(metadata or {}),
    )
