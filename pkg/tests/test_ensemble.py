import numpy as np
import pytest
from scipy import stats

import augmc.ensemble as ensemble
from augmc._backend import get_kernels
from augmc.core import DimensionError, TargetDensity
from augmc.ensemble import (
    TemperedEnsemble,
    augmented_crossover_move,
    auxiliary_pair,
    candidate_pair,
    crossover_candidates,
    crossover_log_weights,
    crossover_log_weights_fhmm,
    crossover_log_weights_generic,
    exchange_rng,
    pt_run,
    random_crossover_move,
    swap_move,
)
from augmc.oracles import (
    augmented_kernel_defect,
    augmented_kernel_row,
    enumerate_binary,
    mh_exchange_kernel,
    product_log_target,
    state_codes,
)
from augmc.samplers import SamplerKind
from augmc.targets import ToyBlockTarget

from conftest import binomial_se, random_fhmm

TOY4 = ToyBlockTarget.equal(4, [0.3, 0.1])


class Flat(TargetDensity):
    def log_density(self, state):
        return 0.0


def toy_ensemble(target=TOY4, states=None, exchange="swap", seed=0, betas=(1.0, 0.2)):
    T = target.T
    ens = TemperedEnsemble.create(target, np.zeros(T), list(betas), SamplerKind("gibbs"), exchange, 10, seed)
    if states is not None:
        set_states(ens, states)
    return ens


def set_states(ens, states):
    for chain, s in zip(ens.chains, states):
        chain.state = np.array(s, dtype=np.int8)
        chain.refresh(ens.target)


def empirical_pairs(move, ens, start, n):
    codes = np.empty(n, dtype=np.int64)
    m = 2 ** start[0].shape[-1]
    for k in range(n):
        set_states(ens, start)
        move(ens, 0, 1)
        codes[k] = state_codes(ens.chains[0].state[None])[0] * m + state_codes(ens.chains[1].state[None])[0]
    return np.bincount(codes, minlength=m * m)


def assert_matches(counts, expected):
    n = counts.sum()
    keep = expected * n >= 5
    assert counts[expected == 0].sum() == 0
    chi2 = stats.chisquare(counts[keep], expected[keep] / expected[keep].sum() * counts[keep].sum())
    assert chi2.pvalue > 1e-3


# swap ---------------------------------------------------------------------

def test_swap_identical_states_always_accepted():
    x = np.array([1, 0, 1, 1], np.int8)
    ens = toy_ensemble(states=[x, x])
    for _ in range(50):
        assert swap_move(ens, 0, 1).accepted
        assert np.array_equal(ens.chains[0].state, x)


def test_swap_equal_betas_always_accepted(rng):
    ens = toy_ensemble(states=[[1, 1, 0, 0], [0, 1, 0, 1]])
    ens.chains[1].beta = 1.0
    assert all(swap_move(ens, 0, 1).accepted for _ in range(50))


def test_swap_acceptance_rate_matches_enumeration():
    states = enumerate_binary(4)
    log_pi = product_log_target(TOY4, 1.0, 0.2, states)
    li = np.array([TOY4.tempered_log_density(s, 1.0) for s in states])
    lj = np.array([TOY4.tempered_log_density(s, 0.2) for s in states])
    ratio = li[None, :] + lj[:, None] - li[:, None] - lj[None, :]
    exact = float((np.exp(log_pi) * np.exp(np.minimum(ratio, 0))).sum())

    ens = toy_ensemble()
    rng = np.random.default_rng(5)
    n = 100_000
    picks = rng.choice(256, size=n, p=np.exp(log_pi).ravel())
    accepted = 0
    for code in picks:
        set_states(ens, [states[code // 16], states[code % 16]])
        accepted += swap_move(ens, 0, 1).accepted
    assert abs(accepted / n - exact) < 3 * binomial_se(exact, n)


def test_swap_and_random_cr_detailed_balance():
    for kind in ("swap", "random-cr"):
        pi, Q = mh_exchange_kernel(TOY4, 1.0, 0.2, 4, kind)
        flow = pi[:, None] * Q
        assert np.max(np.abs(flow - flow.T)) < 1e-10
        assert np.max(np.abs(pi @ Q - pi)) < 1e-8


# random crossover ---------------------------------------------------------

def test_random_cr_identical_states():
    x = np.array([0, 1, 1, 0], np.int8)
    ens = toy_ensemble(states=[x, x], exchange="random-cr")
    rec = random_crossover_move(ens, 0, 1)
    assert rec.accepted and np.array_equal(ens.chains[1].state, x)


def test_random_cr_at_full_length_is_swap():
    start = [np.array([1, 1, 0, 0], np.int8), np.array([0, 1, 1, 1], np.int8)]

    class FixedCut:
        def __init__(self, u):
            self.u = u

        def integers(self, lo, hi):
            return hi - 1

        def random(self):
            return self.u

    for u in np.linspace(0.01, 0.99, 25):
        a = toy_ensemble(states=start)
        b = toy_ensemble(states=start)
        ra = random_crossover_move(a, 0, 1, rng=FixedCut(u))
        rb = swap_move(b, 0, 1, rng=FixedCut(u))
        assert ra.accepted == rb.accepted
        assert np.array_equal(a.chains[0].state, b.chains[0].state)


@pytest.mark.parametrize("start", [([1, 1, 0, 0], [0, 1, 0, 1]), ([1, 1, 1, 1], [0, 0, 0, 0])])
def test_random_cr_transitions_match_kernel(start):
    start = [np.array(s, np.int8) for s in start]
    _, Q = mh_exchange_kernel(TOY4, 1.0, 0.2, 4, "random-cr")
    ens = toy_ensemble(exchange="random-cr", seed=3)
    counts = empirical_pairs(random_crossover_move, ens, start, 40_000)
    row = state_codes(start[0][None])[0] * 16 + state_codes(start[1][None])[0]
    assert_matches(counts, Q[row])


# augmented crossover ------------------------------------------------------

def test_candidate_layout():
    U = np.array([1, 1, 1], np.int8)
    V = np.array([0, 0, 0], np.int8)
    cands = crossover_candidates(U, V)
    assert cands.shape == (6, 2, 3)
    for n in range(1, 7):
        zi, zj = candidate_pair(U, V, n)
        assert np.array_equal(cands[n - 1, 0], zi) and np.array_equal(cands[n - 1, 1], zj)
    assert cands[0].tolist() == [[0, 1, 1], [1, 0, 0]]
    assert cands[2].tolist() == [[0, 0, 0], [1, 1, 1]]
    assert cands[3].tolist() == [[1, 0, 0], [0, 1, 1]]
    with pytest.raises(ValueError):
        candidate_pair(U, V, 7)
    with pytest.raises(DimensionError):
        crossover_candidates(U, V[:2])


@pytest.mark.parametrize("T", [1, 2, 4, 6])
def test_auxiliary_symmetry_exhaustive(T):
    states = enumerate_binary(T)
    n = len(states)
    xi = np.repeat(states, n, axis=0)
    xj = np.tile(states, (n, 1))
    src = state_codes(xi) * n + state_codes(xj)
    forward = np.zeros((n * n, n * n), dtype=bool)
    for t in range(1, T + 1):
        for normal in (True, False):
            U, V = auxiliary_pair(xi, xj, t, normal)
            forward[src, state_codes(U) * n + state_codes(V)] = True
    backward = np.zeros_like(forward)
    for a in range(n * n):
        cands = crossover_candidates(states[a // n], states[a % n])
        backward[a, state_codes(cands[:, 0]) * n + state_codes(cands[:, 1])] = True
    assert np.array_equal(forward, backward.T)


def test_weights_uniform_when_u_equals_v(rng):
    model = random_fhmm(3, 7, rng)
    U = rng.integers(0, 2, size=(3, 7)).astype(np.int8)
    assert np.allclose(np.exp(crossover_log_weights_fhmm(U, U, model, 1.0, 0.2)), 1.0 / 14)
    assert np.allclose(np.exp(crossover_log_weights(U[0], U[0], ToyBlockTarget.equal(7, [0.1]), 1.0, 0.2)), 1.0 / 14)
    x = rng.integers(0, 2, size=9).astype(np.int8)
    w = crossover_log_weights(x, 1 - x, Flat(), 1.0, 0.3)
    assert np.allclose(np.exp(w), 1.0 / 18)


def test_weights_sum_to_one(rng):
    model = random_fhmm(4, 11, rng)
    U, V = rng.integers(0, 2, size=(2, 4, 11)).astype(np.int8)
    assert abs(np.exp(crossover_log_weights_fhmm(U, V, model, 1.0, 0.2)).sum() - 1) < 1e-12


def test_generic_weights_match_direct_evaluation(rng):
    toy = ToyBlockTarget.equal(10, [0.05, 0.2])
    U, V = rng.integers(0, 2, size=(2, 10)).astype(np.int8)
    direct = []
    for t0 in range(1, 21):
        zi, zj = candidate_pair(U, V, t0)
        direct.append(toy.tempered_log_density(zi, 1.0) + toy.tempered_log_density(zj, 0.2))
    direct = np.array(direct) - np.log(np.exp(direct).sum())
    generic = crossover_log_weights_generic(U, V, lambda z: toy.tempered_log_density(z, 1.0),
                                            lambda z: toy.tempered_log_density(z, 0.2))
    assert np.allclose(generic, direct, atol=1e-12)
    assert np.allclose(crossover_log_weights(U, V, toy, 1.0, 0.2), direct, atol=1e-12)


def test_fhmm_recursion_matches_generic(rng):
    worst = 0.0
    for _ in range(40):
        K, T = int(rng.integers(1, 5)), int(rng.integers(1, 13))
        model = random_fhmm(K, T, rng)
        U, V = rng.integers(0, 2, size=(2, K, T)).astype(np.int8)
        bi, bj = rng.uniform(size=2)
        fast = crossover_log_weights_fhmm(U, V, model, bi, bj)
        slow = crossover_log_weights_generic(U, V, lambda z: model.tempered_log_density(z, bi),
                                             lambda z: model.tempered_log_density(z, bj))
        worst = max(worst, np.max(np.abs(fast - slow)))
    assert worst < 1e-8


def test_fhmm_recursion_prior_only(rng):
    model = random_fhmm(3, 8, rng)
    U, V = rng.integers(0, 2, size=(2, 3, 8)).astype(np.int8)
    fast = crossover_log_weights_fhmm(U, V, model, 0.0, 0.0)
    prior_only = crossover_log_weights_generic(U, V, model.log_prior, model.log_prior)
    assert np.max(np.abs(fast - prior_only)) < 1e-10


def test_fhmm_recursion_backends_agree(rng, monkeypatch):
    model = random_fhmm(3, 15, rng)
    U, V = rng.integers(0, 2, size=(2, 3, 15)).astype(np.int8)
    out = []
    for name in ("numba", "numpy"):
        monkeypatch.setattr(ensemble, "kernels", get_kernels(name))
        out.append(crossover_log_weights_fhmm(U, V, model, 1.0, 0.2))
    assert np.allclose(*out, atol=1e-12)


def test_fhmm_recursion_dimension_mismatch(rng):
    model = random_fhmm(2, 5, rng)
    with pytest.raises(DimensionError):
        crossover_log_weights_fhmm(np.zeros((2, 4), np.int8), np.zeros((2, 4), np.int8), model, 1.0, 0.2)


def test_augmented_identical_states_unchanged():
    x = np.array([1, 0, 0, 1], np.int8)
    ens = toy_ensemble(states=[x, x], exchange="augmented-cr")
    for _ in range(20):
        rec = augmented_crossover_move(ens, 0, 1)
        assert rec.accepted and 1 <= rec.t0 <= 8
        assert np.array_equal(ens.chains[0].state, x) and np.array_equal(ens.chains[1].state, x)


def test_augmented_single_column_is_gibbs_choice():
    class Tilted(TargetDensity):
        def log_density(self, s):
            return 1.3 * float(s[0])

    start = [np.array([1], np.int8), np.array([0], np.int8)]
    ens = TemperedEnsemble.create(Tilted(), start[0], [1.0, 0.2], SamplerKind("gibbs"), "augmented-cr", 10, 0)
    n = 40_000
    stay = 0
    for _ in range(n):
        set_states(ens, start)
        augmented_crossover_move(ens, 0, 1)
        stay += int(ens.chains[0].state[0] == 1)
    w_stay = np.exp(1.3 * 1.0)
    w_swap = np.exp(1.3 * 0.2)
    p = w_stay / (w_stay + w_swap)
    assert abs(stay / n - p) < 3 * binomial_se(p, n)


@pytest.mark.parametrize("start", [([1, 1, 0, 0], [0, 1, 0, 1]), ([0, 0, 0, 0], [1, 1, 1, 1])])
def test_augmented_transitions_match_kernel(start):
    start = [np.array(s, np.int8) for s in start]
    row = augmented_kernel_row(TOY4, 1.0, 0.2, *start)
    expected = np.zeros(256)
    for (a, b), p in row.items():
        za = np.frombuffer(a, np.int8)[None]
        zb = np.frombuffer(b, np.int8)[None]
        expected[state_codes(za)[0] * 16 + state_codes(zb)[0]] += p
    assert expected.sum() == pytest.approx(1.0)
    ens = toy_ensemble(exchange="augmented-cr", seed=4)
    assert_matches(empirical_pairs(augmented_crossover_move, ens, start, 40_000), expected)


def test_augmented_choice_is_a_candidate_of_the_auxiliary(rng):
    model = random_fhmm(3, 9, rng)
    ens = TemperedEnsemble.create(model, model.initial_state(), [1.0, 0.2], SamplerKind("ffbs-row"),
                                  "augmented-cr", 10, 7)
    replay = exchange_rng(7)
    for _ in range(30):
        set_states(ens, rng.integers(0, 2, size=(2, 3, 9)))
        xi, xj = ens.chains[0].state.copy(), ens.chains[1].state.copy()
        rec = augmented_crossover_move(ens, 0, 1)
        t = int(replay.integers(1, 10))
        normal = bool(replay.random() < 0.5)
        replay.random()
        U, V = auxiliary_pair(xi, xj, t, normal)
        zi, zj = candidate_pair(U, V, rec.t0)
        assert np.array_equal(zi, ens.chains[0].state) and np.array_equal(zj, ens.chains[1].state)
        assert ens.chains[0].log_posterior == pytest.approx(model.tempered_log_density(zi, 1.0))
        assert ens.chains[1].log_posterior == pytest.approx(model.tempered_log_density(zj, 0.2))


def test_augmented_kernel_preserves_product_target_toy():
    assert augmented_kernel_defect(ToyBlockTarget.equal(6, [0.3, 0.1]), 1.0, 0.2, 6) < 1e-8


def test_augmented_kernel_defect_detects_a_wrong_kernel():
    toy = ToyBlockTarget.equal(4, [0.3, 0.1])

    def uniform(U, V):
        return np.full(8, -np.log(8))

    assert augmented_kernel_defect(toy, 1.0, 0.2, 4, weights=uniform) > 1e-3


# pt_run -------------------------------------------------------------------

def test_ensemble_validation():
    with pytest.raises(ValueError):
        toy_ensemble(exchange="teleport")
    with pytest.raises(ValueError):
        toy_ensemble(betas=(0.5, 0.2))
    with pytest.raises(ValueError):
        TemperedEnsemble.create(TOY4, np.zeros(4), [1.0], SamplerKind("gibbs"), "swap", 0, 0)


def test_no_exchange_matches_single_chain():
    toy = ToyBlockTarget.equal(20, [0.05, 0.1])
    single = pt_run(toy_ensemble(target=toy, exchange="none", betas=(1.0,), seed=9), 300)
    paired = pt_run(toy_ensemble(target=toy, exchange="none", seed=9), 300)
    assert np.array_equal(single.states, paired.states)
    assert np.array_equal(single.log_posterior[:, 0], paired.log_posterior[:, 0])
    assert paired.exchanges == []


def test_exchange_count_and_augmented_acceptance():
    toy = ToyBlockTarget.equal(50, [0.03] * 10)
    trace = pt_run(toy_ensemble(target=toy, exchange="augmented-cr", seed=1), 10_000, record_states=False)
    assert len(trace.exchanges) == 1000
    assert [r.iteration for r in trace.exchanges] == list(range(10, 10_001, 10))
    assert all(r.accepted and 1 <= r.t0 <= 100 for r in trace.exchanges)


def test_trace_log_posterior_is_fresh(rng):
    model = random_fhmm(3, 10, rng)
    for exchange in ("swap", "random-cr", "augmented-cr"):
        ens = TemperedEnsemble.create(model, model.initial_state(), [1.0, 0.5, 0.2], SamplerKind("hb", 2),
                                      exchange, 2, 3)
        trace = pt_run(ens, 30, thin=5)
        assert trace.states.shape == (7, 3, 10)
        assert trace.log_posterior[-1, 0] == pytest.approx(model.log_density(ens.chains[0].state), abs=1e-8)
        for c, chain in enumerate(ens.chains):
            assert chain.log_posterior == pytest.approx(model.tempered_log_density(chain.state, chain.beta), abs=1e-8)
        assert [(r.i, r.j) for r in trace.exchanges[:4]] == [(0, 1), (1, 2), (0, 1), (1, 2)]


def test_pt_run_is_deterministic():
    a = pt_run(toy_ensemble(exchange="augmented-cr", seed=11), 200)
    b = pt_run(toy_ensemble(exchange="augmented-cr", seed=11), 200)
    assert np.array_equal(a.states, b.states)
    assert [r.t0 for r in a.exchanges] == [r.t0 for r in b.exchanges]
