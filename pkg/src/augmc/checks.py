"""Fast self-checks against the enumeration oracles, used by ``augmc check``.

Each check returns ``(name, passed, detail)``. All instances are small
enough to enumerate, so the whole suite runs in seconds.
"""
from __future__ import annotations

import numpy as np

from augmc.ensemble import crossover_log_weights_fhmm, crossover_log_weights_generic
from augmc.oracles import (
    augmented_kernel_defect,
    enumerate_binary,
    hamming_ball_kernel,
    log_probs,
    mh_exchange_kernel,
    row_gibbs_kernel,
    single_site_gibbs_kernel,
)
from augmc.targets import AdditiveGaussianEmission, FhmmModel, MarkovChainPrior, ToyBlockTarget

TOL = 1e-8


def random_prior(K: int, rng) -> MarkovChainPrior:
    stay = rng.uniform(0.05, 0.95, size=(K, 2))
    trans = np.stack([[[s0, 1 - s0], [1 - s1, s1]] for s0, s1 in stay])
    return MarkovChainPrior(rng.uniform(0.1, 0.9, size=K), trans)


def random_fhmm(K: int, T: int, rng, fixed_rows=()) -> FhmmModel:
    """Small FHMM with random transitions, weights, depth and observations."""
    emission = AdditiveGaussianEmission(rng.dirichlet(np.ones(K)), rng.uniform(1.0, 20.0), rng.uniform(0.3, 2.0))
    y = rng.normal(emission.h * 0.5, 2.0, size=T)
    return FhmmModel(random_prior(K, rng), emission, y, fixed_rows)


def _stationarity(name, pi, P):
    err = float(np.max(np.abs(pi @ P - pi)))
    return name, err < TOL, f"max |pi P - pi| = {err:.2e}"


def check_augmented_kernel(rng):
    out = []
    toy = ToyBlockTarget.equal(6, [0.3, 0.1])
    err = augmented_kernel_defect(toy, 1.0, 0.2, 6)
    out.append(("augmented kernel, toy T=6 B=2", err < TOL, f"max |pi Q - pi| = {err:.2e}"))
    model = random_fhmm(2, 3, rng)
    err = augmented_kernel_defect(model, 1.0, 0.2, model.shape)
    out.append(("augmented kernel, FHMM K=2 T=3", err < TOL, f"max |pi Q - pi| = {err:.2e}"))
    return out


def check_mh_exchanges(rng):
    out = []
    toy = ToyBlockTarget.equal(4, [0.3, 0.1])
    for kind in ("swap", "random-cr"):
        pi, Q = mh_exchange_kernel(toy, 1.0, 0.2, 4, kind)
        flow = pi[:, None] * Q
        err = float(np.max(np.abs(flow - flow.T)))
        out.append((f"{kind} detailed balance, toy T=4", err < 1e-10, f"max flow imbalance = {err:.2e}"))
    return out


def check_recursion(rng, n_instances: int = 25):
    worst = 0.0
    for _ in range(n_instances):
        K, T = int(rng.integers(1, 5)), int(rng.integers(1, 13))
        model = random_fhmm(K, T, rng)
        U, V = rng.integers(0, 2, size=(2, K, T)).astype(np.int8)
        bi, bj = rng.uniform(0.0, 1.0, size=2)
        fast = crossover_log_weights_fhmm(U, V, model, bi, bj)
        slow = crossover_log_weights_generic(
            U, V, lambda z: model.tempered_log_density(z, bi), lambda z: model.tempered_log_density(z, bj))
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    return [(f"crossover weight recursion, {n_instances} instances", worst < TOL, f"max diff = {worst:.2e}")]


def check_samplers(rng):
    toy = ToyBlockTarget.equal(6, [0.3, 0.1])
    pi = np.exp(log_probs(toy, 0.5, enumerate_binary(6)))
    out = [_stationarity("single-site Gibbs, toy T=6", pi, single_site_gibbs_kernel(toy, 0.5, 6))]
    model = random_fhmm(2, 3, rng)
    pi = np.exp(log_probs(model, 0.7, enumerate_binary(model.shape)))
    out.append(_stationarity("row FF-BS sweep, K=2 T=3", pi, row_gibbs_kernel(model, 0.7)))
    out.append(_stationarity("Hamming Ball r=1, K=2 T=3", pi, hamming_ball_kernel(model, 0.7, 1)))
    return out


CHECKS = (check_augmented_kernel, check_mh_exchanges, check_recursion, check_samplers)


def run_checks(seed: int = 0):
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        results.extend(check(rng))
    return results
