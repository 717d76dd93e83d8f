"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends get identical inputs and uniforms; outputs are compared
before timing so a speedup never hides a divergence.
"""
import argparse
import timeit

import numpy as np

from augmc._backend import get_kernels
from augmc.samplers import ball_masks
from augmc.targets import MarkovChainPrior


def cases(rng):
    prior = MarkovChainPrior.sticky(6, 0.99)
    T = 2000
    log_emis = rng.normal(0.0, 2.0, size=(T, 2))
    yield "ffbs_binary T=2000", (prior.log_init[0], prior.log_trans[0], log_emis, rng.random(T))

    masks = ball_masks(6, 3)
    T = 500
    u = rng.integers(0, 2, size=(T, 1, 6)).astype(np.int8)
    cand = (u ^ masks[None, :, :]).astype(np.int8)
    yield "ffbs_restricted K=6 r=3 T=500", (cand, prior.log_init, prior.log_trans,
                                             rng.normal(0.0, 2.0, size=(T, len(masks))), rng.random(T))

    x = rng.integers(0, 2, size=50).astype(np.int8)
    block_of = np.repeat(np.arange(10), 5).astype(np.int64)
    yield "toy_gibbs_sweep T=50", (x, block_of, np.full(10, 5, dtype=np.int64),
                                   np.log(rng.choice([0.01, 0.03, 0.05], 10)), 1.0, rng.random(50))

    U, V = rng.integers(0, 2, size=(2, 3, 200)).astype(np.int8)
    yield "crossover_switch_log_weights K=3 T=200", (U, V, prior.log_init[:3], prior.log_trans[:3],
                                                     rng.normal(size=200), rng.normal(size=200), 1.0, 0.2)


def _copy(args):
    return tuple(a.copy() if isinstance(a, np.ndarray) else a for a in args)


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=0, atol=1e-9) if a is not None else b is None


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    fast, slow = get_kernels("numba"), get_kernels("numpy")
    print(f"{'kernel':42s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, inputs in cases(np.random.default_rng(args.seed)):
        fn = name.split()[0]
        a_in, b_in = _copy(inputs), _copy(inputs)
        out_a = getattr(fast, fn)(*a_in)
        out_b = getattr(slow, fn)(*b_in)
        if not (_same(out_a, out_b) and all(_same(x, y) for x, y in zip(a_in, b_in))):
            raise SystemExit(f"{name}: backends disagree")
        timings = []
        for mod in (fast, slow):
            f = getattr(mod, fn)
            number = 3
            best = min(timeit.repeat(lambda: f(*_copy(inputs)), number=number, repeat=args.repeat)) / number
            timings.append(best * 1e3)
        print(f"{name:42s} {timings[0]:11.3f} {timings[1]:11.3f} {timings[1] / timings[0]:7.1f}x")


if __name__ == "__main__":
    main()
