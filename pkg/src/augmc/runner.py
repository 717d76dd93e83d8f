"""Build targets from a config, run repeats, write CSV outputs.

Output layout under ``output_dir``::

    config.json              resolved configuration
    run_000/trace.csv        iteration, chain, beta, log_posterior
    run_000/states.csv       iteration, row, bitstring   (chain 0)
    run_000/exchanges.csv    iteration, pair_i, pair_j, kind, accepted, t0
    run_000/diagnostics.csv  statistic, lag_or_block, iteration, value

Repeat ``r`` runs with seed :func:`repeat_seed` ``(seed, r)``.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from augmc.config import ExperimentConfig, config_to_json, validate_config
from augmc.data import draw_alphas, generate_sim_data, load_counts, synthetic_counts
from augmc.diagnostics import TraceStore, count_mode_jumps, hamming_lag_stats, log_posterior_summary
from augmc.ensemble import TemperedEnsemble, pt_run
from augmc.samplers import SamplerKind
from augmc.targets import (
    AdditiveGaussianEmission,
    FhmmModel,
    MarginalizedDepthEmission,
    MarkovChainPrior,
    ToyBlockTarget,
)

log = logging.getLogger(__name__)

HAMMING_LAGS = (1, 10, 50)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def repeat_seed(seed: int, repeat: int) -> int:
    """Mix the master seed with a repeat index into an independent 64-bit seed."""
    words = np.random.SeedSequence([int(seed), int(repeat)]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


@dataclass
class Problem:
    target: object
    init_state: np.ndarray
    truth: np.ndarray | None = None


def build_problem(cfg: ExperimentConfig, seed: int) -> Problem:
    m = cfg.model
    if cfg.experiment == "toy":
        alphas = m.alphas or draw_alphas(m.n_blocks, seed)
        target = ToyBlockTarget.equal(m.T, alphas)
        fill = 1 if m.init == "ones" else 0
        return Problem(target, np.full(m.T, fill, dtype=np.int8))

    prior = MarkovChainPrior.sticky(m.K, m.self_transition, m.init_prob)
    if m.emission == "additive":
        emission = AdditiveGaussianEmission(np.asarray(m.weights), m.depth, m.sigma2)
    else:
        emission = MarginalizedDepthEmission(np.asarray(m.weights), m.mu_h, m.sigma_h**2, m.sigma2)

    if cfg.experiment == "fhmm-sim":
        obs, truth = generate_sim_data(seed, m.n_blocks, m.block_length, m.weights, m.depth, m.sigma2)
    elif m.counts_path:
        obs, truth = load_counts(m.counts_path), None
    else:
        obs, truth = synthetic_counts(seed, m)
    model = FhmmModel(prior, emission, obs.y, m.fixed_rows)
    init = truth if (m.init == "truth" and truth is not None) else None
    return Problem(model, model.initial_state(init), truth)


def build_ensemble(cfg: ExperimentConfig, problem: Problem, seed: int) -> TemperedEnsemble:
    s, e = cfg.sampler, cfg.ensemble
    kind = SamplerKind("hb", s.hb_radius) if s.sampler == "hb" else SamplerKind(s.sampler)
    return TemperedEnsemble.create(problem.target, problem.init_state, e.betas, kind,
                                   e.exchange, e.exchange_period, seed)


def run_once(cfg: ExperimentConfig, seed: int) -> tuple[TraceStore, Problem]:
    problem = build_problem(cfg, seed)
    ens = build_ensemble(cfg, problem, seed)
    trace = pt_run(ens, cfg.ensemble.n_iterations, cfg.ensemble.thin,
                   metadata={"seed": seed, "experiment": cfg.experiment})
    return trace, problem


def diagnostics_rows(trace: TraceStore, target, burn_in: int = 0):
    rows = []
    series, running = log_posterior_summary(trace)[0]
    for n, v in zip(trace.iterations, running):
        rows.append(("running_max_log_posterior", "chain0", int(n), fmt(v)))
    if isinstance(target, ToyBlockTarget):
        summary = count_mode_jumps(trace, target)
        for n, v in zip(trace.state_iterations, summary.cumulative_jumps):
            rows.append(("mode_jumps", "all", int(n), str(int(v))))
        last = int(trace.state_iterations[-1]) if len(trace.state_iterations) else 0
        rows.append(("distinct_modes_nearest", "all", last, str(summary.distinct_labels)))
        rows.append(("distinct_modes_exact", "all", last, str(summary.distinct_exact_modes)))
    else:
        stats = hamming_lag_stats(trace, HAMMING_LAGS, start_iteration=burn_in, with_iterations=True)
        for lag, (starts, values) in stats.items():
            for n, v in zip(starts, values):
                rows.append(("hamming_lag", str(lag), int(n), fmt(v)))
    return rows


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_run(run_dir: Path, trace: TraceStore, target, burn_in: int = 0):
    run_dir.mkdir(parents=True, exist_ok=True)
    lp = trace.log_posterior
    _write_csv(run_dir / "trace.csv", ("iteration", "chain", "beta", "log_posterior"),
               ((int(n), c, fmt(trace.betas[c]), fmt(lp[i, c]))
                for i, n in enumerate(trace.iterations) for c in range(lp.shape[1])))

    def state_rows():
        for n, s in zip(trace.state_iterations, trace.states):
            for r, row in enumerate(np.atleast_2d(s)):
                yield int(n), r, "".join("1" if b else "0" for b in row)

    _write_csv(run_dir / "states.csv", ("iteration", "row", "bitstring"), state_rows())
    _write_csv(run_dir / "exchanges.csv", ("iteration", "pair_i", "pair_j", "kind", "accepted", "t0"),
               ((r.iteration, r.i, r.j, r.kind, int(r.accepted), "" if r.t0 is None else r.t0)
                for r in trace.exchanges))
    _write_csv(run_dir / "diagnostics.csv", ("statistic", "lag_or_block", "iteration", "value"),
               diagnostics_rows(trace, target, burn_in))


def _run_repeat(args):
    cfg, repeat = args
    seed = repeat_seed(cfg.seed, repeat)
    trace, problem = run_once(cfg, seed)
    run_dir = Path(cfg.output_dir) / f"run_{repeat:03d}"
    write_run(run_dir, trace, problem.target, cfg.ensemble.burn_in)
    return run_dir


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[Path]:
    """Validate ``cfg``, run every repeat and write its files."""
    validate_config(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config_to_json(cfg))
    tasks = [(cfg, r) for r in range(cfg.repeats)]
    if jobs > 1 and cfg.repeats > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            dirs = list(pool.map(_run_repeat, tasks))
    else:
        dirs = [_run_repeat(t) for t in tasks]
    for d in dirs:
        log.info("wrote %s", d)
    return dirs
