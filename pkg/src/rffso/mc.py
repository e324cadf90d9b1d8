"""Monte Carlo oracle for the HARQ process.

Each trial draws one quasi-static RF gain and ``M*N`` independent FSO gains,
accumulates mutual information round by round and records the rounds in
which decoding has still failed.

Random numbers come from counter-based Philox streams. Trials are grouped
in fixed-size blocks and block ``b`` uses the stream with key ``seed`` and
counter offset ``b << 128``. Results therefore depend only on
``(seed, trials)``, never on how blocks are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import HarqParams, throughput_and_outage
from .channel import (
    FsoLinkParams,
    RfLinkParams,
    fso_gain_from_draws,
    pa_output_power,
    sample_rf_gain,
    sample_unit_gamma,
)

BLOCK_TRIALS = 4096


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    seed: int = 1
    antithetic: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McEstimate:
    phi_hat: tuple
    std_err: tuple
    throughput_hat: float
    outage_hat: float
    trials: int
    failures: tuple


@dataclass(frozen=True)
class FsoRateStats:
    mean: float
    variance: float
    mean_se: float
    variance_se: float


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Independent counter-based stream for trial block ``block``."""
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 128))


def _fso_uniforms(rng, n, k, antithetic):
    if not antithetic:
        return 1.0 - rng.random((n, k))
    half = (k + 1) // 2
    u = 1.0 - rng.random((n, half))
    # 1 - u lies in [0, 1); keep it off zero for the log in the pointing map
    mirrored = np.maximum(1.0 - u, np.finfo(float).tiny)
    return np.concatenate([u, mirrored], axis=1)[:, :k]


def accumulated_information(rf_rate, fso_log_rates, harq: HarqParams):
    """Total AMI m*W_m after each round, shape (trials, M).

    ``fso_log_rates`` has shape (trials, M*N) and holds log(1 + c_r P G).
    Decoding fails in round m exactly when the returned value is <= R.
    """
    n = fso_log_rates.shape[0]
    per_round = fso_log_rates.reshape(n, harq.m_max, harq.n_fso).sum(axis=2)
    fso_acc = np.cumsum(per_round, axis=1) * (harq.psi / harq.n_fso)
    rounds = np.arange(1, harq.m_max + 1)
    return rf_rate[:, None] * rounds + fso_acc


def _simulate_block(args):
    fso, rf, harq, seed, block, n, antithetic = args
    rng = block_stream(seed, block)
    m_max, n_fso = harq.m_max, harq.n_fso
    s = pa_output_power(rf)
    rf_rate = np.log1p(s * sample_rf_gain(rf, rng, n))
    failures = np.zeros(m_max, dtype=np.int64)

    # RF alone above R means success in round 1, hence in every round;
    # FSO gains only need drawing for the remaining trials
    open_ = np.flatnonzero(rf_rate <= harq.rate)
    if open_.size == 0:
        return failures
    k = m_max * n_fso
    rate_open = rf_rate[open_]
    if fso.p_fso > 0.0:
        shape = (open_.size, k)
        xa = sample_unit_gamma(fso.alpha, rng, shape)
        xb = sample_unit_gamma(fso.beta, rng, shape)
        u = _fso_uniforms(rng, open_.size, k, antithetic)
        logs = np.log1p(fso.c_r * fso.p_fso * fso_gain_from_draws(fso, xa, xb, u))
    else:
        logs = np.zeros((open_.size, k))
    acc = accumulated_information(rate_open, logs, harq)
    # every log-rate is >= 0, so the accumulated information never drops
    if np.any(np.diff(acc, axis=1) < 0):
        raise AssertionError("accumulated mutual information decreased between rounds")
    failed = acc <= harq.rate
    if np.any(failed[:, 1:] & ~failed[:, :-1]):
        raise AssertionError("failure events are not nested")
    failures += failed.sum(axis=0)
    return failures


def _blocks(trials: int):
    full, rest = divmod(trials, BLOCK_TRIALS)
    sizes = [BLOCK_TRIALS] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def simulate_harq(fso: FsoLinkParams, rf: RfLinkParams, harq: HarqParams, cfg: McConfig,
                  workers: int = 1) -> McEstimate:
    """Estimate phi_1..phi_M, throughput and outage by direct simulation."""
    tasks = [(fso, rf, harq, cfg.seed, b, n, cfg.antithetic) for b, n in _blocks(cfg.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_block, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        parts = [_simulate_block(t) for t in tasks]
    # integer counts: the reduction is exact whatever the order
    counts = np.sum(parts, axis=0)
    phi = tuple(float(c) / cfg.trials for c in counts)
    se = tuple(math.sqrt(p * (1.0 - p) / cfg.trials) for p in phi)
    metrics = throughput_and_outage(phi, harq.rate)
    return McEstimate(
        phi_hat=phi,
        std_err=se,
        throughput_hat=metrics.throughput,
        outage_hat=metrics.outage,
        trials=cfg.trials,
        failures=tuple(int(c) for c in counts),
    )


def simulate_fso_rate_stats(fso: FsoLinkParams, psi: float, samples: int, seed: int) -> FsoRateStats:
    """Empirical mean and variance of psi * log(1 + c_r P G) with standard errors."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if fso.p_fso == 0.0:
        return FsoRateStats(0.0, 0.0, 0.0, 0.0)
    rng = block_stream(seed, 0)
    xa = sample_unit_gamma(fso.alpha, rng, samples)
    xb = sample_unit_gamma(fso.beta, rng, samples)
    u = 1.0 - rng.random(samples)
    v = psi * np.log1p(fso.c_r * fso.p_fso * fso_gain_from_draws(fso, xa, xb, u))
    mean = float(v.mean())
    var = float(v.var(ddof=1))
    m4 = float(np.mean((v - mean) ** 4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / samples)
    return FsoRateStats(mean, var, math.sqrt(var / samples), var_se)
