"""Synthetic multi-reader study generator and Monte Carlo coverage harness.

Readers are drawn from a Lehmann-family population: ln theta is normal across
readers (spread tau), logit FPR is normal, Se = FPR**theta, and the observed
cells are binomial. All draws are inversions of per-reader counter-based
streams, so datasets are reproducible regardless of execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import bivariate, phm, streams
from .quantiles import expit
from .tables import ContingencyTable, ReaderRecord, StudyDataset


@dataclass(frozen=True)
class SimConfig:
    n_readers: int
    n_diseased: int
    n_healthy: int
    theta_true: float
    tau: float = 0.0
    fpr_logit_mean: float = -1.734601
    fpr_logit_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_readers < 1 or self.n_diseased < 1 or self.n_healthy < 1:
            raise ValueError("n_readers, n_diseased, n_healthy must all be >= 1")
        if self.theta_true <= 0:
            raise ValueError(f"theta_true must be positive, got {self.theta_true}")
        if self.tau < 0 or self.fpr_logit_sd < 0:
            raise ValueError("tau and fpr_logit_sd must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class CoverageReport:
    engine: str
    effects_mode: str
    level: float
    n_sims: int
    n_failed: int
    n_covered: int
    coverage: float
    mean_ci_width: float


def generate(config: SimConfig) -> StudyDataset:
    """One synthetic dataset; reader i consumes only its own (seed, i) stream.

    Per-reader draw order is fixed: ln theta, logit FPR, tp, fp.
    """
    width = len(str(config.n_readers))
    records = []
    for i in range(config.n_readers):
        gen = streams.stream(config.seed, streams.KIND_READER, i)
        theta_i = math.exp(streams.normal_from(gen, math.log(config.theta_true), config.tau))
        fpr_i = expit(streams.normal_from(gen, config.fpr_logit_mean, config.fpr_logit_sd))
        se_i = fpr_i**theta_i
        tp = streams.binomial_from(gen, config.n_diseased, se_i)
        fp = streams.binomial_from(gen, config.n_healthy, fpr_i)
        table = ContingencyTable(tp=tp, fp=fp, fn=config.n_diseased - tp,
                                 tn=config.n_healthy - fp)
        records.append(ReaderRecord(reader_id=f"r{i + 1:0{width}d}", table=table))
    label = (f"sim(theta={config.theta_true:g},tau={config.tau:g},"
             f"k={config.n_readers},seed={config.seed})")
    return StudyDataset(records=tuple(records), label=label)


def population_auc(config: SimConfig) -> float:
    """Area under the population curve se(u) = E[u**theta].

    Exact 1/(1+theta) when tau=0; otherwise the lognormal mixture over theta
    is integrated with Gauss-Hermite nodes and the area with a clustered
    trapezoid grid.
    """
    if config.tau == 0.0:
        return 1.0 / (1.0 + config.theta_true)
    nodes, weights = np.polynomial.hermite.hermgauss(64)
    thetas = np.exp(math.log(config.theta_true) + math.sqrt(2.0) * config.tau * nodes)
    w = weights / math.sqrt(math.pi)
    s = np.linspace(0.0, 1.0, 20001)
    u = s**3
    # se[j] = sum_k w_k * u_j**theta_k; u=0 contributes 0 for every theta>0
    log_u = np.log(u[1:])
    se = np.empty_like(u)
    se[0] = 0.0
    se[1:] = np.exp(np.outer(log_u, thetas)) @ w
    return float(np.sum(np.diff(u) * (se[1:] + se[:-1]) / 2.0))


def _phm_replicate(rep_config: SimConfig, effects_mode: str, level: float,
                   correction: str, theta_true: float):
    dataset = generate(rep_config).corrected(correction)
    thetas = [phm.reader_theta(rec.table, rec.reader_id) for rec in dataset.records]
    if effects_mode == "random":
        fit = phm.fit_random(thetas, level=level)
    else:
        fit = phm.fit_fixed(thetas, level=level)
    lo, hi = phm.theta_ci(fit)
    covered = lo <= theta_true <= hi
    width = fit.auc_ci[1] - fit.auc_ci[0]
    return covered, width


def _bivariate_replicate(rep_config: SimConfig, effects_mode: str, level: float,
                         correction: str, bootstrap_b: int, true_auc: float):
    dataset = generate(rep_config)
    boot = bivariate.auc_ci_bootstrap(dataset, effects_mode=effects_mode, b=bootstrap_b,
                                      level=level, seed=rep_config.seed,
                                      correction=correction)
    covered = boot.lower <= true_auc <= boot.upper
    return covered, boot.upper - boot.lower


def coverage_experiment(config: SimConfig, n_sims: int, engine: str = "phm",
                        effects_mode: str = "random", level: float = 0.95,
                        bootstrap_b: int = 200, correction: str = "affected",
                        workers: int = 1) -> CoverageReport:
    """Simulate -> fit -> CI n_sims times and report how often truth is covered.

    For the phm engine the CI checked is the Wald interval for theta; for the
    bivariate engine it is the bootstrap AUC interval against the population
    AUC. Replicate r reruns everything under a child seed derived from
    (config.seed, r), so the report is identical for any `workers` value.
    Replicates whose fit raises are counted as failures, not fatal.
    """
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    if engine not in ("phm", "bivariate"):
        raise ValueError(f"engine must be 'phm' or 'bivariate', got {engine!r}")
    true_auc = population_auc(config)
    base = streams.derive_seed(config.seed, streams.KIND_COVERAGE)

    def one(rep: int):
        rep_config = replace(config, seed=streams.derive_seed(base, rep))
        try:
            if engine == "phm":
                return _phm_replicate(rep_config, effects_mode, level, correction,
                                      config.theta_true)
            return _bivariate_replicate(rep_config, effects_mode, level, correction,
                                        bootstrap_b, true_auc)
        except Exception:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(n_sims)))
    else:
        results = [one(rep) for rep in range(n_sims)]

    ok = [r for r in results if r is not None]
    n_failed = n_sims - len(ok)
    n_covered = sum(1 for covered, _ in ok if covered)
    coverage = n_covered / len(ok) if ok else 0.0
    mean_width = math.fsum(w for _, w in ok) / len(ok) if ok else 0.0
    return CoverageReport(engine=engine, effects_mode=effects_mode, level=level,
                          n_sims=n_sims, n_failed=n_failed, n_covered=n_covered,
                          coverage=coverage, mean_ci_width=mean_width)
