"""Proportional-hazards (Lehmann-family) summary ROC engine.

Each reader's operating point (FPR, Se) is summarised by the accuracy
parameter theta solving Se = FPR**theta; readers are pooled on the ln theta
scale by inverse-variance weighting (fixed effects) or DerSimonian-Laird
(random effects). The SROC curve is se = fpr**theta and its area is exactly
1/(1+theta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import BelowDiagonalWarning, BoundaryError, InsufficientDataError
from .quantiles import z_for_level
from .tables import ContingencyTable, false_positive_rate, sensitivity


@dataclass(frozen=True)
class ReaderTheta:
    """One reader's Lehmann accuracy parameter and its log-scale variance."""

    reader_id: str
    theta: float
    var_ln_theta: float


@dataclass(frozen=True)
class PhmFit:
    effects_mode: str
    theta_pooled: float
    se_ln_theta: float
    tau2: float
    auc: float
    auc_ci: tuple[float, float]
    level: float
    per_reader: tuple[ReaderTheta, ...]


def reader_theta(corrected_table: ContingencyTable, reader_id: str = "") -> ReaderTheta:
    """Accuracy parameter for one reader from a zero-free table.

    theta = ln(Se)/ln(FPR) puts the observed point exactly on the curve
    se = fpr**theta; the variance of ln theta comes from the delta method
    with Var(ln Se) = (1-Se)/(n1*Se) and Var(ln FPR) = (1-FPR)/(n0*FPR).
    Warns when theta > 1 (point below the chance diagonal).
    """
    se = sensitivity(corrected_table)
    fpr = false_positive_rate(corrected_table)
    if not (0.0 < se < 1.0 and 0.0 < fpr < 1.0):
        raise BoundaryError(
            f"reader {reader_id or '?'}: Se={se:g}, FPR={fpr:g} on the unit-square "
            f"boundary; apply a continuity correction first"
        )
    ln_se = math.log(se)
    ln_fpr = math.log(fpr)
    theta = ln_se / ln_fpr
    n1 = corrected_table.n_diseased
    n0 = corrected_table.n_healthy
    var_ln_se = (1.0 - se) / (n1 * se)
    var_ln_fpr = (1.0 - fpr) / (n0 * fpr)
    var_ln_theta = var_ln_se / ln_se**2 + var_ln_fpr / ln_fpr**2
    if theta > 1.0:
        warnings.warn(
            f"reader {reader_id or '?'}: theta={theta:.4g} > 1 (below the chance diagonal)",
            BelowDiagonalWarning,
            stacklevel=2,
        )
    return ReaderTheta(reader_id=reader_id, theta=theta, var_ln_theta=var_ln_theta)


def _pooled_fit(readers, weights, tau2, effects_mode, level):
    # fsum keeps pooling invariant to reader order, bit for bit.
    sum_w = math.fsum(weights)
    ln_pooled = math.fsum(w * math.log(r.theta) for w, r in zip(weights, readers)) / sum_w
    se_ln = sum_w ** -0.5
    theta_pooled = math.exp(ln_pooled)
    auc = auc_from_theta(theta_pooled)
    lo, hi = _wald_auc_ci(ln_pooled, se_ln, level)
    return PhmFit(
        effects_mode=effects_mode,
        theta_pooled=theta_pooled,
        se_ln_theta=se_ln,
        tau2=tau2,
        auc=auc,
        auc_ci=(lo, hi),
        level=level,
        per_reader=tuple(readers),
    )


def fit_fixed(readers: list[ReaderTheta], level: float = 0.95) -> PhmFit:
    """Inverse-variance-weighted pooling of ln theta (single source of variation)."""
    if len(readers) < 1:
        raise InsufficientDataError("fixed-effects pooling needs at least one reader")
    weights = [1.0 / r.var_ln_theta for r in readers]
    return _pooled_fit(readers, weights, 0.0, "fixed", level)


def fit_random(readers: list[ReaderTheta], level: float = 0.95) -> PhmFit:
    """DerSimonian-Laird random-effects pooling of ln theta."""
    k = len(readers)
    if k < 2:
        raise InsufficientDataError("random-effects pooling needs at least two readers")
    w = [1.0 / r.var_ln_theta for r in readers]
    sum_w = math.fsum(w)
    ln_mean = math.fsum(wi * math.log(r.theta) for wi, r in zip(w, readers)) / sum_w
    q = math.fsum(wi * (math.log(r.theta) - ln_mean) ** 2 for wi, r in zip(w, readers))
    c = sum_w - math.fsum(wi * wi for wi in w) / sum_w
    tau2 = max(0.0, (q - (k - 1)) / c) if c > 0 else 0.0
    w_star = [1.0 / (r.var_ln_theta + tau2) for r in readers]
    return _pooled_fit(readers, w_star, tau2, "random", level)


def sroc_curve(theta: float, grid_size: int = 201) -> list[tuple[float, float]]:
    """Points (fpr, fpr**theta) from (0,0) to (1,1).

    The grid is cubically clustered toward fpr=0, where the curve is
    steepest, so a trapezoid over the returned points reproduces the
    analytic area 1/(1+theta) to well under 1e-6 even at 10 001 points.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    n = grid_size - 1
    pts = []
    for j in range(grid_size):
        u = (j / n) ** 3
        pts.append((u, u**theta))
    return pts


def auc_from_theta(theta: float) -> float:
    """Exact area under se = fpr**theta over [0, 1]."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return 1.0 / (1.0 + theta)


def _wald_auc_ci(ln_theta: float, se_ln_theta: float, level: float) -> tuple[float, float]:
    z = z_for_level(level)
    theta_lo = math.exp(ln_theta - z * se_ln_theta)
    theta_hi = math.exp(ln_theta + z * se_ln_theta)
    # AUC = 1/(1+theta) is decreasing in theta, so the bounds swap.
    return 1.0 / (1.0 + theta_hi), 1.0 / (1.0 + theta_lo)


def auc_ci(fit: PhmFit) -> tuple[float, float]:
    """Wald interval on ln theta mapped monotonically to the AUC scale."""
    if fit.se_ln_theta < 0:
        raise ValueError("se_ln_theta must be non-negative")
    return _wald_auc_ci(math.log(fit.theta_pooled), fit.se_ln_theta, fit.level)


def theta_ci(fit: PhmFit) -> tuple[float, float]:
    """Wald interval for theta itself (used by the coverage harness)."""
    z = z_for_level(fit.level)
    ln_theta = math.log(fit.theta_pooled)
    return (math.exp(ln_theta - z * fit.se_ln_theta),
            math.exp(ln_theta + z * fit.se_ln_theta))
