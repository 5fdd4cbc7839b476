"""Bivariate random-effects engine for (logit Se, logit FPR).

Model: y_i ~ Normal(mu, Sigma + C_i) independently across readers, where y_i
and the diagonal within-reader covariance C_i come from the logit transform
of reader i's corrected table. Sigma is estimated by restricted maximum
likelihood over the parameterisation (log sd_A, log sd_B, atanh rho), with mu
profiled out by generalised least squares at every candidate Sigma. All
reader reductions use math.fsum, so fits are bit-identical under reader
permutation.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import (
    AllReplicatesFailedError,
    BootstrapQualityWarning,
    DegenerateVarianceError,
    InsufficientDataError,
    NonConvergenceError,
    SingularCovarianceError,
    SrocError,
    UnorderedCurveError,
)
from .quantiles import chi2_quantile_2df, expit, logit
from .tables import ReaderRecord, StudyDataset, logit_pair

_LN_2PI = math.log(2.0 * math.pi)
_SIMPLEX_RESTARTS = (
    (math.log(0.1), math.log(0.1), 0.0),
    (0.0, 0.0, 0.0),
    (math.log(0.5), math.log(0.5), math.atanh(0.5)),
    (math.log(0.5), math.log(0.5), math.atanh(-0.5)),
)
_MAX_ITER = 10_000
_FATOL = 1e-8
_SIMPLEX_STEP = 0.5


@dataclass(frozen=True)
class BivariateFit:
    effects_mode: str
    mu: tuple[float, float]
    sigma: tuple[tuple[float, float], tuple[float, float]]
    cov_mu: tuple[tuple[float, float], tuple[float, float]]
    loglik: float
    converged: bool
    n_readers: int
    method: str = "reml"

    def summary_point(self) -> tuple[float, float]:
        """The mean operating point as (fpr, se)."""
        return expit(self.mu[1]), expit(self.mu[0])


@dataclass(frozen=True)
class BootstrapResult:
    lower: float
    upper: float
    n_used: int
    n_dropped: int
    warning: str | None = None


def _sigma_from_params(params) -> tuple[float, float, float]:
    """(s11, s12, s22) of Sigma from (log sd_A, log sd_B, atanh rho)."""
    sa = math.exp(params[0])
    sb = math.exp(params[1])
    rho = math.tanh(params[2])
    return sa * sa, rho * sa * sb, sb * sb


def _nelder_mead(fn, x0, step=_SIMPLEX_STEP, fatol=_FATOL, max_iter=_MAX_ITER):
    """Minimise fn over R^3 with the standard simplex moves.

    Convergence is declared when the spread of function values across the
    simplex drops below fatol (no parameter-spread condition: on flat ridges
    the likelihood settles long before the parameters do). Returns
    (x_best, f_best, converged).
    """
    n = len(x0)
    sim = [tuple(x0)]
    for i in range(n):
        v = list(x0)
        v[i] += step
        sim.append(tuple(v))
    fs = [fn(x) for x in sim]
    order = sorted(range(n + 1), key=lambda i: fs[i])
    sim = [sim[i] for i in order]
    fs = [fs[i] for i in order]
    converged = False
    for _ in range(max_iter):
        if max(abs(fs[0] - f) for f in fs[1:]) <= fatol:
            converged = True
            break
        centroid = tuple(math.fsum(s[j] for s in sim[:-1]) / n for j in range(n))
        worst = sim[-1]
        xr = tuple(2.0 * centroid[j] - worst[j] for j in range(n))
        fr = fn(xr)
        if fr < fs[0]:
            xe = tuple(3.0 * centroid[j] - 2.0 * worst[j] for j in range(n))
            fe = fn(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = tuple(1.5 * centroid[j] - 0.5 * worst[j] for j in range(n))
            else:
                xc = tuple(0.5 * centroid[j] + 0.5 * worst[j] for j in range(n))
            fc = fn(xc)
            if fc < min(fr, fs[-1]):
                sim[-1], fs[-1] = xc, fc
            else:
                # shrink toward the best vertex
                best = sim[0]
                for i in range(1, n + 1):
                    sim[i] = tuple(0.5 * (best[j] + sim[i][j]) for j in range(n))
                    fs[i] = fn(sim[i])
        order = sorted(range(n + 1), key=lambda i: fs[i])
        sim = [sim[i] for i in order]
        fs = [fs[i] for i in order]
    return sim[0], fs[0], converged


def _gls_pieces(y1, y2, c1, c2, s11, s12, s22):
    """Per-reader inverse-variance pieces and their fsum totals.

    C_i is diagonal, so V_i = Sigma + C_i inverts in closed form.
    Returns (ld, w11, w12, w22, sw11, sw12, sw22, mu1, mu2) or None when some
    V_i is not positive-definite (cannot happen for valid inputs but guards
    float overflow).
    """
    k = len(y1)
    ld = [0.0] * k
    w11 = [0.0] * k
    w12 = [0.0] * k
    w22 = [0.0] * k
    wy1 = [0.0] * k
    wy2 = [0.0] * k
    for i in range(k):
        v11 = s11 + c1[i]
        v22 = s22 + c2[i]
        det = v11 * v22 - s12 * s12
        if not (det > 0.0 and math.isfinite(det)):
            return None
        ld[i] = math.log(det)
        a = v22 / det
        b = -s12 / det
        d = v11 / det
        w11[i] = a
        w12[i] = b
        w22[i] = d
        wy1[i] = a * y1[i] + b * y2[i]
        wy2[i] = b * y1[i] + d * y2[i]
    sw11 = math.fsum(w11)
    sw12 = math.fsum(w12)
    sw22 = math.fsum(w22)
    det_sw = sw11 * sw22 - sw12 * sw12
    if not (det_sw > 0.0 and math.isfinite(det_sw)):
        return None
    sy1 = math.fsum(wy1)
    sy2 = math.fsum(wy2)
    mu1 = (sw22 * sy1 - sw12 * sy2) / det_sw
    mu2 = (sw11 * sy2 - sw12 * sy1) / det_sw
    return ld, w11, w12, w22, sw11, sw12, sw22, mu1, mu2


def _log_likelihood(y1, y2, c1, c2, s11, s12, s22, restricted: bool):
    """Profiled (mu = GLS) log-likelihood at Sigma; None if not evaluable."""
    pieces = _gls_pieces(y1, y2, c1, c2, s11, s12, s22)
    if pieces is None:
        return None
    ld, w11, w12, w22, sw11, sw12, sw22, mu1, mu2 = pieces
    k = len(y1)
    quad_terms = [0.0] * k
    for i in range(k):
        r1 = y1[i] - mu1
        r2 = y2[i] - mu2
        quad_terms[i] = w11[i] * r1 * r1 + 2.0 * w12[i] * r1 * r2 + w22[i] * r2 * r2
    quad = math.fsum(quad_terms)
    logdet_sum = math.fsum(ld)
    if restricted:
        det_sw = sw11 * sw22 - sw12 * sw12
        ll = -0.5 * ((2 * k - 2) * _LN_2PI + logdet_sum + math.log(det_sw) + quad)
    else:
        ll = -0.5 * (2 * k * _LN_2PI + logdet_sum + quad)
    return ll, mu1, mu2, sw11, sw12, sw22


def _moment_start(y1, y2, c1, c2):
    k = len(y1)
    m1 = math.fsum(y1) / k
    m2 = math.fsum(y2) / k
    v1 = math.fsum((a - m1) ** 2 for a in y1) / max(k - 1, 1) - math.fsum(c1) / k
    v2 = math.fsum((a - m2) ** 2 for a in y2) / max(k - 1, 1) - math.fsum(c2) / k
    cov = math.fsum((a - m1) * (b - m2) for a, b in zip(y1, y2)) / max(k - 1, 1)
    v1 = max(v1, 1e-3)
    v2 = max(v2, 1e-3)
    rho = max(-0.9, min(0.9, cov / math.sqrt(v1 * v2)))
    return 0.5 * math.log(v1), 0.5 * math.log(v2), math.atanh(rho)


def fit_reml(dataset: StudyDataset, effects_mode: str = "random",
             correction: str = "affected", method: str = "reml") -> BivariateFit:
    """Fit the bivariate model to a dataset.

    Random mode maximises the restricted likelihood (or the ordinary profile
    likelihood when method="ml") over Sigma with a Nelder-Mead simplex from
    five dispersed starting points, also evaluating the Sigma=0 boundary so
    the returned optimum is never worse than the fixed-effects fit. Fixed
    mode is the single closed-form GLS step at Sigma=0.
    """
    if effects_mode not in ("fixed", "random"):
        raise ValueError(f"effects_mode must be 'fixed' or 'random', got {effects_mode!r}")
    if method not in ("reml", "ml"):
        raise ValueError(f"method must be 'reml' or 'ml', got {method!r}")
    k = dataset.n_readers
    if effects_mode == "fixed" and k < 2:
        raise InsufficientDataError("bivariate fixed-effects fit needs at least 2 readers")
    if effects_mode == "random" and k < 3:
        raise InsufficientDataError("bivariate random-effects fit needs at least 3 readers")

    corrected = dataset.corrected(correction)
    y1, y2, c1, c2 = [], [], [], []
    for rec in corrected.records:
        y, c = logit_pair(rec.table)
        y1.append(y[0])
        y2.append(y[1])
        c1.append(c[0])
        c2.append(c[1])

    restricted = method == "reml"

    def negloglik(params):
        s11, s12, s22 = _sigma_from_params(params)
        out = _log_likelihood(y1, y2, c1, c2, s11, s12, s22, restricted)
        if out is None:
            return math.inf
        return -out[0]

    boundary = _log_likelihood(y1, y2, c1, c2, 0.0, 0.0, 0.0, restricted)
    if boundary is None:
        raise SingularCovarianceError("within-reader covariances are degenerate")

    if effects_mode == "fixed":
        return _build_fit("fixed", method, boundary, (0.0, 0.0, 0.0), True, k)

    starts = [_moment_start(y1, y2, c1, c2), *_SIMPLEX_RESTARTS]
    best = None
    any_success = False
    for x0 in starts:
        x, fx, ok = _nelder_mead(negloglik, x0)
        any_success = any_success or ok
        if best is None or fx < best[0]:
            best = (fx, x, ok)

    if -boundary[0] <= best[0]:
        # Sigma = 0 boundary is at least as good as every interior candidate.
        return _build_fit("random", method, boundary, (0.0, 0.0, 0.0), True, k)
    if not any_success:
        raise NonConvergenceError(
            f"all {len(starts)} simplex restarts hit the {_MAX_ITER}-iteration cap"
        )
    s11, s12, s22 = _sigma_from_params(best[1])
    out = _log_likelihood(y1, y2, c1, c2, s11, s12, s22, restricted)
    return _build_fit("random", method, out, (s11, s12, s22), best[2], k)


def _build_fit(effects_mode, method, ll_out, sigma, converged, k) -> BivariateFit:
    ll, mu1, mu2, sw11, sw12, sw22 = ll_out
    det_sw = sw11 * sw22 - sw12 * sw12
    cov_mu = ((sw22 / det_sw, -sw12 / det_sw), (-sw12 / det_sw, sw11 / det_sw))
    s11, s12, s22 = sigma
    return BivariateFit(
        effects_mode=effects_mode,
        mu=(mu1, mu2),
        sigma=((s11, s12), (s12, s22)),
        cov_mu=cov_mu,
        loglik=ll,
        converged=converged,
        n_readers=k,
        method=method,
    )


_GRID_LO = logit(0.001)
_GRID_HI = logit(0.999)


def sroc_from_bivariate(fit: BivariateFit, grid_size: int = 201) -> list[tuple[float, float]]:
    """Regression-line SROC: logit Se regressed on logit FPR through mu.

    The grid spans logit FPR over [logit 0.001, logit 0.999]; the curve passes
    exactly through the summary point at fpr = expit(mu_B).
    """
    sigma_bb = fit.sigma[1][1]
    if sigma_bb <= 0.0:
        raise DegenerateVarianceError(
            "between-reader variance of logit FPR is zero; no regression curve exists"
        )
    slope = fit.sigma[0][1] / sigma_bb
    return _line_curve(fit.mu, slope, grid_size)


def _line_curve(mu, slope, grid_size):
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    step = (_GRID_HI - _GRID_LO) / (grid_size - 1)
    pts = []
    for j in range(grid_size):
        x = _GRID_LO + j * step
        pts.append((expit(x), expit(mu[0] + slope * (x - mu[1]))))
    return pts


def flat_curve(fit: BivariateFit, grid_size: int = 201) -> list[tuple[float, float]]:
    """The slope-0 limit curve Se = expit(mu_A), used when sigma_BB = 0
    (|rho| <= 1 then forces sigma_AB = 0, so slope 0 is the exact limit)."""
    return _line_curve(fit.mu, 0.0, grid_size)


def bivariate_auc(fit: BivariateFit, grid_size: int = 2001) -> float:
    """Numeric AUC of the fitted SROC, with the flat fallback when degenerate."""
    try:
        curve = sroc_from_bivariate(fit, grid_size)
    except DegenerateVarianceError:
        curve = flat_curve(fit, grid_size)
    return auc_numeric(curve)


def auc_numeric(curve: list[tuple[float, float]]) -> float:
    """Trapezoid area under a curve of (fpr, se) points.

    The curve is extended to the exact corners (0,0) and (1,1) by linear
    continuation when it does not already reach them.
    """
    xs = [p[0] for p in curve]
    ys = [p[1] for p in curve]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise UnorderedCurveError("curve fpr values must be strictly increasing")
    if xs[0] > 0.0:
        xs.insert(0, 0.0)
        ys.insert(0, 0.0)
    if xs[-1] < 1.0:
        xs.append(1.0)
        ys.append(1.0)
    return math.fsum(
        (xs[i + 1] - xs[i]) * (ys[i + 1] + ys[i]) / 2.0 for i in range(len(xs) - 1)
    )


def confidence_region(fit: BivariateFit, level: float = 0.95,
                      n_points: int = 64) -> list[tuple[float, float]]:
    """Elliptical confidence region for the summary point, as a closed polygon
    of (fpr, se) vertices (first vertex repeated last)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    if n_points < 16:
        raise ValueError(f"n_points must be at least 16, got {n_points}")
    (m11, m12), (_, m22) = fit.cov_mu
    if not (m11 > 0.0 and m11 * m22 - m12 * m12 > 0.0):
        raise SingularCovarianceError("cov_mu is not positive-definite")
    l11 = math.sqrt(m11)
    l21 = m12 / l11
    l22_sq = m22 - l21 * l21
    if l22_sq <= 0.0:
        raise SingularCovarianceError("cov_mu is not positive-definite")
    l22 = math.sqrt(l22_sq)
    r = math.sqrt(chi2_quantile_2df(level))
    mu_a, mu_b = fit.mu
    pts = []
    for j in range(n_points):
        t = 2.0 * math.pi * j / n_points
        va = mu_a + r * l11 * math.cos(t)
        vb = mu_b + r * (l21 * math.cos(t) + l22 * math.sin(t))
        pts.append((expit(vb), expit(va)))
    pts.append(pts[0])
    return pts


def auc_ci_bootstrap(dataset: StudyDataset, effects_mode: str = "random",
                     b: int = 2000, level: float = 0.95, seed: int = 0,
                     correction: str = "affected", grid_size: int = 2001,
                     workers: int = 1) -> BootstrapResult:
    """Cluster-bootstrap percentile interval for the bivariate SROC AUC.

    Readers are resampled with replacement B times; each replicate refits and
    integrates its curve. Replicate streams derive from (seed, replicate), so
    the interval is identical for any `workers` value. Replicates whose refit
    raises are dropped and counted; >10% drops attaches a quality warning.
    """
    if b < 100:
        raise ValueError(f"bootstrap needs b >= 100, got {b}")
    k = dataset.n_readers
    min_k = 2 if effects_mode == "fixed" else 3
    if k < min_k:
        raise InsufficientDataError(
            f"bivariate {effects_mode} bootstrap needs at least {min_k} readers"
        )

    def one(rep: int):
        gen = streams.stream(seed, streams.KIND_BOOTSTRAP, rep)
        records = []
        for j in range(k):
            idx = min(int(streams.uniform_open(gen) * k), k - 1)
            src = dataset.records[idx]
            # resampled readers get positional ids so duplicates stay distinct
            records.append(ReaderRecord(reader_id=f"{src.reader_id}#{j}", table=src.table,
                                        group=src.group))
        resampled = StudyDataset(records=tuple(records), label=dataset.label)
        try:
            fit = fit_reml(resampled, effects_mode=effects_mode, correction=correction)
            return bivariate_auc(fit, grid_size)
        except SrocError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(b)))
    else:
        results = [one(rep) for rep in range(b)]

    aucs = [a for a in results if a is not None]
    n_dropped = b - len(aucs)
    if not aucs:
        raise AllReplicatesFailedError("all bootstrap replicates failed to refit")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(np.asarray(aucs), [100.0 * alpha, 100.0 * (1.0 - alpha)])
    warning = None
    if n_dropped > 0.1 * b:
        warning = (f"bootstrap quality: {n_dropped}/{b} replicates failed to "
                   f"refit and were dropped")
        warnings.warn(warning, BootstrapQualityWarning, stacklevel=2)
    return BootstrapResult(lower=float(lo), upper=float(hi), n_used=len(aucs),
                           n_dropped=n_dropped, warning=warning)
