"""Analysis report assembly, AUC comparison, and canonical JSON emission.

The JSON emitter is deliberately hand-rolled: keys appear in a fixed
documented order, every number is rendered with six significant digits, and
the same report therefore always serialises to byte-identical text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .pooling import PooledPoint
from .quantiles import Z_95, normal_cdf

RELATION_HUMAN_EXCLUDES_AI = "human_ci_excludes_ai_point"
RELATION_OVERLAP = "intervals_overlap"
RELATION_DISJOINT = "intervals_disjoint"
RELATION_NO_CI = "no_ci_available"


@dataclass(frozen=True)
class ReaderSummary:
    reader_id: str
    group: str | None
    se: float
    sp: float
    case_count: float


@dataclass(frozen=True)
class FitSummary:
    """Engine-agnostic projection of a fit for reporting and plotting."""

    engine: str
    effects_mode: str
    n_readers: int
    auc: float
    auc_ci: tuple[float, float]
    level: float
    curve: tuple[tuple[float, float], ...]
    readers_below_curve: int
    # phm engine
    theta: float | None = None
    se_ln_theta: float | None = None
    tau2: float | None = None
    # bivariate engine
    converged: bool | None = None
    loglik: float | None = None
    mu: tuple[float, float] | None = None
    sigma: tuple[tuple[float, float], tuple[float, float]] | None = None
    summary_point: tuple[float, float] | None = None
    confidence_region: tuple[tuple[float, float], ...] | None = None
    bootstrap_b: int | None = None
    bootstrap_dropped: int | None = None


@dataclass(frozen=True)
class SubgroupResult:
    group: str
    n_readers: int
    pooled_point: PooledPoint
    fits: tuple[FitSummary, ...]


@dataclass(frozen=True)
class AiComparison:
    ai_auc: float
    ai_auc_ci: tuple[float, float] | None
    human_auc: float
    human_auc_ci: tuple[float, float] | None
    difference: float
    relation: str
    z: float | None = None
    p: float | None = None


@dataclass(frozen=True)
class AnalysisReport:
    dataset_label: str
    per_reader: tuple[ReaderSummary, ...]
    fits: tuple[FitSummary, ...]
    pooled_point: PooledPoint | None
    pooled_scalars: tuple[tuple[str, float], ...]
    subgroups: tuple[SubgroupResult, ...] | None = None
    ai_comparison: AiComparison | None = None
    warnings: tuple[str, ...] = ()


def _check_interval(name, auc, ci):
    if not 0.0 < auc < 1.0:
        raise ValueError(f"{name} auc must be in (0,1), got {auc}")
    if ci is not None:
        lo, hi = ci
        if not (lo <= auc <= hi):
            raise ValueError(f"{name} interval ({lo}, {hi}) does not contain its point {auc}")


def compare_auc(human: tuple[float, tuple[float, float] | None],
                ai: tuple[float, tuple[float, float] | None]) -> AiComparison:
    """Descriptive comparison of a human summary AUC against an AI AUC.

    The z test is only formed when both interval widths are available; each
    standard error is recovered as (upper - lower) / (2 * 1.959964).
    """
    human_auc, human_ci = human
    ai_auc, ai_ci = ai
    _check_interval("human", human_auc, human_ci)
    _check_interval("ai", ai_auc, ai_ci)
    difference = human_auc - ai_auc
    z = p = None
    if human_ci is None:
        relation = RELATION_NO_CI
    elif ai_ci is None:
        if human_ci[0] <= ai_auc <= human_ci[1]:
            relation = RELATION_OVERLAP
        else:
            relation = RELATION_HUMAN_EXCLUDES_AI
    else:
        disjoint = ai_ci[1] < human_ci[0] or human_ci[1] < ai_ci[0]
        relation = RELATION_DISJOINT if disjoint else RELATION_OVERLAP
        se_h = (human_ci[1] - human_ci[0]) / (2.0 * Z_95)
        se_a = (ai_ci[1] - ai_ci[0]) / (2.0 * Z_95)
        denom = math.sqrt(se_h**2 + se_a**2)
        if denom > 0.0:
            z = difference / denom
            p = 2.0 * (1.0 - normal_cdf(abs(z)))
    return AiComparison(ai_auc=ai_auc, ai_auc_ci=ai_ci, human_auc=human_auc,
                        human_auc_ci=human_ci, difference=difference,
                        relation=relation, z=z, p=p)


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

def _fit_document(fit: FitSummary) -> dict:
    doc: dict = {
        "engine": fit.engine,
        "effects": fit.effects_mode,
        "n_readers": fit.n_readers,
    }
    if fit.engine == "phm":
        doc["theta"] = fit.theta
        doc["se_ln_theta"] = fit.se_ln_theta
        doc["tau2"] = fit.tau2
    else:
        doc["converged"] = fit.converged
        doc["loglik"] = fit.loglik
        doc["mu"] = list(fit.mu)
        doc["sigma"] = [list(row) for row in fit.sigma]
        doc["summary_point"] = list(fit.summary_point)
    doc["auc"] = fit.auc
    doc["auc_ci"] = list(fit.auc_ci)
    doc["level"] = fit.level
    if fit.bootstrap_b is not None:
        doc["bootstrap"] = {"replicates": fit.bootstrap_b, "dropped": fit.bootstrap_dropped}
    doc["readers_below_curve"] = fit.readers_below_curve
    doc["curve"] = [list(p) for p in fit.curve]
    if fit.confidence_region is not None:
        doc["confidence_region"] = [list(p) for p in fit.confidence_region]
    return doc


def _pooled_document(report: AnalysisReport) -> dict:
    doc: dict = {}
    if report.pooled_point is not None:
        pp = report.pooled_point
        doc["point"] = {"mean_se": pp.mean_se, "mean_sp": pp.mean_sp,
                        "weighting": pp.weighting, "n_readers": pp.n_readers}
    doc["scalars"] = {name: value for name, value in report.pooled_scalars}
    return doc


def report_document(report: AnalysisReport) -> dict:
    """The report as a plain dict with the documented key order."""
    doc: dict = {
        "dataset_label": report.dataset_label,
        "readers": [
            {"reader_id": r.reader_id, "group": r.group, "se": r.se, "sp": r.sp,
             "case_count": r.case_count}
            for r in report.per_reader
        ],
        "fits": [_fit_document(f) for f in report.fits],
        "pooled": _pooled_document(report),
    }
    if report.subgroups is not None:
        doc["subgroups"] = [
            {"group": g.group, "n_readers": g.n_readers,
             "pooled_point": {"mean_se": g.pooled_point.mean_se,
                              "mean_sp": g.pooled_point.mean_sp,
                              "weighting": g.pooled_point.weighting,
                              "n_readers": g.pooled_point.n_readers},
             "fits": [_fit_document(f) for f in g.fits]}
            for g in report.subgroups
        ]
    if report.ai_comparison is not None:
        cmp = report.ai_comparison
        sub: dict = {"ai_auc": cmp.ai_auc}
        if cmp.ai_auc_ci is not None:
            sub["ai_auc_ci"] = list(cmp.ai_auc_ci)
        sub["human_auc"] = cmp.human_auc
        if cmp.human_auc_ci is not None:
            sub["human_auc_ci"] = list(cmp.human_auc_ci)
        sub["difference"] = cmp.difference
        sub["relation"] = cmp.relation
        if cmp.z is not None:
            sub["z"] = cmp.z
            sub["p"] = cmp.p
        doc["ai_comparison"] = sub
    doc["warnings"] = list(report.warnings)
    return doc


def _fmt_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite number {v!r} cannot appear in a report")
    return format(float(v), ".6g")


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _emit(value, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (bool, int, float)):
        return _fmt_number(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        rows = [f'{inner}{json.dumps(k, ensure_ascii=False)}: {_emit(v, indent + 1)}'
                for k, v in value.items()]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(_is_scalar(v) for v in value):
            return "[" + ", ".join(_emit(v, indent) for v in value) + "]"
        rows = [f"{inner}{_emit(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def canonical_json(document) -> str:
    """Canonical JSON text for a plain dict/list document (insertion key
    order, 6 significant digits, deterministic bytes)."""
    return _emit(document, 0) + "\n"


def to_json(report: AnalysisReport) -> str:
    """Canonical JSON text for a report (fixed key order, 6 significant digits)."""
    return canonical_json(report_document(report))
