"""Independent pooling of sensitivity/specificity and scalar metrics.

This is the comparator the SROC engines are meant to replace; it exists so
reports can show the pooled operating point (the "orange cross") next to the
summary curve and quantify how far inside the curve it falls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InsufficientDataError, UndefinedMetricError, UnorderedCurveError
from . import tables
from .tables import ReaderRecord

WEIGHTINGS = ("unweighted", "case_weighted")

SCALAR_METRIC_FUNCS = {
    "accuracy": tables.accuracy,
    "f1": tables.f1_score,
    "youden": tables.youden_j,
    "ppv": tables.ppv,
    "npv": tables.npv,
}


@dataclass(frozen=True)
class PooledPoint:
    mean_se: float
    mean_sp: float
    weighting: str
    n_readers: int


def pooled_point(records: list[ReaderRecord], weighting: str = "unweighted") -> PooledPoint:
    """Mean sensitivity and mean specificity across readers.

    case_weighted weights each reader by its total case count, for studies
    where readers saw case sets of different sizes.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    if not records:
        raise InsufficientDataError("pooled point needs at least one reader")
    if weighting == "case_weighted":
        weights = [r.table.case_count for r in records]
    else:
        weights = [1.0] * len(records)
    total = math.fsum(weights)
    mean_se = math.fsum(w * tables.sensitivity(r.table) for w, r in zip(weights, records)) / total
    mean_sp = math.fsum(w * tables.specificity(r.table) for w, r in zip(weights, records)) / total
    return PooledPoint(mean_se=mean_se, mean_sp=mean_sp, weighting=weighting,
                       n_readers=len(records))


def pooled_scalar(records: list[ReaderRecord], metric: str) -> float:
    """Unweighted mean of a per-reader scalar metric.

    Raises UndefinedMetricError naming the first reader whose table cannot
    support the metric (e.g. ppv with tp+fp=0); correct such tables first.
    """
    if metric not in SCALAR_METRIC_FUNCS:
        raise ValueError(f"metric must be one of {sorted(SCALAR_METRIC_FUNCS)}, got {metric!r}")
    if not records:
        raise InsufficientDataError("pooled scalar needs at least one reader")
    fn = SCALAR_METRIC_FUNCS[metric]
    values = []
    for rec in records:
        try:
            values.append(fn(rec.table))
        except UndefinedMetricError as exc:
            raise UndefinedMetricError(f"reader {rec.reader_id!r}: {exc}") from exc
    return math.fsum(values) / len(values)


def beat_count(records: list[ReaderRecord], curve: list[tuple[float, float]]) -> int:
    """Number of readers strictly below the curve at their own FPR."""
    xs = [p[0] for p in curve]
    ys = [p[1] for p in curve]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise UnorderedCurveError("curve fpr values must be strictly increasing")
    count = 0
    for rec in records:
        fpr = tables.false_positive_rate(rec.table)
        se = tables.sensitivity(rec.table)
        if se < _interp(fpr, xs, ys):
            count += 1
    return count


def _interp(x: float, xs: list[float], ys: list[float]) -> float:
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    # binary search for the bracketing segment
    lo, hi = 0, len(xs) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - xs[lo]) / (xs[hi] - xs[lo])
    return ys[lo] + t * (ys[hi] - ys[lo])
