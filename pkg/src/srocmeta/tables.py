"""Per-reader 2x2 contingency tables and the point metrics derived from them.

Cells are stored as floats so that continuity-corrected tables flow through
the same type; raw study input is validated to integers at the parsing layer.
All functions here are pure and operate on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DatasetFormatError, InfiniteLogitError, InfiniteOddsError, UndefinedMetricError

CORRECTION_MODES = ("none", "affected", "all")
_CORRECTION_INCREMENT = 0.5


@dataclass(frozen=True)
class ContingencyTable:
    """One reader's decision counts against ground truth."""

    tp: float
    fp: float
    fn: float
    tn: float

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"cell {name} must be a non-negative finite number, got {v}")

    @property
    def n_diseased(self) -> float:
        return self.tp + self.fn

    @property
    def n_healthy(self) -> float:
        return self.fp + self.tn

    @property
    def case_count(self) -> float:
        return self.n_diseased + self.n_healthy

    def has_zero_cell(self) -> bool:
        return min(self.tp, self.fp, self.fn, self.tn) == 0


@dataclass(frozen=True)
class ReaderRecord:
    """A labelled reader: unique id, optional subgroup, and its table."""

    reader_id: str
    table: ContingencyTable
    group: str | None = None

    def __post_init__(self):
        if not self.reader_id:
            raise ValueError("reader_id must be non-empty")
        if self.table.n_diseased < 1 or self.table.n_healthy < 1:
            raise ValueError(
                f"reader {self.reader_id!r}: each reader must have at least one "
                f"diseased and one healthy case"
            )


@dataclass(frozen=True)
class StudyDataset:
    """An ordered collection of reader records from one study."""

    records: tuple[ReaderRecord, ...]
    label: str = "study"

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise ValueError("a dataset needs at least one reader")
        seen = set()
        for rec in self.records:
            if rec.reader_id in seen:
                raise DatasetFormatError(f"duplicate reader_id {rec.reader_id!r}")
            seen.add(rec.reader_id)

    @property
    def n_readers(self) -> int:
        return len(self.records)

    def groups(self) -> tuple[str, ...]:
        """Distinct group labels in first-appearance order."""
        out = []
        for rec in self.records:
            if rec.group is not None and rec.group not in out:
                out.append(rec.group)
        return tuple(out)

    def subset(self, group: str) -> "StudyDataset":
        recs = tuple(r for r in self.records if r.group == group)
        return StudyDataset(records=recs, label=f"{self.label}/{group}")

    def corrected(self, mode: str) -> "StudyDataset":
        """Dataset with `apply_continuity_correction(mode)` applied to every table."""
        recs = tuple(replace(r, table=apply_continuity_correction(r.table, mode))
                     for r in self.records)
        return StudyDataset(records=recs, label=self.label)


def sensitivity(table: ContingencyTable) -> float:
    if table.n_diseased == 0:
        raise UndefinedMetricError("sensitivity undefined: no diseased cases (tp+fn=0)")
    return table.tp / table.n_diseased


def specificity(table: ContingencyTable) -> float:
    if table.n_healthy == 0:
        raise UndefinedMetricError("specificity undefined: no healthy cases (fp+tn=0)")
    return table.tn / table.n_healthy


def false_positive_rate(table: ContingencyTable) -> float:
    """1 - specificity, computed as fp/(fp+tn) to keep small rates exact."""
    if table.n_healthy == 0:
        raise UndefinedMetricError("false positive rate undefined: no healthy cases (fp+tn=0)")
    return table.fp / table.n_healthy


def youden_j(table: ContingencyTable) -> float:
    """Se + Sp - 1; zero on the chance line."""
    return sensitivity(table) + specificity(table) - 1.0


def accuracy(table: ContingencyTable) -> float:
    if table.case_count == 0:
        raise UndefinedMetricError("accuracy undefined: empty table")
    return (table.tp + table.tn) / table.case_count


def f1_score(table: ContingencyTable) -> float:
    denom = 2.0 * table.tp + table.fp + table.fn
    if denom == 0:
        raise UndefinedMetricError("f1 undefined: tp=fp=fn=0")
    return 2.0 * table.tp / denom


def ppv(table: ContingencyTable) -> float:
    denom = table.tp + table.fp
    if denom == 0:
        raise UndefinedMetricError("ppv undefined: reader made no positive calls (tp+fp=0)")
    return table.tp / denom


def npv(table: ContingencyTable) -> float:
    denom = table.tn + table.fn
    if denom == 0:
        raise UndefinedMetricError("npv undefined: reader made no negative calls (tn+fn=0)")
    return table.tn / denom


def diagnostic_odds_ratio(table: ContingencyTable) -> float:
    if table.fp == 0 or table.fn == 0:
        raise InfiniteOddsError(
            "diagnostic odds ratio infinite (fp=0 or fn=0); apply a continuity correction first"
        )
    return (table.tp * table.tn) / (table.fp * table.fn)


def apply_continuity_correction(table: ContingencyTable, mode: str = "affected") -> ContingencyTable:
    """Add 0.5 to all four cells: never ("none"), only when a cell is zero
    ("affected"), or unconditionally ("all")."""
    if mode not in CORRECTION_MODES:
        raise ValueError(f"correction mode must be one of {CORRECTION_MODES}, got {mode!r}")
    if mode == "none" or (mode == "affected" and not table.has_zero_cell()):
        return table
    c = _CORRECTION_INCREMENT
    return ContingencyTable(tp=table.tp + c, fp=table.fp + c, fn=table.fn + c, tn=table.tn + c)


def logit_pair(table: ContingencyTable) -> tuple[tuple[float, float], tuple[float, float]]:
    """(logit Se, logit FPR) with their within-reader variances.

    Returns
    -------
    y : (logit Se, logit FPR)
    c : (1/tp + 1/fn, 1/fp + 1/tn), the delta-method variances of the two
        logits; the off-diagonal covariance is zero because the diseased and
        healthy arms are independent binomials.
    """
    if table.has_zero_cell():
        raise InfiniteLogitError("logit transform needs all cells > 0; correct the table first")
    # logit(Se) = ln(tp/fn) and logit(FPR) = ln(fp/tn), exact in the counts.
    y = (math.log(table.tp / table.fn), math.log(table.fp / table.tn))
    c = (1.0 / table.tp + 1.0 / table.fn, 1.0 / table.fp + 1.0 / table.tn)
    return y, c
