"""End-to-end analysis orchestration shared by the CLI and the HTTP service.

`run_analysis` turns a dataset plus options into a complete AnalysisReport:
per-reader metrics, the requested engine fits (with curves, intervals,
regions), the naive pooled comparator, optional subgroup fits, and an
optional AI comparison.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, replace

from . import bivariate, phm, pooling, report as report_mod, streams
from .errors import DegenerateVarianceError, InsufficientDataError, UndefinedMetricError
from .report import AnalysisReport, FitSummary, ReaderSummary, SubgroupResult
from .tables import StudyDataset, apply_continuity_correction, sensitivity, specificity

SCALAR_METRICS = ("accuracy", "f1", "youden", "ppv", "npv")

_MIN_READERS = {
    ("phm", "fixed"): 1,
    ("phm", "random"): 2,
    ("bivariate", "fixed"): 2,
    ("bivariate", "random"): 3,
}


@dataclass(frozen=True)
class AnalysisOptions:
    model: str = "both"          # phm | bivariate | both
    effects: str = "random"      # fixed | random
    correction: str = "affected"
    fit_subgroups: bool = False
    weight_by_cases: bool = False
    ai_auc: float | None = None
    ai_auc_ci: tuple[float, float] | None = None
    bootstrap_b: int = 2000
    level: float = 0.95
    seed: int = 0
    curve_grid: int = 201
    workers: int = 1

    def __post_init__(self):
        if self.model not in ("phm", "bivariate", "both"):
            raise ValueError(f"model must be phm, bivariate or both, got {self.model!r}")
        if self.effects not in ("fixed", "random"):
            raise ValueError(f"effects must be fixed or random, got {self.effects!r}")
        if not 0.5 < self.level < 1.0:
            raise ValueError(f"level must be in (0.5, 1), got {self.level}")
        if self.bootstrap_b < 100:
            raise ValueError(f"bootstrap_b must be >= 100, got {self.bootstrap_b}")
        if self.ai_auc_ci is not None and self.ai_auc is None:
            raise ValueError("ai_auc_ci given without ai_auc")


def _engines(model: str) -> tuple[str, ...]:
    return ("phm", "bivariate") if model == "both" else (model,)


def _fit_phm(dataset: StudyDataset, opts: AnalysisOptions, notes: list[str]) -> FitSummary:
    corrected = dataset.corrected(opts.correction)
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        thetas = [phm.reader_theta(rec.table, rec.reader_id) for rec in corrected.records]
    notes.extend(str(w.message) for w in caught)
    if opts.effects == "random":
        fit = phm.fit_random(thetas, level=opts.level)
    else:
        fit = phm.fit_fixed(thetas, level=opts.level)
    curve = tuple(phm.sroc_curve(fit.theta_pooled, opts.curve_grid))
    return FitSummary(
        engine="phm",
        effects_mode=fit.effects_mode,
        n_readers=dataset.n_readers,
        auc=fit.auc,
        auc_ci=fit.auc_ci,
        level=fit.level,
        curve=curve,
        readers_below_curve=pooling.beat_count(list(dataset.records), list(curve)),
        theta=fit.theta_pooled,
        se_ln_theta=fit.se_ln_theta,
        tau2=fit.tau2,
    )


def _fit_bivariate(dataset: StudyDataset, opts: AnalysisOptions, boot_seed: int,
                   notes: list[str]) -> FitSummary:
    fit = bivariate.fit_reml(dataset, effects_mode=opts.effects, correction=opts.correction)
    try:
        curve = tuple(bivariate.sroc_from_bivariate(fit, opts.curve_grid))
    except DegenerateVarianceError:
        curve = tuple(bivariate.flat_curve(fit, opts.curve_grid))
        notes.append(f"{dataset.label}: bivariate SROC degenerate (sigma_BB=0); "
                     f"horizontal limit curve used")
    auc = bivariate.bivariate_auc(fit)
    boot = bivariate.auc_ci_bootstrap(
        dataset, effects_mode=opts.effects, b=opts.bootstrap_b, level=opts.level,
        seed=boot_seed, correction=opts.correction, workers=opts.workers,
    )
    if boot.warning:
        notes.append(f"{dataset.label}: {boot.warning}")
    lo, hi = boot.lower, boot.upper
    if not lo <= auc <= hi:
        # percentile intervals can, rarely, exclude the point estimate
        lo, hi = min(lo, auc), max(hi, auc)
        notes.append(f"{dataset.label}: bootstrap interval widened to include "
                     f"the point AUC")
    region = tuple(bivariate.confidence_region(fit, level=opts.level))
    return FitSummary(
        engine="bivariate",
        effects_mode=fit.effects_mode,
        n_readers=dataset.n_readers,
        auc=auc,
        auc_ci=(lo, hi),
        level=opts.level,
        curve=curve,
        readers_below_curve=pooling.beat_count(list(dataset.records), list(curve)),
        converged=fit.converged,
        loglik=fit.loglik,
        mu=fit.mu,
        sigma=fit.sigma,
        summary_point=fit.summary_point(),
        confidence_region=region,
        bootstrap_b=opts.bootstrap_b,
        bootstrap_dropped=boot.n_dropped,
    )


def _pooled_scalars(dataset: StudyDataset, opts: AnalysisOptions,
                    notes: list[str]) -> tuple[tuple[str, float], ...]:
    """Naive pooled scalars from the raw tables.

    A reader whose denominator for a metric is zero (possible for ppv/npv/f1)
    is replaced by its continuity-corrected table for that metric only, unless
    the run disables corrections, in which case the metric is skipped with a
    warning rather than silently dropping the reader.
    """
    out = []
    for metric in SCALAR_METRICS:
        fn = pooling.SCALAR_METRIC_FUNCS[metric]
        records = []
        skip_note = None
        for rec in dataset.records:
            try:
                fn(rec.table)
                records.append(rec)
            except UndefinedMetricError as exc:
                if opts.correction == "none":
                    skip_note = f"pooled scalar {metric!r} skipped: reader {rec.reader_id!r}: {exc}"
                    break
                records.append(replace(rec, table=apply_continuity_correction(rec.table)))
        if skip_note is not None:
            notes.append(skip_note)
            continue
        out.append((metric, pooling.pooled_scalar(records, metric)))
    return tuple(out)


def run_analysis(dataset: StudyDataset, options: AnalysisOptions | None = None) -> AnalysisReport:
    """Full analysis of one dataset under the given options."""
    opts = options or AnalysisOptions()
    notes: list[str] = []

    per_reader = tuple(
        ReaderSummary(
            reader_id=rec.reader_id,
            group=rec.group,
            se=sensitivity(rec.table),
            sp=specificity(rec.table),
            case_count=rec.table.case_count,
        )
        for rec in dataset.records
    )

    fits = []
    fit_index = 0
    for engine in _engines(opts.model):
        if engine == "phm":
            fits.append(_fit_phm(dataset, opts, notes))
        else:
            boot_seed = streams.derive_seed(opts.seed, fit_index)
            fits.append(_fit_bivariate(dataset, opts, boot_seed, notes))
        fit_index += 1

    weighting = "case_weighted" if opts.weight_by_cases else "unweighted"
    pooled_point = pooling.pooled_point(list(dataset.records), weighting)
    pooled_scalars = _pooled_scalars(dataset, opts, notes)

    subgroups = None
    if opts.fit_subgroups and dataset.groups():
        subgroups = _fit_subgroups(dataset, opts, fit_index, notes)

    ai_comparison = None
    if opts.ai_auc is not None:
        human = _preferred_fit(fits)
        ai_comparison = report_mod.compare_auc(
            (human.auc, human.auc_ci), (opts.ai_auc, opts.ai_auc_ci)
        )

    return AnalysisReport(
        dataset_label=dataset.label,
        per_reader=per_reader,
        fits=tuple(fits),
        pooled_point=pooled_point,
        pooled_scalars=pooled_scalars,
        subgroups=subgroups,
        ai_comparison=ai_comparison,
        warnings=tuple(notes),
    )


def _preferred_fit(fits: list[FitSummary]) -> FitSummary:
    # phm is the reference engine for AI comparisons when both are fitted
    for fit in fits:
        if fit.engine == "phm":
            return fit
    return fits[0]


def _fit_subgroups(dataset: StudyDataset, opts: AnalysisOptions, fit_index: int,
                   notes: list[str]):
    results = []
    for group in dataset.groups():
        subset = dataset.subset(group)
        sub_fits = []
        for engine in _engines(opts.model):
            need = _MIN_READERS[(engine, opts.effects)]
            if subset.n_readers < need:
                notes.append(f"subgroup {group!r}: {engine} {opts.effects} fit skipped "
                             f"(needs >= {need} readers, has {subset.n_readers})")
                fit_index += 1
                continue
            try:
                if engine == "phm":
                    sub_fits.append(_fit_phm(subset, opts, notes))
                else:
                    boot_seed = streams.derive_seed(opts.seed, fit_index)
                    sub_fits.append(_fit_bivariate(subset, opts, boot_seed, notes))
            except InsufficientDataError as exc:
                notes.append(f"subgroup {group!r}: {engine} fit skipped ({exc})")
            fit_index += 1
        if not sub_fits:
            notes.append(f"subgroup {group!r}: no fit possible; subgroup omitted")
            continue
        weighting = "case_weighted" if opts.weight_by_cases else "unweighted"
        results.append(SubgroupResult(
            group=group,
            n_readers=subset.n_readers,
            pooled_point=pooling.pooled_point(list(subset.records), weighting),
            fits=tuple(sub_fits),
        ))
    return tuple(results) if results else None
