"""Summary-ROC meta-analysis of multi-reader binary diagnostic studies.

Estimates average reader performance from per-reader 2x2 contingency tables
by fitting summary ROC models (a proportional-hazards accuracy engine and a
bivariate random-effects engine), alongside the naive pooled comparator, with
simulation-based validation, JSON/SVG reporting, a CLI, and an HTTP service.
"""

from .bivariate import (
    BivariateFit,
    BootstrapResult,
    auc_ci_bootstrap,
    auc_numeric,
    bivariate_auc,
    confidence_region,
    fit_reml,
    sroc_from_bivariate,
)
from .dataio import parse_dataset, parse_dataset_text, serialize_dataset
from .phm import (
    PhmFit,
    ReaderTheta,
    auc_ci,
    auc_from_theta,
    fit_fixed,
    fit_random,
    reader_theta,
    sroc_curve,
    theta_ci,
)
from .pipeline import AnalysisOptions, run_analysis
from .pooling import PooledPoint, beat_count, pooled_point, pooled_scalar
from .report import AiComparison, AnalysisReport, compare_auc, to_json
from .simulate import CoverageReport, SimConfig, coverage_experiment, generate, population_auc
from .svgplot import SvgOptions, to_svg
from .tables import (
    ContingencyTable,
    ReaderRecord,
    StudyDataset,
    apply_continuity_correction,
    diagnostic_odds_ratio,
    logit_pair,
    sensitivity,
    specificity,
    youden_j,
)

__version__ = "0.1.0"

__all__ = [
    "AiComparison",
    "AnalysisOptions",
    "AnalysisReport",
    "BivariateFit",
    "BootstrapResult",
    "ContingencyTable",
    "CoverageReport",
    "PhmFit",
    "PooledPoint",
    "ReaderRecord",
    "ReaderTheta",
    "SimConfig",
    "StudyDataset",
    "SvgOptions",
    "apply_continuity_correction",
    "auc_ci",
    "auc_ci_bootstrap",
    "auc_from_theta",
    "auc_numeric",
    "beat_count",
    "bivariate_auc",
    "compare_auc",
    "confidence_region",
    "coverage_experiment",
    "diagnostic_odds_ratio",
    "fit_fixed",
    "fit_random",
    "fit_reml",
    "generate",
    "logit_pair",
    "parse_dataset",
    "parse_dataset_text",
    "pooled_point",
    "pooled_scalar",
    "population_auc",
    "reader_theta",
    "run_analysis",
    "sensitivity",
    "serialize_dataset",
    "specificity",
    "sroc_curve",
    "sroc_from_bivariate",
    "theta_ci",
    "to_json",
    "to_svg",
    "youden_j",
]
