"""Command-line interface: analyze, simulate, and coverage subcommands.

Exit codes: 0 success, 2 input or validation error, 3 fit non-convergence,
4 internal error. Diagnostics go to stderr; results go to files or stdout.
"""

from __future__ import annotations

import argparse
import sys

from .dataio import parse_dataset, parse_sim_config_text, serialize_dataset
from .errors import NonConvergenceError, SrocError
from .pipeline import AnalysisOptions, run_analysis
from .report import canonical_json, to_json
from .simulate import SimConfig, coverage_experiment, generate
from .svgplot import SvgOptions, to_svg

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INTERNAL = 4


class _StagedError(Exception):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (SrocError, OSError, ValueError) as exc:
        raise _StagedError(stage, exc) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srocmeta",
        description="Summary-ROC meta-analysis of multi-reader diagnostic studies",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    pa = sub.add_parser("analyze", help="fit SROC models to a reader-table CSV")
    pa.add_argument("input_path", help="CSV with header reader_id[,group],tp,fp,fn,tn")
    pa.add_argument("--model", choices=["phm", "bivariate", "both"], default="both")
    pa.add_argument("--effects", choices=["fixed", "random"], default="random")
    pa.add_argument("--correction", choices=["none", "affected", "all"], default="affected")
    pa.add_argument("--group-column", default=None,
                    help="name of the group column; enables subgroup fits")
    pa.add_argument("--weight-by-cases", action="store_true",
                    help="case-weight the pooled operating point")
    pa.add_argument("--ai-auc", type=float, default=None,
                    help="external model AUC to compare against")
    pa.add_argument("--ai-auc-ci", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    pa.add_argument("--bootstrap-b", type=int, default=2000)
    pa.add_argument("--level", type=float, default=0.95)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--json-out", default=None, help="write the report JSON here")
    pa.add_argument("--svg-out", default=None, help="write the figure here")

    ps = sub.add_parser("simulate", help="generate a synthetic reader-table CSV")
    _add_sim_flags(ps)
    ps.add_argument("--out", default=None, help="output CSV path (default stdout)")

    pc = sub.add_parser("coverage", help="Monte Carlo CI coverage experiment")
    _add_sim_flags(pc)
    pc.add_argument("--n-sims", type=int, default=100)
    pc.add_argument("--engine", choices=["phm", "bivariate"], default="phm")
    pc.add_argument("--effects", choices=["fixed", "random"], default="random")
    pc.add_argument("--level", type=float, default=0.95)
    pc.add_argument("--bootstrap-b", type=int, default=2000)
    return parser


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="key=value file mirroring the simulation fields; "
                        "explicit flags override it")
    p.add_argument("--n-readers", type=int, default=None)
    p.add_argument("--n-diseased", type=int, default=None)
    p.add_argument("--n-healthy", type=int, default=None)
    p.add_argument("--theta-true", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--fpr-logit-mean", type=float, default=None)
    p.add_argument("--fpr-logit-sd", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)


_SIM_DEFAULTS = dict(n_readers=10, n_diseased=100, n_healthy=100, theta_true=0.25,
                     tau=0.0, fpr_logit_mean=-1.734601, fpr_logit_sd=0.0, seed=0)


def _sim_config(args) -> SimConfig:
    overrides = {
        "n_readers": args.n_readers,
        "n_diseased": args.n_diseased,
        "n_healthy": args.n_healthy,
        "theta_true": args.theta_true,
        "tau": args.tau,
        "fpr_logit_mean": args.fpr_logit_mean,
        "fpr_logit_sd": args.fpr_logit_sd,
        "seed": args.seed,
    }
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            return parse_sim_config_text(fh.read(), overrides=overrides)
    merged = dict(_SIM_DEFAULTS)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**merged)


def _run_analyze(args) -> int:
    dataset = _staged("parse", parse_dataset, args.input_path,
                      group_column=args.group_column)
    options = _staged("parse", AnalysisOptions,
                      model=args.model,
                      effects=args.effects,
                      correction=args.correction,
                      fit_subgroups=args.group_column is not None,
                      weight_by_cases=args.weight_by_cases,
                      ai_auc=args.ai_auc,
                      ai_auc_ci=tuple(args.ai_auc_ci) if args.ai_auc_ci else None,
                      bootstrap_b=args.bootstrap_b,
                      level=args.level,
                      seed=args.seed)
    report = _staged("fit", run_analysis, dataset, options)
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    text = to_json(report)
    if args.json_out:
        _staged("write", _write, args.json_out, text)
    if args.svg_out:
        _staged("write", _write, args.svg_out, to_svg(report, SvgOptions()))
    if not args.json_out and not args.svg_out:
        sys.stdout.write(text)
    return EXIT_OK


def _run_simulate(args) -> int:
    config = _staged("simulate", _sim_config, args)
    text = serialize_dataset(generate(config))
    if args.out:
        _staged("write", _write, args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_coverage(args) -> int:
    config = _staged("coverage", _sim_config, args)
    if args.n_sims < 1:
        raise _StagedError("coverage", ValueError("--n-sims must be >= 1"))
    result = _staged("coverage", coverage_experiment, config, n_sims=args.n_sims,
                     engine=args.engine, effects_mode=args.effects, level=args.level,
                     bootstrap_b=args.bootstrap_b)
    doc = {
        "engine": result.engine,
        "effects": result.effects_mode,
        "level": result.level,
        "n_sims": result.n_sims,
        "n_failed": result.n_failed,
        "n_covered": result.n_covered,
        "coverage": result.coverage,
        "mean_ci_width": result.mean_ci_width,
    }
    sys.stdout.write(canonical_json(doc))
    return EXIT_OK


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "analyze":
            return _run_analyze(args)
        if args.subcommand == "simulate":
            return _run_simulate(args)
        return _run_coverage(args)
    except _StagedError as exc:
        if isinstance(exc.cause, NonConvergenceError):
            print(f"error [fit]: {exc.cause}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        print(f"error {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergenceError as exc:
        print(f"error [fit]: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error [internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
