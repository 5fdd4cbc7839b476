"""FastAPI application wrapping the analysis pipeline.

Run with: uvicorn srocmeta.service:app
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException

from ..dataio import serialize_dataset
from ..errors import NonConvergenceError, SrocError
from ..pipeline import AnalysisOptions, run_analysis
from ..report import to_json
from ..simulate import SimConfig, coverage_experiment, generate
from ..svgplot import SvgOptions, to_svg
from ..tables import ContingencyTable, ReaderRecord, StudyDataset
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    CoverageRequest,
    CoverageResponse,
    SimSettings,
    SimulateResponse,
)


def _dataset_from_rows(label: str, rows) -> StudyDataset:
    records = tuple(
        ReaderRecord(
            reader_id=row.reader_id,
            group=row.group,
            table=ContingencyTable(tp=row.tp, fp=row.fp, fn=row.fn, tn=row.tn),
        )
        for row in rows
    )
    return StudyDataset(records=records, label=label)


def _sim_config(settings: SimSettings) -> SimConfig:
    return SimConfig(
        n_readers=settings.n_readers,
        n_diseased=settings.n_diseased,
        n_healthy=settings.n_healthy,
        theta_true=settings.theta_true,
        tau=settings.tau,
        fpr_logit_mean=settings.fpr_logit_mean,
        fpr_logit_sd=settings.fpr_logit_sd,
        seed=settings.seed,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="srocmeta",
        description="Summary-ROC meta-analysis of multi-reader diagnostic studies",
        version="0.1.0",
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/analyze", response_model=AnalyzeResponse, response_model_exclude_none=True)
    def analyze(request: AnalyzeRequest) -> AnalyzeResponse:
        try:
            dataset = _dataset_from_rows(request.label, request.readers)
            options = AnalysisOptions(
                model=request.model,
                effects=request.effects,
                correction=request.correction,
                fit_subgroups=request.fit_subgroups,
                weight_by_cases=request.weight_by_cases,
                ai_auc=request.ai_auc,
                ai_auc_ci=request.ai_auc_ci,
                bootstrap_b=request.bootstrap_b,
                level=request.level,
                seed=request.seed,
            )
            report = run_analysis(dataset, options)
        except NonConvergenceError as exc:
            raise HTTPException(status_code=500, detail=f"fit did not converge: {exc}")
        except (SrocError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        svg = None
        if request.include_svg:
            svg = to_svg(report, SvgOptions(
                width_px=request.svg.width_px,
                height_px=request.svg.height_px,
                show_pooled_cross=request.svg.show_pooled_cross,
                show_region=request.svg.show_region,
            ))
        # round-trip through the canonical emitter so numbers match file output
        return AnalyzeResponse(report=json.loads(to_json(report)), svg=svg)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(settings: SimSettings) -> SimulateResponse:
        try:
            dataset = generate(_sim_config(settings))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return SimulateResponse(label=dataset.label, n_readers=dataset.n_readers,
                                csv=serialize_dataset(dataset))

    @app.post("/coverage", response_model=CoverageResponse)
    def coverage(request: CoverageRequest) -> CoverageResponse:
        try:
            result = coverage_experiment(
                _sim_config(request.sim),
                n_sims=request.n_sims,
                engine=request.engine,
                effects_mode=request.effects,
                level=request.level,
                bootstrap_b=request.bootstrap_b,
            )
        except (SrocError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return CoverageResponse(
            engine=result.engine,
            effects=result.effects_mode,
            level=result.level,
            n_sims=result.n_sims,
            n_failed=result.n_failed,
            n_covered=result.n_covered,
            coverage=result.coverage,
            mean_ci_width=result.mean_ci_width,
        )

    return app


app = create_app()
