"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ReaderRow(BaseModel):
    reader_id: str = Field(min_length=1)
    group: Optional[str] = None
    tp: int = Field(ge=0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    tn: int = Field(ge=0)

    @model_validator(mode="after")
    def _nonempty_arms(self):
        if self.tp + self.fn < 1:
            raise ValueError(f"reader {self.reader_id!r} has no diseased cases (tp+fn=0)")
        if self.fp + self.tn < 1:
            raise ValueError(f"reader {self.reader_id!r} has no healthy cases (fp+tn=0)")
        return self


class SvgSettings(BaseModel):
    width_px: int = Field(default=640, ge=120)
    height_px: int = Field(default=640, ge=120)
    show_pooled_cross: bool = True
    show_region: bool = True


class AnalyzeRequest(BaseModel):
    label: str = "study"
    readers: list[ReaderRow] = Field(min_length=1)
    model: Literal["phm", "bivariate", "both"] = "both"
    effects: Literal["fixed", "random"] = "random"
    correction: Literal["none", "affected", "all"] = "affected"
    fit_subgroups: bool = True
    weight_by_cases: bool = False
    ai_auc: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    ai_auc_ci: Optional[tuple[float, float]] = None
    bootstrap_b: int = Field(default=2000, ge=100)
    level: float = Field(default=0.95, gt=0.5, lt=1.0)
    seed: int = Field(default=0, ge=0)
    include_svg: bool = False
    svg: SvgSettings = SvgSettings()

    @model_validator(mode="after")
    def _ci_needs_point(self):
        if self.ai_auc_ci is not None and self.ai_auc is None:
            raise ValueError("ai_auc_ci given without ai_auc")
        return self


class AnalyzeResponse(BaseModel):
    report: dict
    svg: Optional[str] = None


class SimSettings(BaseModel):
    n_readers: int = Field(default=10, ge=1)
    n_diseased: int = Field(default=100, ge=1)
    n_healthy: int = Field(default=100, ge=1)
    theta_true: float = Field(default=0.25, gt=0.0)
    tau: float = Field(default=0.0, ge=0.0)
    fpr_logit_mean: float = -1.734601
    fpr_logit_sd: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)


class SimulateResponse(BaseModel):
    label: str
    n_readers: int
    csv: str


class CoverageRequest(BaseModel):
    sim: SimSettings = SimSettings()
    n_sims: int = Field(default=100, ge=1)
    engine: Literal["phm", "bivariate"] = "phm"
    effects: Literal["fixed", "random"] = "random"
    level: float = Field(default=0.95, gt=0.5, lt=1.0)
    bootstrap_b: int = Field(default=200, ge=100)


class CoverageResponse(BaseModel):
    engine: str
    effects: str
    level: float
    n_sims: int
    n_failed: int
    n_covered: int
    coverage: float
    mean_ci_width: float
