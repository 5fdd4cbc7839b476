"""Standalone SVG rendering of an analysis report in ROC space.

Output is plain SVG 1.1 text with no external references; coordinates are
formatted with fixed precision so identical reports render to identical
bytes. x is the false positive rate increasing left to right, y is the
sensitivity increasing bottom to top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import SrocError
from .report import AnalysisReport

DEFAULT_PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")

_ENGINE_COLORS = {"phm": "#000000", "bivariate": "#1f77b4"}
_READER_FILL = "#2e8b57"
_CROSS_COLOR = "#ff7f0e"
_MARGIN_LEFT = 70.0
_MARGIN_RIGHT = 30.0
_MARGIN_TOP = 42.0
_MARGIN_BOTTOM = 58.0


@dataclass(frozen=True)
class SvgOptions:
    width_px: int = 640
    height_px: int = 640
    show_pooled_cross: bool = True
    show_region: bool = True
    subgroup_palette: tuple[str, ...] = field(default=DEFAULT_PALETTE)
    base_radius_px: float = 4.0


class EmptyReportError(SrocError):
    """The report holds no readers, so there is nothing to draw."""


def _f(x: float) -> str:
    return f"{x:.2f}"


def to_svg(report: AnalysisReport, options: SvgOptions | None = None) -> str:
    """Render the report as a standalone SVG document."""
    opts = options or SvgOptions()
    if not report.per_reader:
        raise EmptyReportError("report has no readers to plot")

    side = min(opts.width_px - _MARGIN_LEFT - _MARGIN_RIGHT,
               opts.height_px - _MARGIN_TOP - _MARGIN_BOTTOM)
    x0, y0 = _MARGIN_LEFT, _MARGIN_TOP

    def px(fpr: float) -> float:
        return x0 + fpr * side

    def py(se: float) -> float:
        return y0 + (1.0 - se) * side

    parts: list[str] = []
    warnings: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{opts.width_px}" height="{opts.height_px}" '
        f'viewBox="0 0 {opts.width_px} {opts.height_px}">'
    )
    parts.append(f'<rect x="0" y="0" width="{opts.width_px}" height="{opts.height_px}" fill="#ffffff"/>')
    parts.append(
        f'<text x="{_f(x0 + side / 2)}" y="{_f(y0 - 16)}" text-anchor="middle" '
        f'font-family="Helvetica, Arial, sans-serif" font-size="15" fill="#000000">'
        f'{_esc(report.dataset_label)}</text>'
    )

    # gridlines every 0.1, ticks labelled every 0.2
    for i in range(1, 10):
        t = i / 10.0
        parts.append(f'<line x1="{_f(px(t))}" y1="{_f(py(0))}" x2="{_f(px(t))}" '
                     f'y2="{_f(py(1))}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<line x1="{_f(px(0))}" y1="{_f(py(t))}" x2="{_f(px(1))}" '
                     f'y2="{_f(py(t))}" stroke="#dddddd" stroke-width="1"/>')
    for i in range(0, 11, 2):
        t = i / 10.0
        parts.append(f'<text x="{_f(px(t))}" y="{_f(py(0) + 18)}" text-anchor="middle" '
                     f'font-family="Helvetica, Arial, sans-serif" font-size="11" '
                     f'fill="#333333">{t:.1f}</text>')
        parts.append(f'<text x="{_f(px(0) - 8)}" y="{_f(py(t) + 4)}" text-anchor="end" '
                     f'font-family="Helvetica, Arial, sans-serif" font-size="11" '
                     f'fill="#333333">{t:.1f}</text>')
    parts.append(f'<rect x="{_f(px(0))}" y="{_f(py(1))}" width="{_f(side)}" '
                 f'height="{_f(side)}" fill="none" stroke="#000000" stroke-width="1"/>')
    # chance diagonal
    parts.append(f'<line x1="{_f(px(0))}" y1="{_f(py(0))}" x2="{_f(px(1))}" '
                 f'y2="{_f(py(1))}" stroke="#999999" stroke-width="1" '
                 f'stroke-dasharray="6 4"/>')
    # axis labels
    parts.append(f'<text x="{_f(x0 + side / 2)}" y="{_f(py(0) + 40)}" text-anchor="middle" '
                 f'font-family="Helvetica, Arial, sans-serif" font-size="13" '
                 f'fill="#000000">False positive rate (1 - specificity)</text>')
    parts.append(f'<text x="{_f(x0 - 44)}" y="{_f(y0 + side / 2)}" text-anchor="middle" '
                 f'font-family="Helvetica, Arial, sans-serif" font-size="13" fill="#000000" '
                 f'transform="rotate(-90 {_f(x0 - 44)} {_f(y0 + side / 2)})">Sensitivity</text>')

    group_colors = _group_colors(report, opts)

    # reader markers: area proportional to case count
    counts = sorted(r.case_count for r in report.per_reader)
    m = len(counts)
    median = counts[m // 2] if m % 2 else (counts[m // 2 - 1] + counts[m // 2]) / 2.0
    for r in report.per_reader:
        radius = opts.base_radius_px * math.sqrt(r.case_count / median)
        color = group_colors.get(r.group, _READER_FILL)
        parts.append(f'<circle cx="{_f(px(1.0 - r.sp))}" cy="{_f(py(r.se))}" '
                     f'r="{radius:.3f}" fill="{color}" fill-opacity="0.55" '
                     f'stroke="{color}" stroke-width="1"/>')

    # fitted curves and confidence regions
    region_drawn = False
    for fit in report.fits:
        color = _ENGINE_COLORS.get(fit.engine, "#000000")
        parts.append(_polyline(fit.curve, px, py, color, dash=None))
        if opts.show_region and fit.confidence_region is not None:
            parts.append(_region_path(fit.confidence_region, px, py, color))
            region_drawn = True
    if report.subgroups is not None:
        for idx, sub in enumerate(report.subgroups):
            color = opts.subgroup_palette[idx % len(opts.subgroup_palette)]
            if sub.fits:
                parts.append(_polyline(sub.fits[0].curve, px, py, color, dash=None))
            if opts.show_pooled_cross:
                parts.append(_cross(px(1.0 - sub.pooled_point.mean_sp),
                                    py(sub.pooled_point.mean_se), color))
    if opts.show_region and not region_drawn:
        warnings.append("confidence region requested but not available in this report")

    # pooled operating point
    if opts.show_pooled_cross and report.pooled_point is not None:
        pp = report.pooled_point
        parts.append(_cross(px(1.0 - pp.mean_sp), py(pp.mean_se), _CROSS_COLOR))

    # legend
    legend_y = y0 + side - 10.0
    entries: list[tuple[str, str]] = [(f.engine + " sroc", _ENGINE_COLORS.get(f.engine, "#000000"))
                                      for f in report.fits]
    if report.subgroups is not None:
        entries += [(s.group, opts.subgroup_palette[i % len(opts.subgroup_palette)])
                    for i, s in enumerate(report.subgroups)]
    for i, (name, color) in enumerate(entries):
        ly = legend_y - 18.0 * (len(entries) - 1 - i)
        lx = x0 + side - 150.0
        parts.append(f'<line x1="{_f(lx)}" y1="{_f(ly - 4)}" x2="{_f(lx + 26)}" '
                     f'y2="{_f(ly - 4)}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_f(lx + 32)}" y="{_f(ly)}" '
                     f'font-family="Helvetica, Arial, sans-serif" font-size="12" '
                     f'fill="#000000">{_esc(name)}</text>')

    # AI annotation (an AUC has no ROC point, so it is reported as text)
    if report.ai_comparison is not None:
        cmp = report.ai_comparison
        ci = (f" ({_g(cmp.ai_auc_ci[0])}, {_g(cmp.ai_auc_ci[1])})"
              if cmp.ai_auc_ci is not None else ", no CI")
        parts.append(f'<text x="{_f(x0 + side - 4)}" y="{_f(y0 + side + 34)}" '
                     f'text-anchor="end" font-family="Helvetica, Arial, sans-serif" '
                     f'font-size="12" fill="#555555">AI model AUC {_g(cmp.ai_auc)}{ci}</text>')

    for w in warnings:
        parts.append(f"<!-- warning: {_esc(w)} -->")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _group_colors(report: AnalysisReport, opts: SvgOptions) -> dict:
    if report.subgroups is None:
        return {}
    return {sub.group: opts.subgroup_palette[i % len(opts.subgroup_palette)]
            for i, sub in enumerate(report.subgroups)}


def _polyline(curve, px, py, color: str, dash: str | None) -> str:
    pts = " ".join(f"{_f(px(x))},{_f(py(y))}" for x, y in curve)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"{dash_attr}/>')


def _region_path(polygon, px, py, color: str) -> str:
    d = "M " + " L ".join(f"{_f(px(x))} {_f(py(y))}" for x, y in polygon) + " Z"
    return (f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2" '
            f'stroke-dasharray="2 3"/>')


def _cross(cx: float, cy: float, color: str, arm: float = 7.0) -> str:
    return (f'<g stroke="{color}" stroke-width="2.5">'
            f'<line x1="{_f(cx - arm)}" y1="{_f(cy)}" x2="{_f(cx + arm)}" y2="{_f(cy)}"/>'
            f'<line x1="{_f(cx)}" y1="{_f(cy - arm)}" x2="{_f(cx)}" y2="{_f(cy + arm)}"/>'
            f'</g>')


def _g(x: float) -> str:
    return format(x, ".6g")


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
