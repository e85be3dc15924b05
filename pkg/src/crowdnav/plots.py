"""Standalone SVG figures regenerated from the benchmark CSV outputs."""

from __future__ import annotations

import csv
import math
import os

_WIDTH, _HEIGHT = 640, 480
_MARGIN = 60
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class MissingPlotInputError(FileNotFoundError):
    pass


class _Axes:
    """Linear data-to-pixel mapping with 5% padding so no point clips."""

    def __init__(self, xs, ys):
        if not xs or not ys:
            raise ValueError("no data points to plot")
        self.xmin, self.xmax = min(xs), max(xs)
        self.ymin, self.ymax = min(ys), max(ys)
        xpad = (self.xmax - self.xmin) * 0.05 or 1.0
        ypad = (self.ymax - self.ymin) * 0.05 or 1.0
        self.xmin -= xpad
        self.xmax += xpad
        self.ymin -= ypad
        self.ymax += ypad

    def x(self, v):
        return _MARGIN + (v - self.xmin) / (self.xmax - self.xmin) * (_WIDTH - 2 * _MARGIN)

    def y(self, v):
        return _HEIGHT - _MARGIN - (v - self.ymin) / (self.ymax - self.ymin) * (_HEIGHT - 2 * _MARGIN)


def _svg_open(title, xlabel, ylabel, axes):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 16}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="18" y="{_HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {_HEIGHT / 2})">{ylabel}</text>',
    ]
    # axis end labels
    parts.append(f'<text x="{_MARGIN}" y="{_HEIGHT - _MARGIN + 16}" font-size="10">{axes.xmin:.2f}</text>')
    parts.append(f'<text x="{_WIDTH - _MARGIN}" y="{_HEIGHT - _MARGIN + 16}" font-size="10" '
                 f'text-anchor="end">{axes.xmax:.2f}</text>')
    parts.append(f'<text x="{_MARGIN - 4}" y="{_HEIGHT - _MARGIN}" font-size="10" '
                 f'text-anchor="end">{axes.ymin:.2f}</text>')
    parts.append(f'<text x="{_MARGIN - 4}" y="{_MARGIN + 4}" font-size="10" '
                 f'text-anchor="end">{axes.ymax:.2f}</text>')
    return parts


def _legend(parts, labels):
    for i, label in enumerate(labels):
        color = _COLORS[i % len(_COLORS)]
        y = _MARGIN + 16 * i
        parts.append(f'<rect x="{_WIDTH - _MARGIN - 110}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{_WIDTH - _MARGIN - 96}" y="{y}" font-size="11">{label}</text>')


def _read_csv(path):
    if not os.path.exists(path):
        raise MissingPlotInputError(f"missing plot input: {path}")
    with open(path) as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise ValueError(f"empty plot input: {path}")
    return rows


def _curve_figure(rows, path):
    models = sorted({r["model"] for r in rows})
    xs = [int(r["step"]) for r in rows]
    ys = [float(r["err_min"]) + float(r["ci95"]) for r in rows] + \
         [max(0.0, float(r["err_min"]) - float(r["ci95"])) for r in rows]
    axes = _Axes(xs, ys)
    parts = _svg_open("Multistep prediction error (min across samples)",
                      "prediction step", "displacement error (m)", axes)
    for i, model in enumerate(models):
        color = _COLORS[i % len(_COLORS)]
        pts = sorted(((int(r["step"]), float(r["err_min"]), float(r["ci95"]))
                      for r in rows if r["model"] == model))
        upper = [(axes.x(s), axes.y(e + c)) for s, e, c in pts]
        lower = [(axes.x(s), axes.y(max(0.0, e - c))) for s, e, c in reversed(pts)]
        band = " ".join(f"{x:.1f},{y:.1f}" for x, y in upper + lower)
        parts.append(f'<polygon points="{band}" fill="{color}" opacity="0.2"/>')
        line = " ".join(f"{axes.x(s):.1f},{axes.y(e):.1f}" for s, e, _ in pts)
        parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
    _legend(parts, models)
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def _scatter_figure(points_by_model, title, xlabel, ylabel, path):
    xs = [p[0] for pts in points_by_model.values() for p in pts]
    ys = [p[1] for pts in points_by_model.values() for p in pts]
    axes = _Axes(xs, ys)
    parts = _svg_open(title, xlabel, ylabel, axes)
    models = sorted(points_by_model)
    for i, model in enumerate(models):
        color = _COLORS[i % len(_COLORS)]
        for x, y in points_by_model[model]:
            parts.append(f'<circle cx="{axes.x(x):.1f}" cy="{axes.y(y):.1f}" r="4" '
                         f'fill="{color}" opacity="0.7"/>')
    _legend(parts, models)
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


def emit_plots(report_dir):
    """Emit the benchmark figures from metrics.csv, curves.csv, calls.csv."""
    metrics = _read_csv(os.path.join(report_dir, "metrics.csv"))
    figures = []

    curves_path = os.path.join(report_dir, "curves.csv")
    if os.path.exists(curves_path):
        with open(curves_path) as f:
            curve_rows = list(csv.DictReader(f))
        if curve_rows:
            out = os.path.join(report_dir, "fig_error_curves.svg")
            _curve_figure(curve_rows, out)
            figures.append(out)

    by_model = {}
    for r in metrics:
        if r["safety"]:
            by_model.setdefault(r["model"], []).append(
                (float(r["time_to_goal"]), float(r["safety"]))
            )
    if by_model:
        out = os.path.join(report_dir, "fig_safety_vs_time.svg")
        _scatter_figure(by_model, "Safety vs Time to goal",
                        "time to goal (s)", "safety (m)", out)
        figures.append(out)

    for metric, fname, label in (("safety", "fig_ade_vs_safety.svg", "safety (m)"),
                                 ("time_to_goal", "fig_ade_vs_time.svg", "time to goal (s)")):
        pts = {}
        for r in metrics:
            if r["ade"] and r[metric]:
                pts.setdefault(r["model"], []).append((float(r["ade"]), float(r[metric])))
        if pts:
            out = os.path.join(report_dir, fname)
            _scatter_figure(pts, f"Prediction error vs {label}",
                            "per-trial ADE (m)", label, out)
            figures.append(out)

    calls_path = os.path.join(report_dir, "calls.csv")
    if os.path.exists(calls_path):
        with open(calls_path) as f:
            call_rows = list(csv.DictReader(f))
        pts = {}
        for r in call_rows:
            pts.setdefault(r["model"], []).append((float(r["distance"]), float(r["ade"])))
        if pts:
            out = os.path.join(report_dir, "fig_error_vs_distance.svg")
            _scatter_figure(pts, "Prediction error vs distance at prediction time",
                            "mean distance to humans (m)", "call ADE (m)", out)
            figures.append(out)

    return figures
