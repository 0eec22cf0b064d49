"""Minimal dependency-free SVG writers for curves and grouped bars."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

_PALETTE = ("#3b4cc0", "#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 60, 20, 40, 50


def _finite(values):
    return [v for v in values if v is not None and math.isfinite(v)]


def _scale(lo: float, hi: float):
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def line_chart(
    path: str | Path,
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
) -> None:
    xs_all = _finite([x for xs, _ in series.values() for x in xs])
    ys_all = _finite([y for _, ys in series.values() for y in ys])
    if not xs_all or not ys_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = _scale(min(xs_all), max(xs_all))
    y0, y1 = _scale(min(ys_all), max(ys_all))
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def py(y):
        return _MT + ph - (y - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" stroke="black"/>',
        f'<text x="{_ML}" y="{_H - 12}" font-size="11">{x0:g}</text>',
        f'<text x="{_ML + pw}" y="{_H - 12}" text-anchor="end" font-size="11">{x1:g}</text>',
        f'<text x="{_ML - 6}" y="{_MT + ph}" text-anchor="end" font-size="11">{y0:.3g}</text>',
        f'<text x="{_ML - 6}" y="{_MT + 10}" text-anchor="end" font-size="11">{y1:.3g}</text>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">{x_label}</text>',
        f'<text x="16" y="{_MT + ph / 2}" font-size="12" transform="rotate(-90 16 {_MT + ph / 2})">{y_label}</text>',
    ]
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(
            f"{px(x):.1f},{py(y):.1f}"
            for x, y in zip(xs, ys)
            if y is not None and math.isfinite(y)
        )
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{_ML + pw - 4}" y="{_MT + 14 + 14 * i}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")


def bar_chart(
    path: str | Path,
    group_labels: Sequence[str],
    series: Mapping[str, Sequence[float]],
    title: str = "",
    y_label: str = "",
) -> None:
    ys_all = _finite([v for vals in series.values() for v in vals]) or [0.0, 1.0]
    y0, y1 = _scale(min(0.0, min(ys_all)), max(ys_all))
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    n_groups = max(1, len(group_labels))
    n_series = max(1, len(series))
    group_w = pw / n_groups
    bar_w = group_w * 0.8 / n_series

    def py(y):
        return _MT + ph - (y - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" stroke="black"/>',
        f'<text x="{_ML - 6}" y="{_MT + ph}" text-anchor="end" font-size="11">{y0:.3g}</text>',
        f'<text x="{_ML - 6}" y="{_MT + 10}" text-anchor="end" font-size="11">{y1:.3g}</text>',
        f'<text x="16" y="{_MT + ph / 2}" font-size="12" transform="rotate(-90 16 {_MT + ph / 2})">{y_label}</text>',
    ]
    for g, label in enumerate(group_labels):
        gx = _ML + g * group_w
        parts.append(
            f'<text x="{gx + group_w / 2}" y="{_H - 20}" text-anchor="middle" font-size="11">{label}</text>'
        )
        for s, (name, vals) in enumerate(series.items()):
            if g >= len(vals) or vals[g] is None or not math.isfinite(vals[g]):
                continue
            color = _PALETTE[s % len(_PALETTE)]
            x = gx + group_w * 0.1 + s * bar_w
            y = py(vals[g])
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                f'height="{_MT + ph - y:.1f}" fill="{color}"/>'
            )
    for s, name in enumerate(series):
        color = _PALETTE[s % len(_PALETTE)]
        parts.append(
            f'<text x="{_ML + pw - 4}" y="{_MT + 14 + 14 * s}" text-anchor="end" '
            f'font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
