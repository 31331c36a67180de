"""Minimal self-contained SVG line plots of coverage curves."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .metrics import CoverageCurve

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]
DASHES = ["", "6,3", "2,2", "8,3,2,3"]

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 170, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def svg_text(curves: list[CoverageCurve], title: str = "") -> str:
    if not curves:
        raise ValueError("emit_plot needs at least one curve")
    log_x = curves[0].metric == "rate"
    xs = np.concatenate([np.asarray(c.thresholds, dtype=float) for c in curves])
    if log_x:
        xs = np.log10(xs[xs > 0])
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        if log_x:
            x = np.log10(x)
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + (1.0 - y) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
           'font-family="sans-serif" font-size="11">',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="white" stroke="black"/>']
    # y grid
    for y in np.linspace(0, 1, 6):
        out.append(f'<line x1="{LEFT}" y1="{_fmt(py(y))}" x2="{LEFT + pw}" y2="{_fmt(py(y))}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(py(y) + 4)}" text-anchor="end">{y:.1f}</text>')
    # x ticks
    if log_x:
        ticks = [10.0 ** k for k in range(int(np.ceil(x0)), int(np.floor(x1)) + 1)]
        labels = [f"1e{int(np.log10(t))}" for t in ticks]
    else:
        ticks = list(np.linspace(x0, x1, 9))
        labels = [f"{t:g}" for t in ticks]
    for t, lab in zip(ticks, labels):
        x = _fmt(px(t))
        out.append(f'<line x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + ph + 16}" text-anchor="middle">{lab}</text>')
    xlabel = "Rate threshold [bit/s]" if log_x else "SINR threshold [dB]"
    ylabel = "Rate coverage" if log_x else "SINR coverage"
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{LEFT + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')

    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[(i // len(PALETTE)) % len(DASHES)]
        th = np.asarray(c.thresholds, dtype=float)
        keep = th > 0 if log_x else np.isfinite(th)
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(th[keep], np.asarray(c.coverage)[keep]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>')
        ly = TOP + 12 + 16 * i
        lx = LEFT + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="1.5"'
                   f'{dash_attr}/>')
        out.append(f'<text class="legend" x="{lx + 28}" y="{ly + 4}">{escape(c.label or c.metric)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(curves: list[CoverageCurve], path, title: str = "") -> Path:
    """Write the curves as an SVG line plot (log x-axis for rate curves)."""
    path = Path(path)
    text = svg_text(curves, title)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
