"""Box-and-whisker figures written as plain SVG text.

Output depends only on the input statistics (fixed number formatting, no
timestamps), so identical tables produce identical bytes.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .experiments import BoxStats

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 48


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks


def boxplot_svg(stats: Sequence[BoxStats], title: str = "", ylabel: str = "estimate") -> str:
    """Render one box per (H, n) group, with a dashed reference line at each H."""
    stats = sorted(stats, key=lambda s: (s.hurst, s.n))
    pts = [v for s in stats for v in (s.whisker_lo, s.whisker_hi, s.hurst, *s.outliers)]
    if not pts:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = min(pts), max(pts)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.05, hi + 0.05
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def ypx(v: float) -> float:
        return MARGIN_T + ph * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(lo, hi):
        y = ypx(t)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{y:.2f}" x2="{MARGIN_L}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(
        f'<text x="14" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {MARGIN_T + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for h in sorted({s.hurst for s in stats}):
        y = ypx(h)
        out.append(
            f'<line x1="{MARGIN_L}" y1="{y:.2f}" x2="{MARGIN_L + pw}" y2="{y:.2f}" '
            f'stroke="red" stroke-dasharray="4 3"/>'
        )

    k = max(len(stats), 1)
    slot = pw / k
    bw = min(40.0, 0.6 * slot)
    for i, s in enumerate(stats):
        cx = MARGIN_L + slot * (i + 0.5)
        x0, x1 = cx - bw / 2, cx + bw / 2
        yq1, yq3, ymed = ypx(s.q1), ypx(s.q3), ypx(s.median)
        out.append(f'<g class="box" data-hurst="{s.hurst:g}" data-n="{s.n}">')
        out.append(f'<line x1="{cx:.2f}" y1="{ypx(s.whisker_hi):.2f}" x2="{cx:.2f}" y2="{yq3:.2f}" stroke="black"/>')
        out.append(f'<line x1="{cx:.2f}" y1="{yq1:.2f}" x2="{cx:.2f}" y2="{ypx(s.whisker_lo):.2f}" stroke="black"/>')
        for yw in (ypx(s.whisker_hi), ypx(s.whisker_lo)):
            out.append(
                f'<line x1="{cx - bw / 4:.2f}" y1="{yw:.2f}" x2="{cx + bw / 4:.2f}" y2="{yw:.2f}" stroke="black"/>'
            )
        out.append(
            f'<rect x="{x0:.2f}" y="{yq3:.2f}" width="{bw:.2f}" height="{max(yq1 - yq3, 0.0):.2f}" '
            f'fill="#cfe0f3" stroke="black"/>'
        )
        out.append(f'<line x1="{x0:.2f}" y1="{ymed:.2f}" x2="{x1:.2f}" y2="{ymed:.2f}" stroke="black" stroke-width="2"/>')
        for v in s.outliers:
            out.append(f'<circle cx="{cx:.2f}" cy="{ypx(v):.2f}" r="2" fill="none" stroke="black"/>')
        out.append("</g>")
        label = f"n={s.n}" if len({t.hurst for t in stats}) == 1 else f"H={s.hurst:g} n={s.n}"
        out.append(f'<text x="{cx:.2f}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
