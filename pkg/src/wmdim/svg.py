"""Minimal self-contained SVG line charts on log-log axes."""

from __future__ import annotations

import math
from typing import Sequence


def loglog_svg(series: dict[str, Sequence[tuple[float, float]]], title: str = "", xlabel: str = "",
               ylabel: str = "", width: int = 480, height: int = 360) -> str:
    """Render each named series of positive ``(x, y)`` pairs as a polyline."""
    pts = [(x, y) for s in series.values() for x, y in s if x > 0 and y > 0]
    pad = 50
    if not pts:
        lx0 = ly0 = 0.0
        lx1 = ly1 = 1.0
    else:
        lx = [math.log10(x) for x, _ in pts]
        ly = [math.log10(y) for _, y in pts]
        lx0, lx1, ly0, ly1 = min(lx), max(lx), min(ly), max(ly)
        if lx1 == lx0:
            lx0, lx1 = lx0 - 0.5, lx1 + 0.5
        if ly1 == ly0:
            ly0, ly1 = ly0 - 0.5, ly1 + 0.5

    def sx(x):
        return pad + (math.log10(x) - lx0) / (lx1 - lx0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (math.log10(y) - ly0) / (ly1 - ly0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {height / 2:.1f})">{ylabel}</text>']
    for e in range(math.floor(lx0), math.ceil(lx1) + 1):
        if lx0 <= e <= lx1:
            x = sx(10 ** e)
            out.append(f'<text x="{x:.1f}" y="{height - pad + 15}" text-anchor="middle" font-size="10">1e{e}</text>')
    for e in range(math.floor(ly0), math.ceil(ly1) + 1):
        if ly0 <= e <= ly1:
            y = sy(10 ** e)
            out.append(f'<text x="{pad - 5}" y="{y:.1f}" text-anchor="end" font-size="10">1e{e}</text>')
    for i, (name, s) in enumerate(series.items()):
        good = [(x, y) for x, y in s if x > 0 and y > 0]
        c = colors[i % len(colors)]
        if good:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in good)
            out.append(f'<polyline fill="none" stroke="{c}" stroke-width="2" points="{path}"/>')
            for x, y in good:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{c}"/>')
        out.append(f'<text x="{width - pad}" y="{pad + 14 * i}" text-anchor="end" font-size="11" fill="{c}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
