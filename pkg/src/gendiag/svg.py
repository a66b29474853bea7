"""Minimal deterministic SVG traceplot: one polyline per chain."""

from __future__ import annotations

from typing import IO

import numpy as np

from .proximity import MappedChainSet

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf"]
WIDTH, HEIGHT = 800, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 120, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def svg_traceplot(mapped: MappedChainSet, title: str = "Generalized traceplot",
                  max_points: int = 2000) -> str:
    """Render mapped chains; long chains are thinned to ``max_points`` per line."""
    v = mapped.values
    k, n = v.shape
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    step = max(1, -(-n // max_points))
    idx = np.arange(0, n, step)

    def x(t):
        return LEFT + pw * (t / max(n - 1, 1))

    def y(val):
        return TOP + ph * (1 - (val - lo) / (hi - lo))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="15">{_escape(title)}</text>',
           f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
           f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
           f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">Iteration</text>',
           f'<text x="18" y="{TOP + ph / 2:.0f}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 18 {TOP + ph / 2:.0f})">Mapped value</text>']
    for frac in (0.0, 0.5, 1.0):
        val = lo + frac * (hi - lo)
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(y(val) + 4)}" text-anchor="end" font-size="11">{val:.4g}</text>')
        t = frac * (n - 1)
        out.append(f'<text x="{_fmt(x(t))}" y="{TOP + ph + 16}" text-anchor="middle" font-size="11">{int(t)}</text>')
    for r in range(k):
        color = PALETTE[r % len(PALETTE)]
        pts = " ".join(f"{_fmt(x(t))},{_fmt(y(v[r, t]))}" for t in idx)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="0.8" stroke-opacity="0.8" points="{pts}"/>')
        ly = TOP + 14 * r + 8
        out.append(f'<line x1="{LEFT + pw + 12}" y1="{ly}" x2="{LEFT + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 34}" y="{ly + 4}" font-size="11">chain {mapped.chain_ids[r]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(mapped: MappedChainSet, fh: IO[str], title: str = "Generalized traceplot") -> None:
    fh.write(svg_traceplot(mapped, title))
