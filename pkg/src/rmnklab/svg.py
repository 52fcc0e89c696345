"""Plain static SVG charts (no scripts, fonts or external assets)."""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

import numpy as np

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
    "#e6550d", "#31a354", "#756bb1", "#636363",
)
MARKERS = ("circle", "square", "triangle")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _doc(width: int, height: int, body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>',
                      f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
                      *body, "</svg>", ""])


def _scale(lo: float, hi: float, a: float, b: float):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _marker(shape: str, x: float, y: float, color: str, r: float = 4.5) -> str:
    if shape == "square":
        return f'<rect x="{_fmt(x - r)}" y="{_fmt(y - r)}" width="{_fmt(2 * r)}" height="{_fmt(2 * r)}" fill="{color}"/>'
    if shape == "triangle":
        pts = f"{_fmt(x)},{_fmt(y - r)} {_fmt(x - r)},{_fmt(y + r)} {_fmt(x + r)},{_fmt(y + r)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{color}"/>'


def scatter(xy: np.ndarray, colors: Sequence[int], shapes: Sequence[int], title: str,
            color_names: Sequence[str], shape_names: Sequence[str]) -> str:
    """2D scatter; ``colors``/``shapes`` index into the palette and marker list."""
    W, H, L, R, T, B = 640, 480, 50, 150, 30, 40
    xy = np.asarray(xy, dtype=float)
    sx = _scale(xy[:, 0].min(), xy[:, 0].max(), L, W - R)
    sy = _scale(xy[:, 1].min(), xy[:, 1].max(), H - B, T)
    body = [f'<rect x="{L}" y="{T}" width="{W - L - R}" height="{H - T - B}" fill="none" stroke="#999"/>',
            f'<text x="{(L + W - R) / 2}" y="{H - 10}" text-anchor="middle">PC1</text>',
            f'<text x="14" y="{(T + H - B) / 2}" text-anchor="middle" transform="rotate(-90 14 {(T + H - B) / 2})">PC2</text>']
    for (x, y), c, s in zip(xy, colors, shapes):
        body.append(_marker(MARKERS[s % len(MARKERS)], sx(x), sy(y), PALETTE[c % len(PALETTE)]))
    ly = T + 10
    for i, name in enumerate(color_names):
        body.append(_marker("circle", W - R + 15, ly, PALETTE[i % len(PALETTE)]))
        body.append(f'<text x="{W - R + 25}" y="{ly + 4}">{escape(name)}</text>')
        ly += 15
    ly += 10
    for i, name in enumerate(shape_names):
        body.append(_marker(MARKERS[i % len(MARKERS)], W - R + 15, ly, "#444"))
        body.append(f'<text x="{W - R + 25}" y="{ly + 4}">{escape(name)}</text>')
        ly += 15
    return _doc(W, H, body, title)


def heatmap(counts: np.ndarray, row_labels: Sequence[str], col_labels: Sequence[str], title: str,
            values: np.ndarray | None = None) -> str:
    """Count heatmap; cells are annotated with the count and, if given, a value."""
    counts = np.asarray(counts)
    nr, nc = counts.shape
    cw, ch, L, T = 46, 26, 70, 40
    W, H = L + cw * nc + 20, T + ch * nr + 110
    top = max(int(counts.max()), 1)
    body = []
    for i in range(nr):
        body.append(f'<text x="{L - 6}" y="{T + ch * i + ch / 2 + 4}" text-anchor="end">{escape(row_labels[i])}</text>')
        for j in range(nc):
            c = int(counts[i, j])
            shade = int(255 - 200 * c / top)
            x, y = L + cw * j, T + ch * i
            body.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="rgb({shade},{shade},255)" stroke="white"/>')
            if c:
                label = str(c)
                if values is not None and not math.isnan(values[i, j]):
                    label += f" ({values[i, j]:.2f})"
                body.append(f'<text x="{x + cw / 2}" y="{y + ch / 2 + 4}" text-anchor="middle" font-size="8">{label}</text>')
    for j, name in enumerate(col_labels):
        x, y = L + cw * j + cw / 2, T + ch * nr + 8
        body.append(f'<text x="{x}" y="{y}" transform="rotate(60 {x} {y})" font-size="9">{escape(name)}</text>')
    return _doc(W, H, body, title)


def line_paths(series: dict[str, Sequence[float]], labels: Sequence[str], title: str) -> str:
    """Horizontal decision paths: one polyline per series over ordered steps (top to bottom)."""
    steps = len(labels) + 1
    W, L, R, T = 620, 150, 110, 40
    H = T + 20 * steps + 40
    vals = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    sx = _scale(vals.min(), vals.max(), L, W - R)
    sy = lambda i: H - 30 - 20 * i  # noqa: E731
    body = [f'<line x1="{L}" y1="{sy(0)}" x2="{W - R}" y2="{sy(0)}" stroke="#999"/>',
            f'<text x="{L}" y="{H - 10}">{vals.min():.3f}</text>',
            f'<text x="{W - R}" y="{H - 10}" text-anchor="end">{vals.max():.3f}</text>']
    for i, name in enumerate(labels):
        body.append(f'<text x="{L - 6}" y="{sy(i + 1) + 4}" text-anchor="end">{escape(name)}</text>')
    for c, (name, v) in enumerate(series.items()):
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(i))}" for i, x in enumerate(v))
        color = PALETTE[c % len(PALETTE)]
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_fmt(sx(v[-1]) + 6)}" y="{sy(steps - 1) + 4}" fill="{color}">{escape(name)}</text>')
    return _doc(W, H, body, title)


def bars(groups: dict[str, list[tuple[str, float]]], title: str) -> str:
    """Horizontal bar chart with one block of bars per group."""
    n_bars = sum(len(v) for v in groups.values())
    W, L, R, T, bh = 560, 170, 60, 40, 14
    H = T + bh * n_bars + 22 * len(groups) + 20
    top = max((v for items in groups.values() for _, v in items), default=1.0) or 1.0
    body, y = [], T
    for g, items in groups.items():
        body.append(f'<text x="8" y="{y + 12}" font-weight="bold">{escape(g)}</text>')
        y += 18
        for name, v in items:
            w = (W - L - R) * v / top
            body.append(f'<text x="{L - 6}" y="{y + bh - 3}" text-anchor="end">{escape(name)}</text>')
            body.append(f'<rect x="{L}" y="{y + 1}" width="{_fmt(w)}" height="{bh - 2}" fill="{PALETTE[0]}"/>')
            body.append(f'<text x="{_fmt(L + w + 4)}" y="{y + bh - 3}" font-size="9">{v:.4f}</text>')
            y += bh
        y += 4
    return _doc(W, H, body, title)
