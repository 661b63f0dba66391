"""Radial SVG drawings: layer n on a circle of radius proportional to n,
vertices spread by their position within the layer.  Output is pure
shapes (no text), so files are byte-stable."""

from __future__ import annotations

import math

import numpy as np

from .lattice import HyperbolicLattice

COLORS = {"black": "#111111", "blue": "#2a6fdb"}


def radial_positions(lat: HyperbolicLattice, max_layer: int, size: float = 800.0) -> dict[int, tuple]:
    layer = lat.layer
    n_keep = int(np.searchsorted(layer, max_layer, side="right"))
    half = size / 2
    step = (half - 20) / max(max_layer, 1)
    pos = {}
    start = 0
    for n in range(max_layer + 1):
        stop = int(np.searchsorted(layer[:n_keep], n, side="right"))
        cnt = stop - start
        r = step * n if n else step * 0.35
        for k in range(cnt):
            a = 2 * math.pi * (k + 0.5) / cnt
            pos[start + k] = (half + r * math.cos(a), half + r * math.sin(a))
        start = stop
    return pos


def _heat(x: float) -> str:
    # -1 blue, 0 white, +1 red
    x = max(-1.0, min(1.0, float(x)))
    if x >= 0:
        g = int(round(255 * (1 - x)))
        return f"#ff{g:02x}{g:02x}"
    g = int(round(255 * (1 + x)))
    return f"#{g:02x}{g:02x}ff"


def render_svg(lat: HyperbolicLattice, max_layer: int | None = None, size: float = 800.0,
               crossed_edges=(), dual_path=(), values: dict | None = None,
               only=None) -> str:
    """Lattice up to ``max_layer``; optional dashed crossed edges, dual path
    through face centroids, and per-vertex values in [-1, 1] as fills.
    ``only`` restricts the drawing to a vertex subset."""
    if max_layer is None:
        max_layer = lat.n_layers
    max_layer = min(max_layer, lat.n_layers)
    pos = radial_positions(lat, max_layer, size)
    if only is not None:
        only = set(only)
        pos = {v: xy for v, xy in pos.items() if v in only}
    crossed = {tuple(sorted(e)) for e in crossed_edges}
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="#ffffff"/>',
        '<g stroke="#999999" stroke-width="0.6">',
    ]
    dashed = []
    for u, v in lat.edges().tolist():
        if u in pos and v in pos:
            (x1, y1), (x2, y2) = pos[u], pos[v]
            line = f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"/>'
            if (u, v) in crossed:
                dashed.append(line)
            else:
                out.append(line)
    out.append("</g>")
    if dashed:
        out.append('<g stroke="#d62728" stroke-width="1.6" stroke-dasharray="4 3">')
        out.extend(dashed)
        out.append("</g>")
    # the path runs deep -> origin -> deep; draw each fully visible stretch
    runs, pts = [], []
    for f in dual_path:
        vs = [v for v in lat.face(f) if v in pos]
        if len(vs) < lat.p:
            if pts:
                runs.append(pts)
            pts = []
            continue
        x = sum(pos[v][0] for v in vs) / len(vs)
        y = sum(pos[v][1] for v in vs) / len(vs)
        pts.append(f"{x:.2f},{y:.2f}")
    if pts:
        runs.append(pts)
    for pts in runs:
        if len(pts) > 1:
            out.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                       f'stroke="#2ca02c" stroke-width="1.8"/>')
    out.append("<g>")
    rad = max(1.0, min(4.0, 2000.0 / max(len(pos), 1)))
    for v in sorted(pos):
        x, y = pos[v]
        if values is not None and v in values:
            fill = _heat(values[v])
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{rad + 1:.2f}" fill="{fill}" '
                       f'stroke="#333333" stroke-width="0.3"/>')
        else:
            fill = COLORS[lat.kind(v)]
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{rad:.2f}" fill="{fill}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
