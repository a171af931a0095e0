"""Heat-map SVGs of sweep records over the (K, C) plane.

The output depends only on the records: a fixed 800x600 viewBox, a fixed
64-step palette interpolated between five anchor colours, fixed number
formatting and no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import NonRectangularGrid

WIDTH, HEIGHT = 800, 600
PLOT_X0, PLOT_Y0, PLOT_W, PLOT_H = 80.0, 50.0, 600.0, 470.0
BAR_X, BAR_W = 710.0, 24.0
N_COLORS = 64
NAN_COLOR = "#bfbfbf"
_ANCHORS = ((0x44, 0x01, 0x54), (0x3b, 0x52, 0x8b), (0x21, 0x91, 0x8c),
            (0x5e, 0xc9, 0x62), (0xfd, 0xe7, 0x25))


def _build_palette() -> tuple[str, ...]:
    anchors = np.array(_ANCHORS, dtype=float)
    pos = np.linspace(0.0, 1.0, len(anchors))
    t = np.linspace(0.0, 1.0, N_COLORS)
    rgb = np.stack([np.interp(t, pos, anchors[:, k]) for k in range(3)], axis=1)
    return tuple("#%02x%02x%02x" % tuple(int(round(c)) for c in row) for row in rgb)


PALETTE = _build_palette()


def _quantity(rec, quantity: str) -> float:
    if quantity == "validity":
        return 1.0 if rec.mf_valid else 0.0
    if quantity not in ("bound", "mutual_info", "s", "ln_z", "ln_z_mf"):
        raise ValueError(f"cannot plot {quantity!r}")
    return float(getattr(rec, quantity))


def grid_axes(records) -> tuple[list[float], list[float], dict]:
    """Sorted K and C axes plus a (K, C) -> record map; rejects ragged grids."""
    cells = {}
    for r in records:
        key = (r.K, r.C)
        if key in cells:
            raise NonRectangularGrid(f"duplicate grid point {key}")
        cells[key] = r
    ks = sorted({k for k, _ in cells})
    cs = sorted({c for _, c in cells})
    if not cells or len(cells) != len(ks) * len(cs):
        raise NonRectangularGrid(
            f"{len(cells)} points do not fill a {len(ks)} x {len(cs)} grid"
        )
    return ks, cs, cells


def color_index(v: float, vmin: float, vmax: float) -> int:
    if vmax <= vmin:
        return 0
    i = int(math.floor((v - vmin) / (vmax - vmin) * N_COLORS))
    return min(max(i, 0), N_COLORS - 1)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_svg(records, quantity: str) -> str:
    ks, cs, cells = grid_axes(records)
    values = {key: _quantity(r, quantity) for key, r in cells.items()}
    finite = [v for v in values.values() if math.isfinite(v)]
    if quantity == "validity":
        vmin, vmax = 0.0, 1.0
    elif finite:
        vmin, vmax = min(finite), max(finite)
    else:
        vmin = vmax = 0.0
    cw, ch = PLOT_W / len(ks), PLOT_H / len(cs)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="30" text-anchor="middle" font-family="sans-serif" '
        f'font-size="18">{escape(quantity)}</text>',
        '<g shape-rendering="crispEdges">',
    ]
    for i, K in enumerate(ks):
        for j, C in enumerate(cs):
            v = values[(K, C)]
            fill = PALETTE[color_index(v, vmin, vmax)] if math.isfinite(v) else NAN_COLOR
            x = PLOT_X0 + i * cw
            y = PLOT_Y0 + PLOT_H - (j + 1) * ch  # C increases upwards
            out.append(f'<rect class="cell" x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw)}" '
                       f'height="{_fmt(ch)}" fill="{fill}"/>')
    bar_h = PLOT_H / N_COLORS
    for k, color in enumerate(PALETTE):
        y = PLOT_Y0 + PLOT_H - (k + 1) * bar_h
        out.append(f'<rect x="{_fmt(BAR_X)}" y="{_fmt(y)}" width="{_fmt(BAR_W)}" '
                   f'height="{_fmt(bar_h)}" fill="{color}"/>')
    out.append("</g>")

    def text(x, y, s, anchor="middle"):
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
                   f'font-family="sans-serif" font-size="13">{escape(s)}</text>')

    bottom = PLOT_Y0 + PLOT_H
    text(PLOT_X0 + PLOT_W / 2, bottom + 40, "K")
    text(PLOT_X0 - 45, PLOT_Y0 + PLOT_H / 2, "C")
    text(PLOT_X0, bottom + 18, f"{ks[0]:g}")
    text(PLOT_X0 + PLOT_W, bottom + 18, f"{ks[-1]:g}")
    text(PLOT_X0 - 8, bottom, f"{cs[0]:g}", anchor="end")
    text(PLOT_X0 - 8, PLOT_Y0 + 10, f"{cs[-1]:g}", anchor="end")
    text(BAR_X + BAR_W / 2, bottom + 18, f"{vmin:.4g}")
    text(BAR_X + BAR_W / 2, PLOT_Y0 - 8, f"{vmax:.4g}")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(records, quantity: str, path: str | Path) -> Path:
    path = Path(path)
    svg = render_svg(list(records), quantity)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return path
