"""Writers for run artifacts: CSV tables, minimal SVG line charts, OBJ meshes.

Numbers are written with ``repr`` so every file is a deterministic function of
the values and re-parses to the same floats.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np

PATH_COLUMNS = ["x", "y_pred", "y_oracle", "abs_err"]
SURFACE_COLUMNS = ["x", "y", "z_pred"]


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return repr(v) if math.isfinite(v) else ""


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and a float array; empty cells become NaN."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) if v != "" else np.nan for v in row] for row in r]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_path_csv(path, x, y_pred, y_oracle=None) -> None:
    if y_oracle is None:
        rows = ((xi, yi, None, None) for xi, yi in zip(x, y_pred))
    else:
        rows = ((xi, yi, oi, abs(yi - oi)) for xi, yi, oi in zip(x, y_pred, y_oracle))
    write_csv(path, PATH_COLUMNS, rows)


def write_history_csv(path, history) -> None:
    k = len(history.forces[0]) if len(history) else 0
    header = ["step", "action", "max_violation", "lr_path", "lr_force"] + [f"force_{i}" for i in range(k)]
    rows = (
        [s, a, v, lp, lf, *f]
        for s, a, v, lp, lf, f in zip(history.step, history.action, history.max_violation,
                                      history.lr_path, history.lr_force, history.forces)
    )
    write_csv(path, header, rows)


def write_residual_csv(path, report) -> None:
    pts = np.asarray(report.points)
    if pts.ndim == 1:
        write_csv(path, ["x", "residual"], zip(pts, report.residuals))
    else:
        write_csv(path, ["x", "y", "residual"], ((p[0], p[1], r) for p, r in zip(pts, report.residuals)))


# -- SVG --------------------------------------------------------------------

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]


def svg_line_chart(series: dict[str, tuple[np.ndarray, np.ndarray]], title: str = "",
                   xlabel: str = "", ylabel: str = "", logy: bool = False,
                   width: int = 640, height: int = 420) -> str:
    """Overlayed polylines with axes, tick labels and a legend."""
    left, right, top, bottom = 70, 20, 40, 50
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    if logy:
        ys = np.log10(np.clip(np.abs(ys), 1e-300, None))
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (xs[ok].min(), xs[ok].max()) if ok.any() else (0.0, 1.0)
    y0, y1 = (ys[ok].min(), ys[ok].max()) if ok.any() else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        ylab = f"1e{yv:.1f}" if logy else f"{yv:.3g}"
        out.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{ylab}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{ylabel}</text>')
    for i, (name, (x, y)) in enumerate(series.items()):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if logy:
            y = np.log10(np.clip(np.abs(y), 1e-300, None))
        good = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[good], y[good]))
        color = _COLORS[i % len(_COLORS)]
        dash = ' stroke-dasharray="6 4"' if i % 2 else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw - 120}" y1="{ly}" x2="{left + pw - 96}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + pw - 90}" y="{ly + 4}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> None:
    Path(path).write_text(svg)


# -- surfaces ---------------------------------------------------------------

def disk_clipped_grid(n: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vertex grid over [-1, 1]^2 (n x n nodes) and the mask of nodes inside the closed disk."""
    c = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(c, c, indexing="xy")
    return X, Y, np.hypot(X, Y) <= 1.0 + 1e-12


def write_obj(path, X, Y, Z, mask) -> None:
    """Triangulated mesh of the grid cells whose four corners are all inside ``mask``."""
    n_rows, n_cols = X.shape
    index = -np.ones(X.shape, dtype=int)
    lines = ["# actionnet surface mesh"]
    k = 0
    for i in range(n_rows):
        for j in range(n_cols):
            if mask[i, j]:
                k += 1
                index[i, j] = k
                lines.append(f"v {X[i, j]!r} {Y[i, j]!r} {float(Z[i, j])!r}")
    for i in range(n_rows - 1):
        for j in range(n_cols - 1):
            a, b, c, d = index[i, j], index[i, j + 1], index[i + 1, j + 1], index[i + 1, j]
            if min(a, b, c, d) > 0:
                lines.append(f"f {a} {b} {c}")
                lines.append(f"f {a} {c} {d}")
    Path(path).write_text("\n".join(lines) + "\n")
