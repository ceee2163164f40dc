"""CSV tables and dependency-free SVG heatmaps."""

from __future__ import annotations

import csv
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_matrix_csv(path, matrix, row_labels: Sequence[str], col_labels: Sequence[str]) -> None:
    """Matrix with a label column and a header row of column labels."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.shape != (len(row_labels), len(col_labels)):
        raise ValueError(f"matrix shape {m.shape} does not match labels ({len(row_labels)}, {len(col_labels)})")
    write_csv(path, ["", *col_labels], ([lab, *map(repr, row)] for lab, row in zip(row_labels, m.tolist())))


def _color(t: float) -> str:
    # white -> dark blue
    r = round(255 - 225 * t)
    g = round(255 - 175 * t)
    b = round(255 - 75 * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(matrix, row_labels: Sequence[str], col_labels: Sequence[str], title: str = "",
                cell: int = 18, label_width: int = 90) -> str:
    """Render a matrix as a standalone SVG string, min-max scaled per matrix."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    n_rows, n_cols = m.shape
    lo, hi = float(np.min(m)), float(np.max(m))
    span = hi - lo if hi > lo else 1.0
    top = label_width + (20 if title else 0)
    width = label_width + n_cols * cell + 10
    height = top + n_rows * cell + 10
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="monospace" font-size="10">']
    if title:
        out.append(f'<text x="4" y="14" font-size="12">{escape(title)}</text>')
    for j, lab in enumerate(col_labels):
        x = label_width + j * cell + cell // 2 + 3
        out.append(f'<text transform="translate({x},{top - 4}) rotate(-90)">{escape(str(lab))}</text>')
    for i, lab in enumerate(row_labels):
        y = top + i * cell
        out.append(f'<text x="{label_width - 4}" y="{y + cell - 5}" text-anchor="end">{escape(str(lab))}</text>')
        for j in range(n_cols):
            v = m[i, j]
            out.append(f'<rect x="{label_width + j * cell}" y="{y}" width="{cell}" height="{cell}" '
                       f'fill="{_color((v - lo) / span)}"><title>{v:.4g}</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_heatmap(path, matrix, row_labels, col_labels, title: str = "") -> None:
    Path(path).write_text(heatmap_svg(matrix, row_labels, col_labels, title), encoding="utf-8")
