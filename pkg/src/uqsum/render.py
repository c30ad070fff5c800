"""Report emitters: CSV and Markdown tables, JSON sidecars, SVG heatmaps.

Human-readable tables round to 4 decimals; the JSON sidecar keeps full
precision. All writes are atomic (write-temp-then-rename) so reruns either
replace a file completely or not at all.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from uqsum.analysis import PrrTable

CELL_DECIMALS = 4
NULL_TEXT = "null"
COL_MEAN_LABEL = "Col Mean"
ROW_MEAN_LABEL = "Row Mean"


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _cell(value: float) -> str:
    if math.isnan(value):
        return NULL_TEXT
    return f"{value:.{CELL_DECIMALS}f}"


def table_to_csv(table: PrrTable) -> str:
    header = [""] + list(table.col_names)
    if table.row_means is not None:
        header.append(ROW_MEAN_LABEL)
    lines = [",".join(header)]
    for i, row_name in enumerate(table.row_names):
        cells = [row_name] + [_cell(v) for v in table.values[i]]
        if table.row_means is not None:
            cells.append(_cell(table.row_means[i]))
        lines.append(",".join(cells))
    mean_row = [COL_MEAN_LABEL] + [_cell(v) for v in table.col_means]
    if table.row_means is not None:
        mean_row.append("")
    lines.append(",".join(mean_row))
    return "\n".join(lines) + "\n"


def table_to_markdown(table: PrrTable) -> str:
    header = [""] + list(table.col_names)
    if table.row_means is not None:
        header.append(ROW_MEAN_LABEL)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for i, row_name in enumerate(table.row_names):
        cells = [row_name] + [_cell(v) for v in table.values[i]]
        if table.row_means is not None:
            cells.append(_cell(table.row_means[i]))
        lines.append("| " + " | ".join(cells) + " |")
    mean_row = [COL_MEAN_LABEL] + [_cell(v) for v in table.col_means]
    if table.row_means is not None:
        mean_row.append("")
    lines.append("| " + " | ".join(mean_row) + " |")
    return "\n".join(lines) + "\n"


def table_to_json(table: PrrTable) -> str:
    payload = {
        "row_names": list(table.row_names),
        "col_names": list(table.col_names),
        "values": [[None if math.isnan(v) else v for v in row] for row in table.values.tolist()],
        "col_means": table.col_means.tolist(),
        "row_means": table.row_means.tolist() if table.row_means is not None else None,
    }
    return json.dumps(payload, indent=2) + "\n"


def load_table_json(path) -> PrrTable:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    values = np.array(
        [[math.nan if v is None else v for v in row] for row in payload["values"]], dtype=float
    )
    return PrrTable(
        row_names=payload["row_names"],
        col_names=payload["col_names"],
        values=values,
        col_means=np.asarray(payload["col_means"], dtype=float),
        row_means=(
            np.asarray(payload["row_means"], dtype=float)
            if payload.get("row_means") is not None
            else None
        ),
    )


def matrix_to_csv(names, matrix: np.ndarray) -> str:
    lines = [",".join([""] + list(names))]
    for name, row in zip(names, matrix):
        lines.append(",".join([name] + [_cell(v) for v in row]))
    return "\n".join(lines) + "\n"


def matrix_to_json(names, matrix: np.ndarray) -> str:
    payload = {
        "names": list(names),
        "values": [[None if math.isnan(v) else v for v in row] for row in matrix.tolist()],
    }
    return json.dumps(payload, indent=2) + "\n"


def _diverging_color(value: float) -> str:
    # Blue (-1) through near-white (0) to red (+1), clipped.
    v = min(max(value, -1.0), 1.0)
    blue = (33, 102, 172)
    white = (247, 247, 247)
    red = (178, 24, 43)
    if v < 0:
        t = v + 1.0
        rgb = tuple(round(b + (w - b) * t) for b, w in zip(blue, white))
    else:
        rgb = tuple(round(w + (r - w) * v) for w, r in zip(white, red))
    return "#%02x%02x%02x" % rgb


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def heatmap_svg(row_names, col_names, matrix: np.ndarray, title: str = "") -> str:
    """Annotated heatmap with a diverging scale fixed to [-1, 1].

    Undefined (NaN) cells are hatched instead of colored, so missing structure
    never masquerades as zero correlation.
    """
    cell = 46
    left = 14 + 7 * max((len(n) for n in row_names), default=1)
    top = 40 + 7 * max((len(n) for n in col_names), default=1)
    width = left + cell * len(col_names) + 20
    height = top + cell * len(row_names) + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
        "<defs>",
        '<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)">'
        '<rect width="6" height="6" fill="#eeeeee"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#999999" stroke-width="2"/>'
        "</pattern>",
        "</defs>",
    ]
    if title:
        parts.append(f'<text x="{left}" y="16" font-size="13">{_escape(title)}</text>')
    for j, name in enumerate(col_names):
        x = left + j * cell + cell // 2
        parts.append(
            f'<text x="{x}" y="{top - 8}" text-anchor="start" '
            f'transform="rotate(-60 {x} {top - 8})">{_escape(name)}</text>'
        )
    for i, name in enumerate(row_names):
        y = top + i * cell + cell // 2 + 4
        parts.append(f'<text x="{left - 8}" y="{y}" text-anchor="end">{_escape(name)}</text>')
    for i in range(len(row_names)):
        for j in range(len(col_names)):
            x = left + j * cell
            y = top + i * cell
            value = matrix[i, j]
            if math.isnan(value):
                fill = "url(#hatch)"
                label = ""
            else:
                fill = _diverging_color(value)
                label = f"{value:.2f}"
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" '
                'stroke="#ffffff" stroke-width="1"/>'
            )
            if label:
                text_color = "#000000" if abs(value) < 0.6 else "#ffffff"
                parts.append(
                    f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" text-anchor="middle" '
                    f'fill="{text_color}">{label}</text>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
