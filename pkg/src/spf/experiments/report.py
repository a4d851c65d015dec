"""CSV persistence of trial records and SVG phase-diagram heatmaps.

CSV layout: UTF-8, RFC 4180 (comma separator, CRLF line ends, minimal
quoting), one header line naming every :class:`TrialRecord` field in
declaration order. Floats use Python's shortest round-trip repr with ``.``
as decimal separator, booleans are ``true``/``false``, a missing
``delta_hat`` is the empty string. ``wall_ms`` is the only
non-deterministic column; pass ``include_timing=False`` to drop it.
"""
import csv
import math
from xml.sax.saxutils import escape

import numpy as np

from .harness import RECORD_FIELDS, TrialRecord

__all__ = ["CSV_HEADER", "write_csv", "read_csv", "render_heatmap", "heatmap_svg"]

CSV_HEADER = RECORD_FIELDS
_INT_FIELDS = {"m", "n1", "n2", "s1", "s2", "k", "trial", "seed", "iterations"}
_BOOL_FIELDS = {"converged", "success"}
_STR_FIELDS = {"status"}


def _format(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse(name, text):
    if name in _INT_FIELDS:
        return int(text)
    if name in _BOOL_FIELDS:
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r} in column {name}")
        return text == "true"
    if name in _STR_FIELDS:
        return text
    if text == "":
        return None
    return float(text)


def write_csv(records, path, include_timing=True):
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    header = [h for h in CSV_HEADER if include_timing or h != "wall_ms"]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(header)
            for rec in records:
                writer.writerow([_format(getattr(rec, h)) for h in header])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path):
    """Parse a file written by :func:`write_csv` back into records."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        unknown = set(header) - set(CSV_HEADER)
        if unknown:
            raise ValueError(f"{path}: unknown columns {sorted(unknown)}")
        out = []
        for row in reader:
            values = {h: _parse(h, t) for h, t in zip(header, row)}
            values.setdefault("wall_ms", math.nan)
            out.append(TrialRecord(**values))
    return out


def _rate_table(records, x, y):
    for axis in (x, y):
        if axis not in CSV_HEADER:
            raise ValueError(f"unknown axis {axis!r}")
    groups = {}
    for rec in records:
        groups.setdefault((getattr(rec, x), getattr(rec, y)), []).append(rec.success)
    xs = sorted({k[0] for k in groups})
    ys = sorted({k[1] for k in groups})
    rates = {key: sum(v) / len(v) for key, v in groups.items()}
    return xs, ys, rates


def _gray(rate):
    level = int(round(255 * rate))
    return f"rgb({level},{level},{level})"


def _label(value):
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def heatmap_svg(records, x, y, title=None, cell_w=64, cell_h=36):
    """SVG text of the per-cell success rate over axes ``x`` and ``y``.

    Rate 0 is black and rate 1 is white; each cell is annotated with its rate
    to two decimals. Cells without any record are left out.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to plot")
    xs, ys, rates = _rate_table(records, x, y)
    left, top, legend_w = 70, 40, 90
    width = left + cell_w * len(xs) + legend_w
    height = top + cell_h * len(ys) + 50
    title = title or f"success rate over {x} and {y}"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="20" font-size="13">{escape(title)}</text>',
    ]
    # y grows upward: largest y value on the top row
    for row, yv in enumerate(reversed(ys)):
        cy = top + row * cell_h
        out.append(f'<text x="{left - 6}" y="{cy + cell_h / 2 + 4}" text-anchor="end">'
                   f'{escape(_label(yv))}</text>')
        for col, xv in enumerate(xs):
            if (xv, yv) not in rates:
                continue
            rate = rates[(xv, yv)]
            cx = left + col * cell_w
            ink = "black" if rate >= 0.5 else "white"
            out.append(
                f'<rect class="cell" x="{cx}" y="{cy}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_gray(rate)}" stroke="#888" data-x="{escape(_label(xv))}" '
                f'data-y="{escape(_label(yv))}" data-rate="{rate:.2f}"/>'
            )
            out.append(f'<text x="{cx + cell_w / 2}" y="{cy + cell_h / 2 + 4}" '
                       f'text-anchor="middle" fill="{ink}">{rate:.2f}</text>')
    base = top + cell_h * len(ys)
    for col, xv in enumerate(xs):
        out.append(f'<text x="{left + col * cell_w + cell_w / 2}" y="{base + 16}" '
                   f'text-anchor="middle">{escape(_label(xv))}</text>')
    out.append(f'<text x="{left + cell_w * len(xs) / 2}" y="{base + 36}" '
               f'text-anchor="middle">{escape(x)}</text>')
    out.append(f'<text x="14" y="{top + cell_h * len(ys) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + cell_h * len(ys) / 2})">{escape(y)}</text>')
    # grayscale legend, 1.0 on top
    lx = left + cell_w * len(xs) + 20
    steps = 11
    step_h = max(cell_h * len(ys) / steps, 8)
    for i in range(steps):
        rate = 1 - i / (steps - 1)
        ly = top + i * step_h
        out.append(f'<rect class="legend" x="{lx}" y="{ly}" width="16" height="{step_h}" '
                   f'fill="{_gray(rate)}" stroke="#888"/>')
        if i % 5 == 0:
            out.append(f'<text x="{lx + 22}" y="{ly + step_h / 2 + 4}">{rate:.1f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_heatmap(records, x, y, path, title=None):
    svg = heatmap_svg(records, x, y, title=title)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
    except OSError as exc:
        raise OSError(f"cannot write heatmap to {path}: {exc.strerror or exc}") from exc
