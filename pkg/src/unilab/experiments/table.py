"""CSV output: one row per (cell, model), floats at 17 significant digits."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

HEADER = ("experiment", "cell_x", "cell_y", "model", "trials", "failed", "successes", "mean", "std_error", "seed")
REFERENCE = "reference"


@dataclass(frozen=True)
class Row:
    experiment: str
    cell_x: int | float | None
    cell_y: int | float | None
    model: str
    trials: int
    failed: int
    successes: int
    mean: float
    std_error: float
    seed: int

    @property
    def completed(self) -> int:
        return self.trials - self.failed


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int) or (isinstance(v, float) and v.is_integer() and abs(v) < 2**53):
        return str(int(v))
    return fmt_float(v)


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def format_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(
            [
                r.experiment,
                _fmt_cell(r.cell_x),
                _fmt_cell(r.cell_y),
                r.model,
                r.trials,
                r.failed,
                r.successes,
                fmt_float(r.mean),
                fmt_float(r.std_error),
                r.seed,
            ]
        )
    return buf.getvalue()


def write_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_rows(rows))


def parse_rows(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for rec in reader:
        if not rec:
            continue
        out.append(
            Row(
                rec[0],
                _parse_cell(rec[1]),
                _parse_cell(rec[2]),
                rec[3],
                int(rec[4]),
                int(rec[5]),
                int(rec[6]),
                float(rec[7]),
                float(rec[8]),
                int(rec[9]),
            )
        )
    return out


def read_csv(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_rows(fh.read())


def rows_for(rows, model: str) -> list:
    return [r for r in rows if r.model == model]


def model_order(rows) -> list:
    seen = []
    for r in rows:
        if r.model != REFERENCE and r.model not in seen:
            seen.append(r.model)
    return seen


def contour(rows, model: str, smallest: bool = True, level: float = 0.5, bound=None) -> dict:
    """Per cell_x, the smallest (or largest) cell_y whose rate reaches ``level``.

    The entry is None when no tested y qualifies, or when the qualifying
    extreme is the edge of the tested window (the crossing may lie outside it)
    unless that edge equals ``bound``.
    """
    cols: dict = {}
    for r in rows_for(rows, model):
        if r.cell_y is None or math.isnan(r.mean):
            continue
        cols.setdefault(r.cell_x, []).append((r.cell_y, r.mean))
    out = {}
    for x, pts in sorted(cols.items()):
        pts.sort()
        ok = [y for y, v in pts if v >= level]
        if not ok:
            out[x] = None
            continue
        y = min(ok) if smallest else max(ok)
        edge = pts[0][0] if smallest else pts[-1][0]
        out[x] = None if (y == edge and edge != bound) else y
    return out
