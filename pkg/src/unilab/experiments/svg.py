"""Self-contained SVG plots drawn straight from CSV rows."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from unilab.experiments.spec import AXIS_NAMES
from unilab.experiments.table import REFERENCE, model_order, rows_for

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
MARKERS = ("circle", "square", "diamond", "triangle")

YLABEL = {
    "embed_sweep": "empirical success probability",
    "rsv_curve": "restricted minimum singular value",
    "lasso_curve": "normalized MSEP",
    "sketch_ls": "error ratio",
    "baiyin": "sigma_min / sqrt(d)",
    "nonuniversality_l1rsv": "l1 restricted minimum singular value",
    "nonuniversality_maxsv": "restricted maximum singular value",
    "functional_report": "excess width",
}

W, H = 640, 420
ML, MR, MT, MB = 70, 170, 30, 55


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10))
        v += step
    return out


def _num(v: float) -> str:
    return f"{v:g}"


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi, x0=ML, y0=MT, w=W - ML - MR, h=H - MT - MB):
        if xhi == xlo:
            xlo, xhi = xlo - 1, xhi + 1
        if yhi == ylo:
            ylo, yhi = ylo - 1, yhi + 1
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        self.x0, self.y0, self.w, self.h = x0, y0, w, h

    def px(self, x):
        return self.x0 + (x - self.xlo) / (self.xhi - self.xlo) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.ylo) / (self.yhi - self.ylo) * self.h

    def axes(self, xlabel, ylabel) -> list:
        out = [
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.w}" height="{self.h}" fill="none" stroke="#333"/>'
        ]
        for t in _ticks(self.xlo, self.xhi):
            X = self.px(t)
            out.append(f'<line x1="{X:.2f}" y1="{self.y0 + self.h}" x2="{X:.2f}" y2="{self.y0 + self.h + 5}" stroke="#333"/>')
            out.append(f'<text x="{X:.2f}" y="{self.y0 + self.h + 18}" text-anchor="middle">{_num(t)}</text>')
        for t in _ticks(self.ylo, self.yhi):
            Y = self.py(t)
            out.append(f'<line x1="{self.x0 - 5}" y1="{Y:.2f}" x2="{self.x0}" y2="{Y:.2f}" stroke="#333"/>')
            out.append(f'<text x="{self.x0 - 8}" y="{Y + 4:.2f}" text-anchor="end">{_num(t)}</text>')
        cx = self.x0 + self.w / 2
        out.append(f'<text x="{cx:.1f}" y="{self.y0 + self.h + 40}" text-anchor="middle">{escape(xlabel)}</text>')
        cy = self.y0 + self.h / 2
        out.append(
            f'<text x="{self.x0 - 50}" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 {self.x0 - 50} {cy:.1f})">{escape(ylabel)}</text>'
        )
        return out


def _marker(kind: str, x: float, y: float, color: str) -> str:
    if kind == "square":
        return f'<rect x="{x - 3.5:.2f}" y="{y - 3.5:.2f}" width="7" height="7" fill="{color}"/>'
    if kind == "diamond":
        return f'<polygon points="{x:.2f},{y - 4.5:.2f} {x + 4.5:.2f},{y:.2f} {x:.2f},{y + 4.5:.2f} {x - 4.5:.2f},{y:.2f}" fill="{color}"/>'
    if kind == "triangle":
        return f'<polygon points="{x:.2f},{y - 4.5:.2f} {x + 4.5:.2f},{y + 3.5:.2f} {x - 4.5:.2f},{y + 3.5:.2f}" fill="{color}"/>'
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="{color}"/>'


def _doc(body: list, width=W, height=H, title="") -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif" font-size="12">'
    )
    parts = [head, f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _finite(v) -> bool:
    return v is not None and isinstance(v, (int, float)) and math.isfinite(v)


def line_plot(kind: str, rows: list) -> str:
    models = model_order(rows)
    ref = rows_for(rows, REFERENCE)
    ref_curve = [(r.cell_x, r.mean) for r in ref if r.cell_x is not None and _finite(r.mean)]
    ref_vline = [r.mean for r in ref if r.cell_x is None and _finite(r.mean)]
    pts = [(r.cell_x, r.mean, r.std_error) for r in rows if r.model != REFERENCE and _finite(r.mean) and r.cell_x is not None]
    xs = [p[0] for p in pts] + [p[0] for p in ref_curve] + ref_vline
    ys = [p[1] - p[2] for p in pts] + [p[1] + p[2] for p in pts] + [p[1] for p in ref_curve]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    ylo, yhi = min(ys), max(ys)
    if kind == "embed_sweep":
        ylo, yhi = 0.0, 1.0
    pad = 0.05 * (yhi - ylo or 1.0)
    fr = _Frame(min(xs), max(xs), ylo - pad, yhi + pad)
    body = fr.axes(AXIS_NAMES[kind][0], YLABEL.get(kind, "value"))
    if len(ref_curve) > 1:
        path = " ".join(f"{fr.px(x):.2f},{fr.py(y):.2f}" for x, y in sorted(ref_curve))
        body.append(f'<polyline points="{path}" fill="none" stroke="#999" stroke-width="3"/>')
    elif len(ref_curve) == 1:
        x, y = ref_curve[0]
        body.append(f'<circle cx="{fr.px(x):.2f}" cy="{fr.py(y):.2f}" r="5" fill="none" stroke="#999" stroke-width="2"/>')
    for v in ref_vline:
        X = fr.px(v)
        body.append(f'<line x1="{X:.2f}" y1="{fr.y0}" x2="{X:.2f}" y2="{fr.y0 + fr.h}" stroke="#555" stroke-dasharray="6 4"/>')
    for i, name in enumerate(models):
        color = PALETTE[i % len(PALETTE)]
        mk = MARKERS[i % len(MARKERS)]
        mine = sorted((r.cell_x, r.mean, r.std_error) for r in rows_for(rows, name) if _finite(r.mean) and r.cell_x is not None)
        if len(mine) > 1:
            path = " ".join(f"{fr.px(x):.2f},{fr.py(y):.2f}" for x, y, _ in mine)
            body.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.2" opacity="0.7"/>')
        for x, y, se in mine:
            X = fr.px(x)
            if se > 0:
                body.append(f'<line x1="{X:.2f}" y1="{fr.py(y - se):.2f}" x2="{X:.2f}" y2="{fr.py(y + se):.2f}" stroke="{color}"/>')
            body.append(_marker(mk, X, fr.py(y), color))
        ly = MT + 12 + 20 * i
        body.append(_marker(mk, W - MR + 20, ly - 4, color))
        body.append(f'<text x="{W - MR + 30}" y="{ly}">{escape(name)}</text>')
    if ref:
        ly = MT + 12 + 20 * len(models)
        body.append(f'<line x1="{W - MR + 12}" y1="{ly - 4}" x2="{W - MR + 28}" y2="{ly - 4}" stroke="#999" stroke-width="3"/>')
        body.append(f'<text x="{W - MR + 30}" y="{ly}">reference</text>')
    title = rows[0].experiment if rows else kind
    return _doc(body, title=title)


def _heat_color(v: float) -> str:
    """Dark blue (0) through teal to yellow (1)."""
    stops = ((0.0, (20, 30, 90)), (0.5, (40, 150, 140)), (1.0, (250, 230, 60)))
    v = min(1.0, max(0.0, v))
    for (a, ca), (b, cb) in zip(stops, stops[1:]):
        if v <= b:
            t = (v - a) / (b - a)
            c = [round(ca[k] + t * (cb[k] - ca[k])) for k in range(3)]
            return "#%02x%02x%02x" % tuple(c)
    return "#%02x%02x%02x" % stops[-1][1]


def heatmap(kind: str, rows: list) -> str:
    models = model_order(rows)
    ref = sorted((r.cell_x, r.mean) for r in rows_for(rows, REFERENCE) if r.cell_x is not None and _finite(r.mean))
    cells = [r for r in rows if r.model != REFERENCE and r.cell_y is not None]
    xs = sorted({r.cell_x for r in cells}) or [0]
    ys = sorted({r.cell_y for r in cells}) or [0]
    dx = min((b - a for a, b in zip(xs, xs[1:])), default=1)
    dy = min((b - a for a, b in zip(ys, ys[1:])), default=1)
    pw, ph = 300, 300
    width = 90 + len(models) * (pw + 40) + 60
    height = ph + 110
    body = []
    xname, yname = AXIS_NAMES[kind]
    for i, name in enumerate(models):
        x0 = 70 + i * (pw + 40)
        fr = _Frame(xs[0] - dx / 2, xs[-1] + dx / 2, ys[0] - dy / 2, ys[-1] + dy / 2, x0=x0, y0=40, w=pw, h=ph)
        body.append(f'<rect x="{x0}" y="40" width="{pw}" height="{ph}" fill="#ddd"/>')
        for r in rows_for(rows, name):
            if r.cell_y is None or not _finite(r.mean):
                continue
            X0, X1 = fr.px(r.cell_x - dx / 2), fr.px(r.cell_x + dx / 2)
            Y0, Y1 = fr.py(r.cell_y + dy / 2), fr.py(r.cell_y - dy / 2)
            body.append(
                f'<rect x="{X0:.2f}" y="{Y0:.2f}" width="{X1 - X0 + 0.3:.2f}" height="{Y1 - Y0 + 0.3:.2f}" fill="{_heat_color(r.mean)}"/>'
            )
        if len(ref) > 1:
            path = " ".join(f"{fr.px(x):.2f},{fr.py(min(max(y, fr.ylo), fr.yhi)):.2f}" for x, y in ref)
            body.append(f'<polyline points="{path}" fill="none" stroke="white" stroke-width="2.5"/>')
        body.extend(fr.axes(xname, yname if i == 0 else ""))
        body.append(f'<text x="{x0 + pw / 2}" y="32" text-anchor="middle">{escape(name)}</text>')
    # colour bar
    bx = width - 45
    for k in range(50):
        v = 1.0 - k / 49
        body.append(f'<rect x="{bx}" y="{40 + k * ph / 50:.2f}" width="14" height="{ph / 50 + 0.5:.2f}" fill="{_heat_color(v)}"/>')
    body.append(f'<text x="{bx + 7}" y="36" text-anchor="middle">1</text>')
    body.append(f'<text x="{bx + 7}" y="{40 + ph + 14}" text-anchor="middle">0</text>')
    title = rows[0].experiment if rows else kind
    return _doc(body, width=width, height=height, title=title)


def functional_plot(rows: list) -> str:
    pts = sorted((r.cell_x, r.mean, r.std_error) for r in rows if r.model == "excess" and r.cell_x is not None)
    lines = [f"{r.model} = {r.mean:.4f} +/- {r.std_error:.4f}" for r in rows if r.model in ("sdim", "width")]
    if not pts:
        pts = [(0.0, 0.0, 0.0)]
    ys = [p[1] for p in pts] + [0.0]
    fr = _Frame(min(p[0] for p in pts), max(p[0] for p in pts), min(ys) - 0.5, max(ys) + 0.5)
    body = fr.axes("m", YLABEL["functional_report"])
    body.append(f'<line x1="{fr.x0}" y1="{fr.py(0):.2f}" x2="{fr.x0 + fr.w}" y2="{fr.py(0):.2f}" stroke="#999" stroke-dasharray="4 3"/>')
    path = " ".join(f"{fr.px(x):.2f},{fr.py(y):.2f}" for x, y, _ in pts)
    body.append(f'<polyline points="{path}" fill="none" stroke="{PALETTE[0]}"/>')
    for x, y, _ in pts:
        body.append(_marker("circle", fr.px(x), fr.py(y), PALETTE[0]))
    for i, t in enumerate(lines):
        body.append(f'<text x="{W - MR + 10}" y="{MT + 14 + 18 * i}">{escape(t)}</text>')
    title = rows[0].experiment if rows else "functional_report"
    return _doc(body, title=title)


def render(kind: str, rows: list, params: dict | None = None) -> str:
    if kind in ("l1_heatmap", "decode_heatmap"):
        return heatmap(kind, rows)
    if kind == "functional_report":
        return functional_plot(rows)
    return line_plot(kind, rows)
