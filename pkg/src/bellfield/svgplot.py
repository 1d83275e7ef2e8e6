"""Minimal SVG 1.1 rendering: line charts and heatmaps with contour lines.

Everything here returns strings; writing files is left to the caller.
"""

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
DASHES = {"solid": None, "dashed": "6,4", "dotted": "2,3"}
# a few viridis anchors, interpolated linearly
_CMAP = [(0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)),
         (0.75, (94, 201, 98)), (1.0, (253, 231, 37))]


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def colormap(t):
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_CMAP, _CMAP[1:]):
        if t <= t1:
            u = (t - t0) / (t1 - t0)
            r, g, b = (round(a + (b_ - a) * u) for a, b_ in zip(c0, c1))
            return f"#{r:02x}{g:02x}{b:02x}"
    return "#fde725"


def tick_label(v):
    if v == 0:
        return "0"
    e = math.log10(abs(v))
    if abs(e - round(e)) < 1e-9 and abs(e) >= 3:
        return f"1e{int(round(e))}"
    return f"{v:.4g}"


def nice_ticks(lo, hi, log, target=6):
    if log:
        a, b = math.floor(math.log10(lo) + 1e-12), math.ceil(math.log10(hi) - 1e-12)
        step = max(1, math.ceil((b - a) / target))
        return [10.0 ** k for k in range(a, b + 1, step) if lo * (1 - 1e-9) <= 10.0 ** k <= hi * (1 + 1e-9)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


@dataclass
class Axis:
    lo: float
    hi: float
    log: bool = False
    label: str = ""

    def __post_init__(self):
        if self.log and not (self.lo > 0 and self.hi > 0):
            raise ValueError("log axis needs positive limits")
        if self.hi == self.lo:
            pad = abs(self.lo) * 0.05 or 1.0
            self.lo, self.hi = self.lo - pad, self.hi + pad

    def frac(self, v):
        if self.log:
            return (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        return (v - self.lo) / (self.hi - self.lo)


def axis_for(values, log=False, label="", pad=0.0):
    vals = [v for v in values if v is not None and math.isfinite(v) and (v > 0 or not log)]
    if not vals:
        return Axis(1.0, 10.0, log, label) if log else Axis(0.0, 1.0, log, label)
    lo, hi = min(vals), max(vals)
    if pad and not log:
        span = hi - lo or abs(hi) or 1.0
        lo, hi = lo - pad * span, hi + pad * span
    return Axis(lo, hi, log, label)


@dataclass
class Series:
    x: list
    y: list
    label: str = ""
    style: str = "solid"
    color: str = None


@dataclass
class Panel:
    x: Axis
    y: Axis
    series: list = field(default_factory=list)
    title: str = ""


class _Frame:
    def __init__(self, left, top, width, height):
        self.left, self.top, self.width, self.height = left, top, width, height

    def px(self, axis, v):
        return self.left + axis.frac(v) * self.width

    def py(self, axis, v):
        return self.top + (1 - axis.frac(v)) * self.height


def _axes_svg(fr, xa, ya, title):
    out = [f'<rect x="{_fmt(fr.left)}" y="{_fmt(fr.top)}" width="{_fmt(fr.width)}" height="{_fmt(fr.height)}" '
           f'fill="none" stroke="black"/>']
    bottom = fr.top + fr.height
    for t in nice_ticks(xa.lo, xa.hi, xa.log):
        x = fr.px(xa, t)
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(bottom)}" x2="{_fmt(x)}" y2="{_fmt(bottom + 5)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(bottom + 18)}" font-size="11" text-anchor="middle">'
                   f'{tick_label(t)}</text>')
    for t in nice_ticks(ya.lo, ya.hi, ya.log):
        y = fr.py(ya, t)
        out.append(f'<line x1="{_fmt(fr.left - 5)}" y1="{_fmt(y)}" x2="{_fmt(fr.left)}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(fr.left - 8)}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end">'
                   f'{tick_label(t)}</text>')
    out.append(f'<text x="{_fmt(fr.left + fr.width / 2)}" y="{_fmt(bottom + 36)}" font-size="13" '
               f'text-anchor="middle">{escape(xa.label)}</text>')
    yc = fr.top + fr.height / 2
    out.append(f'<text x="{_fmt(fr.left - 48)}" y="{_fmt(yc)}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 {_fmt(fr.left - 48)} {_fmt(yc)})">{escape(ya.label)}</text>')
    if title:
        out.append(f'<text x="{_fmt(fr.left + fr.width / 2)}" y="{_fmt(fr.top - 10)}" font-size="13" '
                   f'text-anchor="middle">{escape(title)}</text>')
    return out


def _series_svg(fr, p: Panel):
    out = []
    for i, s in enumerate(p.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        # break the polyline at missing points
        runs, cur = [], []
        for x, y in zip(s.x, s.y):
            ok = (x is not None and y is not None and math.isfinite(x) and math.isfinite(y)
                  and (x > 0 or not p.x.log) and (y > 0 or not p.y.log))
            if ok:
                cur.append(f"{_fmt(fr.px(p.x, x))},{_fmt(fr.py(p.y, y))}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        dash = DASHES.get(s.style)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        for run in runs:
            out.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="{color}" stroke-width="1.8"{extra}/>')
        if s.label:
            ly = fr.top + 16 + 16 * i
            lx = fr.left + fr.width - 150
            out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" x2="{_fmt(lx + 24)}" y2="{_fmt(ly - 4)}" '
                       f'stroke="{color}" stroke-width="1.8"{extra}/>')
            out.append(f'<text x="{_fmt(lx + 30)}" y="{_fmt(ly)}" font-size="11">{escape(s.label)}</text>')
    return out


def _document(width, height, body):
    head = ('<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n')
    return head + "\n".join(body) + "\n</svg>\n"


PANEL_W, PANEL_H = 420, 300
MARGIN_L, MARGIN_T, MARGIN_B, MARGIN_R = 70, 30, 50, 20


def line_chart(panels):
    """One or more side-by-side panels of line series."""
    if isinstance(panels, Panel):
        panels = [panels]
    cell_w = MARGIN_L + PANEL_W + MARGIN_R
    width = cell_w * len(panels)
    height = MARGIN_T + PANEL_H + MARGIN_B
    body = []
    for k, p in enumerate(panels):
        fr = _Frame(k * cell_w + MARGIN_L, MARGIN_T, PANEL_W, PANEL_H)
        body += _series_svg(fr, p)
        body += _axes_svg(fr, p.x, p.y, p.title)
    return _document(width, height, body)


# ------------------------------------------------------------------ contours

def marching_squares(z, level):
    """Contour segments of a grid at one level.

    ``z`` has shape (ny, nx); segments come back as ((i0, j0), (i1, j1)) in
    fractional (column, row) index coordinates.  Saddle cells are split using
    the cell-centre average.
    """
    z = np.asarray(z, dtype=float)
    ny, nx = z.shape
    segs = []

    def interp(p, q, vp, vq):
        t = 0.5 if vq == vp else (level - vp) / (vq - vp)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    for j in range(ny - 1):
        for i in range(nx - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            vals = [z[j, i], z[j, i + 1], z[j + 1, i + 1], z[j + 1, i]]
            if not all(math.isfinite(v) for v in vals):
                continue
            above = [v >= level for v in vals]
            if all(above) or not any(above):
                continue
            # crossing points on the four edges, in edge order bottom, right, top, left
            pts = {}
            for e in range(4):
                a, b = e, (e + 1) % 4
                if above[a] != above[b]:
                    pts[e] = interp(corners[a], corners[b], vals[a], vals[b])
            edges = sorted(pts)
            if len(edges) == 2:
                segs.append((pts[edges[0]], pts[edges[1]]))
                continue
            centre_above = sum(vals) / 4 >= level
            # four crossings: pair each edge with a neighbour so the centre side stays connected
            if above[0] == centre_above:
                segs.append((pts[0], pts[1]))
                segs.append((pts[2], pts[3]))
            else:
                segs.append((pts[3], pts[0]))
                segs.append((pts[1], pts[2]))
    return segs


def contour_levels(z, count=5):
    vals = np.asarray(z, dtype=float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0 or vals.min() == vals.max():
        return []
    ticks = nice_ticks(float(vals.min()), float(vals.max()), False, target=count + 1)
    return [t for t in ticks if vals.min() < t < vals.max()]


def heatmap(xs, ys, z, x_axis: Axis, y_axis: Axis, title="", levels=None, colorbar_label=""):
    """Filled cell map of z (shape len(ys) x len(xs)) with white contour lines."""
    z = np.asarray(z, dtype=float)
    finite = z[np.isfinite(z)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo or 1.0
    fr = _Frame(MARGIN_L, MARGIN_T, PANEL_W, PANEL_H)
    body = []

    def edges(vals, axis):
        # cell boundaries halfway between grid points, in the axis' own scale
        v = np.log10(vals) if axis.log else np.asarray(vals, dtype=float)
        mids = (v[1:] + v[:-1]) / 2 if len(v) > 1 else np.array([])
        first = v[0] - (v[1] - v[0]) / 2 if len(v) > 1 else v[0] - 0.5
        last = v[-1] + (v[-1] - v[-2]) / 2 if len(v) > 1 else v[0] + 0.5
        out = np.concatenate([[first], mids, [last]])
        return 10 ** out if axis.log else out

    xe, ye = edges(xs, x_axis), edges(ys, y_axis)
    x_axis = Axis(float(xe[0]), float(xe[-1]), x_axis.log, x_axis.label)
    y_axis = Axis(float(ye[0]), float(ye[-1]), y_axis.log, y_axis.label)
    for j in range(len(ys)):
        for i in range(len(xs)):
            v = z[j, i]
            color = colormap((v - lo) / span) if math.isfinite(v) else "#bbbbbb"
            x0, x1 = fr.px(x_axis, xe[i]), fr.px(x_axis, xe[i + 1])
            y0, y1 = fr.py(y_axis, ye[j + 1]), fr.py(y_axis, ye[j])
            body.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0 + 0.3)}" '
                        f'height="{_fmt(y1 - y0 + 0.3)}" fill="{color}"/>')

    def to_px(pt):
        ci, rj = pt
        # fractional index -> data coordinate, interpolated in the axis' scale
        def pick(vals, axis, f):
            k = min(int(math.floor(f)), len(vals) - 2)
            t = f - k
            if axis.log:
                return 10 ** ((1 - t) * math.log10(vals[k]) + t * math.log10(vals[k + 1]))
            return (1 - t) * vals[k] + t * vals[k + 1]
        return fr.px(x_axis, pick(xs, x_axis, ci)), fr.py(y_axis, pick(ys, y_axis, rj))

    if levels is None:
        levels = contour_levels(z)
    if len(xs) > 1 and len(ys) > 1:
        for lev in levels:
            for p, q in marching_squares(z, lev):
                (x0, y0), (x1, y1) = to_px(p), to_px(q)
                body.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                            'stroke="white" stroke-width="1.2"/>')
    body += _axes_svg(fr, x_axis, y_axis, title)
    # colour bar
    bx = fr.left + fr.width + 20
    steps = 50
    for k in range(steps):
        y = fr.top + fr.height * (1 - (k + 1) / steps)
        body.append(f'<rect x="{_fmt(bx)}" y="{_fmt(y)}" width="14" height="{_fmt(fr.height / steps + 0.3)}" '
                    f'fill="{colormap((k + 0.5) / steps)}"/>')
    for t in nice_ticks(lo, hi, False, target=5) if hi > lo else [lo]:
        y = fr.top + fr.height * (1 - (t - lo) / span)
        body.append(f'<text x="{_fmt(bx + 18)}" y="{_fmt(y + 4)}" font-size="11">{tick_label(t)}</text>')
        for lev in levels:
            if abs(lev - t) < 1e-12:
                body.append(f'<line x1="{_fmt(bx)}" y1="{_fmt(y)}" x2="{_fmt(bx + 14)}" y2="{_fmt(y)}" stroke="white"/>')
    if colorbar_label:
        body.append(f'<text x="{_fmt(bx)}" y="{_fmt(fr.top - 10)}" font-size="12">{escape(colorbar_label)}</text>')
    width = MARGIN_L + PANEL_W + 90
    height = MARGIN_T + PANEL_H + MARGIN_B
    return _document(width, height, body)
