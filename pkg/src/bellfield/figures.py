"""Figure recipes: a sweep config per figure plus overlay curves and rendering.

Each recipe is an ordinary sweep config, so ``--set`` overrides work the same
way as for ``sweep``.
"""

import copy
from dataclasses import dataclass

import numpy as np

from .gkmr import bell as gkmr_bell
from .gkmr import bell_value, minkowski_bell_approx, minkowski_bell_plateau
from .larsson import large_ell_limits, small_ell_szsz, small_ell_sxsx
from .model import SceneParams, build_covariance, reduced_a
from .svgplot import PALETTE, Axis, Panel, Series, axis_for, heatmap, line_chart
from .sweep import SweepSpec, run_sweep

# red is reserved for the analytic overlays
CURVE_COLORS = [c for c in PALETTE if c != "#d62728"]
LABELS = {"HR": "HR", "alpha": "alpha = d/R", "beta": "beta", "delta": "delta", "ell": "ell"}


def _axis(name, lo, hi, count, scale="log"):
    return {"name": name, "min": lo, "max": hi, "count": count, "scale": scale}


RECIPES = {
    "fig2L": {"background": "minkowski", "axes": [_axis("alpha", "min", 1e3, 60)], "fixed": {"delta": 0.01}},
    "fig2R": {"background": "minkowski", "axes": [_axis("delta", 1e-3, 1e2, 60)], "fixed": {"alpha": "min"}},
    "fig3": {"background": "desitter", "axes": [_axis("alpha", "min", 1e2, 40), _axis("HR", 1e-3, 1e3, 40)],
             "fixed": {"delta": 0.01, "beta": 1e-4}},
    "fig4": {"background": "desitter", "axes": [_axis("alpha", "min", 1e4, 60)],
             "fixed": {"HR": 1e-2, "beta": 1e-4, "delta": 1e-2}},
    "fig5": {"background": "desitter", "axes": [_axis("HR", 1e-3, 1e3, 60)],
             "fixed": {"alpha": "min", "beta": 1e-4, "delta": 1e-2}},
    "fig6": {"background": "minkowski", "family": "larsson", "axes": [_axis("ell", 1e-2, 1e2, 40)],
             "fixed": {"alpha": 3.0, "delta": 0.1}},
    "fig7": {"background": "desitter", "family": "larsson",
             "axes": [{"name": "HR", "values": [0.01, 0.1, 1.0, 10.0, 100.0]}, _axis("ell", 1e-2, 1e4, 49)],
             "fixed": {"alpha": 3.0, "beta": 1e-4, "delta": 0.1}},
    "fig8": {"background": "desitter", "axes": [_axis("beta", 1e-6, 1e-1, 30), _axis("HR", 1e-3, 1e3, 30)],
             "fixed": {"alpha": "min", "delta": 0.01}},
    "fig9": {"background": "desitter", "axes": [_axis("delta", 1e-3, 1e1, 30), _axis("HR", 1e-3, 1e3, 30)],
             "fixed": {"alpha": "min", "beta": 1e-3}},
    "fig10": {"background": "desitter", "axes": [_axis("beta", 1e-6, 1e-1, 30), _axis("delta", 1e-3, 1e1, 30)],
              "fixed": {"alpha": "min", "HR": 1e3}},
}
FIGURE_IDS = tuple(RECIPES)


def recipe(fig_id):
    if fig_id not in RECIPES:
        raise KeyError(fig_id)
    cfg = copy.deepcopy(RECIPES[fig_id])
    cfg.setdefault("family", "gkmr")
    return cfg


@dataclass
class FigureOutput:
    columns: list
    rows: list
    svg: str
    spec: SweepSpec


def _ok(r):
    return not r.get("error")


def _col(rows, key):
    return [r.get(key) if _ok(r) else None for r in rows]


def _bell_series(rows, xkey, label="B", **kw):
    return Series(_col(rows, xkey), _col(rows, "bell"), label, **kw)


def _larsson_limits(background, alpha, delta, beta=0.0, HR=None):
    s = (SceneParams.minkowski(alpha, delta, beta) if background == "minkowski"
         else SceneParams.desitter(HR, alpha, beta, delta))
    g = build_covariance(s)
    a = reduced_a(g)
    small = lambda ell: bell_value(small_ell_szsz(a, ell), small_ell_sxsx(g, ell))
    sx_inf, sz_inf = large_ell_limits(g)
    return small, bell_value(sz_inf, sx_inf)


def _overlay_line(rows, xkey, yfun, label, style):
    xs = _col(rows, xkey)
    ys = [yfun(x) if x is not None else None for x in xs]
    return Series(xs, ys, label, style, "#d62728")


def _grid_values(rows, xkey, ykey):
    xs = sorted({r[xkey] for r in rows})
    ys = sorted({r[ykey] for r in rows})
    z = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: j for j, v in enumerate(ys)}
    for r in rows:
        if _ok(r):
            z[yi[r[ykey]], xi[r[xkey]]] = r["bell"]
    return xs, ys, z


def render(fig_id, spec: SweepSpec, rows):
    """Add overlay columns to ``rows`` in place and return (extra columns, svg)."""
    fx = spec.fixed
    extra = []
    if fig_id in ("fig2L", "fig2R"):
        key = "alpha" if fig_id == "fig2L" else "delta"
        for r in rows:
            if _ok(r):
                r["bell_approx"] = minkowski_bell_approx(r["alpha"], r["delta"])
                r["bell_plateau"] = minkowski_bell_plateau(r["delta"])
        extra = ["bell_approx", "bell_plateau"]
        series = [_bell_series(rows, key, "full"),
                  Series(_col(rows, key), _col(rows, "bell_approx"), "small-delta, large-alpha", "dashed")]
        if fig_id == "fig2L":
            series.append(Series(_col(rows, key), _col(rows, "bell_plateau"), "large-alpha plateau", "dotted"))
        ys = [v for s in series for v in s.y if v is not None]
        p = Panel(axis_for(_col(rows, key), True, LABELS[key]), axis_for(ys, False, "B", pad=0.05), series)
        return extra, line_chart(p)
    if fig_id == "fig4":
        for r in rows:
            if _ok(r):
                flat = gkmr_bell(build_covariance(SceneParams.minkowski(r["alpha"], r["delta"])))
                r["bell_minkowski"] = flat.bell
        extra = ["bell_minkowski"]
        series = [_bell_series(rows, "alpha", "de Sitter"),
                  Series(_col(rows, "alpha"), _col(rows, "bell_minkowski"), "Minkowski", "dashed")]
        ys = [v for s in series for v in s.y if v is not None]
        p = Panel(axis_for(_col(rows, "alpha"), True, LABELS["alpha"]), axis_for(ys, True, "B"), series,
                  f"HR = {fx.get('HR')}")
        return extra, line_chart(p)
    if fig_id == "fig5":
        for r in rows:
            if _ok(r):
                r["twice_purity"] = 2 * r["purity"]
        extra = ["twice_purity"]
        series = [_bell_series(rows, "HR"), Series(_col(rows, "HR"), _col(rows, "twice_purity"), "2 purity", "dashed")]
        ys = [v for s in series for v in s.y if v is not None]
        p = Panel(axis_for(_col(rows, "HR"), True, "HR"), axis_for(ys, True, "B, 2p"), series)
        return extra, line_chart(p)
    if fig_id == "fig6":
        small, large = _larsson_limits("minkowski", fx["alpha"], fx["delta"], fx.get("beta", 0.0))
        for r in rows:
            if _ok(r):
                r["bell_small_ell"] = small(r["ell"])
                r["bell_large_ell"] = large
        extra = ["bell_small_ell", "bell_large_ell"]
        series = [_bell_series(rows, "ell", "full", color="#1f77b4"),
                  _overlay_line(rows, "ell", small, "small ell", "dashed"),
                  _overlay_line(rows, "ell", lambda _: large, "large ell", "dotted")]
        p = Panel(axis_for(_col(rows, "ell"), True, "ell"), axis_for([0.0, 2.05], False, "B"), series)
        return extra, line_chart(p)
    if fig_id == "fig7":
        small, large = _larsson_limits("desitter", fx["alpha"], fx["delta"], fx["beta"], 1.0)
        for r in rows:
            if _ok(r) and r["HR"] == 1.0:
                r["bell_small_ell"] = small(r["ell"])
                r["bell_large_ell"] = large
        extra = ["bell_small_ell", "bell_large_ell"]
        hrs = sorted({r["HR"] for r in rows})
        panels = []
        for title, keep in (("sub-Hubble", lambda h: h <= 1), ("super-Hubble", lambda h: h >= 1)):
            series = []
            for h in filter(keep, hrs):
                sub = [r for r in rows if r["HR"] == h]
                # same colour for a given HR in both panels
                series.append(_bell_series(sub, "ell", f"HR = {h:g}", color=CURVE_COLORS[hrs.index(h) % len(CURVE_COLORS)]))
            ones = [r for r in rows if r["HR"] == 1.0]
            if ones:
                series.append(_overlay_line(ones, "ell", small, "small ell (HR=1)", "dashed"))
                series.append(_overlay_line(ones, "ell", lambda _: large, "large ell (HR=1)", "dotted"))
            panels.append(Panel(axis_for(_col(rows, "ell"), True, "ell"), axis_for([0.0, 2.05], False, "B"),
                                series, title))
        return extra, line_chart(panels)
    # heatmaps: first axis along x, second along y
    xkey, ykey = spec.axes[0].name, spec.axes[1].name
    xs, ys, z = _grid_values(rows, xkey, ykey)
    svg = heatmap(xs, ys, z, Axis(xs[0], xs[-1], spec.axes[0].scale == "log" or len(xs) < 2, LABELS[xkey]),
                  Axis(ys[0], ys[-1], spec.axes[1].scale == "log" or len(ys) < 2, LABELS[ykey]),
                  colorbar_label="B")
    return extra, svg


def reproduce_figure(fig_id, cfg=None, workers=1):
    cfg = recipe(fig_id) if cfg is None else cfg
    cfg = {k: v for k, v in cfg.items() if k != "output"}
    spec = SweepSpec.from_config(cfg)
    rows = run_sweep(spec, workers)
    extra, svg = render(fig_id, spec, rows)
    return FigureOutput(spec.columns() + extra, rows, svg, spec)


def sweep_svg(spec: SweepSpec, rows):
    """Generic plot for a sweep: B along one axis, or a heatmap for two."""
    if len(spec.axes) == 1:
        key = spec.axes[0].name
        p = Panel(axis_for(_col(rows, key), spec.axes[0].scale == "log", LABELS[key]),
                  axis_for(_col(rows, "bell"), False, "B", pad=0.05), [_bell_series(rows, key)])
        return line_chart(p)
    if len(spec.axes) == 2:
        return render("fig3", spec, rows)[1]
    raise ValueError("plots need one or two swept axes")
