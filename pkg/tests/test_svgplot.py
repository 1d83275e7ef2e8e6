import math
import xml.etree.ElementTree as ET
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellfield.svgplot import (Axis, Panel, Series, axis_for, colormap, contour_levels, heatmap, line_chart,
                               marching_squares, nice_ticks, tick_label)

SVG = "{http://www.w3.org/2000/svg}"


def _parse(text):
    root = ET.fromstring(text.encode("utf-8"))
    assert root.tag == SVG + "svg"
    assert root.get("version") == "1.1"
    return root


def test_linear_field_gives_a_straight_contour():
    z = np.tile(np.arange(6.0), (4, 1))
    segs = marching_squares(z, 2.5)
    assert len(segs) == 3
    for p, q in segs:
        assert p[0] == pytest.approx(2.5) and q[0] == pytest.approx(2.5)


def test_radial_field_gives_a_closed_circle():
    n = 41
    c = np.linspace(-2, 2, n)
    X, Y = np.meshgrid(c, c)
    z = np.hypot(X, Y)
    # a radius that misses every grid node, so no vertex is degenerate
    segs = marching_squares(z, 1.05)
    h = c[1] - c[0]
    pts = [pt for s in segs for pt in s]
    for ci, rj in pts:
        r = math.hypot(-2 + ci * h, -2 + rj * h)
        assert r == pytest.approx(1.05, abs=h * h)
    # every vertex is shared by exactly two segments on a closed curve
    counts = Counter((round(x, 9), round(y, 9)) for x, y in pts)
    assert set(counts.values()) == {2}


def test_saddle_cell_splits_into_two_segments():
    z = np.array([[1.0, 0.0], [0.0, 1.0]])
    segs = marching_squares(z, 0.5)
    assert len(segs) == 2
    z2 = np.array([[1.0, 0.0], [0.0, 1.0]]) * 0.9 + 0.04
    assert len(marching_squares(z2, 0.5)) == 2


def test_missing_cells_are_skipped():
    z = np.tile(np.arange(5.0), (5, 1))
    z[2, 2] = np.nan
    full = marching_squares(np.tile(np.arange(5.0), (5, 1)), 1.5)
    holed = marching_squares(z, 1.5)
    assert len(holed) == len(full) - 2


def test_level_outside_range_has_no_contour():
    z = np.random.default_rng(0).uniform(0, 1, (6, 6))
    assert marching_squares(z, 2.0) == []
    assert marching_squares(z, -1.0) == []


@given(st.floats(-3, 3), st.floats(0.01, 5))
def test_contour_levels_lie_strictly_inside(lo, span):
    z = np.linspace(lo, lo + span, 30).reshape(5, 6)
    levs = contour_levels(z)
    assert levs
    assert all(lo < v < lo + span for v in levs)


def test_contour_levels_of_a_constant_field():
    assert contour_levels(np.ones((3, 3))) == []


def test_log_ticks_are_decades():
    assert nice_ticks(1e-3, 1e3, True) == [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
    assert len(nice_ticks(1e-6, 1e6, True)) <= 7


def test_linear_ticks_use_round_steps():
    assert nice_ticks(0.0, 2.0, False) == [0.0, 0.5, 1.0, 1.5, 2.0]
    t = nice_ticks(0.13, 0.87, False)
    assert t[0] >= 0.13 and t[-1] <= 0.87
    assert len({round(b - a, 12) for a, b in zip(t, t[1:])}) == 1


def test_tick_labels():
    assert tick_label(0) == "0"
    assert tick_label(1e-4) == "1e-4"
    assert tick_label(0.5) == "0.5"
    assert tick_label(100) == "100"


def test_colormap_clamps_and_is_hex():
    assert colormap(-1) == colormap(0)
    assert colormap(2) == colormap(1) == "#fde725"
    assert all(len(colormap(t)) == 7 for t in np.linspace(0, 1, 11))


def test_log_axis_rejects_nonpositive_limits():
    with pytest.raises(ValueError):
        Axis(0.0, 1.0, log=True)


def test_degenerate_axis_is_widened():
    a = Axis(2.0, 2.0)
    assert a.lo < 2.0 < a.hi


def test_axis_for_ignores_missing_values():
    a = axis_for([None, 1.0, float("nan"), 10.0, -1.0], log=True)
    assert (a.lo, a.hi) == (1.0, 10.0)


def test_line_chart_is_well_formed_and_breaks_at_gaps():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    s = Series(x, [1.0, 2.0, None, 1.5, 1.0], "B & <friends>", "dashed")
    p = Panel(Axis(1.0, 5.0, True, "ell"), Axis(0.0, 2.0, False, "B"), [s], "title")
    root = _parse(line_chart([p, p]))
    lines = root.findall(f"{SVG}polyline")
    assert len(lines) == 4
    assert all(el.get("stroke-dasharray") == "6,4" for el in lines)
    assert any(t.text == "B & <friends>" for t in root.iter(f"{SVG}text"))


def test_heatmap_has_cells_and_white_contours():
    xs = np.geomspace(1e-3, 1e3, 8)
    ys = np.linspace(2.0, 10.0, 6)
    X, Y = np.meshgrid(np.log10(xs), ys)
    z = X + Y
    z[0, 0] = np.nan
    root = _parse(heatmap(xs, ys, z, Axis(xs[0], xs[-1], True, "HR"), Axis(ys[0], ys[-1], False, "alpha"),
                          colorbar_label="B"))
    fills = [r.get("fill") for r in root.findall(f"{SVG}rect")]
    assert "#bbbbbb" in fills
    assert len(fills) >= 8 * 6
    white = [el for el in root.findall(f"{SVG}line") if el.get("stroke") == "white"]
    assert white


def test_heatmap_with_explicit_levels():
    z = np.arange(12.0).reshape(3, 4)
    svg = heatmap([1, 2, 3, 4], [1, 2, 3], z, Axis(1, 4), Axis(1, 3), levels=[5.5])
    root = _parse(svg)
    white = [el for el in root.findall(f"{SVG}line") if el.get("stroke") == "white"]
    assert len(white) == len(marching_squares(z, 5.5))
