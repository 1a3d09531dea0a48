import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from omega_detect.errors import DegenerateObject, NoForeground
from omega_detect.segmentation import (
    BinaryMask, Contour, largest_component, read_contour_csv, trace_boundary, upper_segment,
    write_contour_csv,
)

blobs = arrays(bool, st.tuples(st.integers(3, 20), st.integers(3, 20)),
               elements=st.booleans())


def _mask(rows):
    return BinaryMask(np.array([[c == "#" for c in r] for r in rows]))


def test_square_centroid_and_bbox():
    px = np.zeros((12, 12), bool)
    px[0:10, 0:10] = True
    c = trace_boundary(BinaryMask(px))
    assert c.centroid == (4.5, 4.5)
    assert c.bbox == {"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9}
    assert len(c) == 36


def test_thin_bar_is_degenerate():
    with pytest.raises(DegenerateObject):
        trace_boundary(_mask(["###"]))


def test_trace_is_clockwise_from_top_left():
    c = trace_boundary(_mask([
        "....",
        ".##.",
        ".##.",
    ]))
    assert c.points.tolist() == [[1, 1], [2, 1], [2, 2], [1, 2]]


def test_one_pixel_wide_parts_are_walked_both_ways():
    # the stem is visited on the way down and again on the way back
    c = trace_boundary(_mask([
        "###",
        ".#.",
        ".#.",
    ]))
    assert c.points.tolist() == [[0, 0], [1, 0], [2, 0], [1, 1], [1, 2], [1, 1]]


def test_largest_component_examples():
    m = _mask([
        "##.....",
        "###....",
        ".....##",
        "....###",
        "....###",
        ".....#.",
    ])
    out = largest_component(m)
    assert out.count == 9 and out.pixels[5, 5]

    single = _mask(["##", "##"])
    assert largest_component(single) == single

    tie = np.zeros((8, 8), bool)
    tie[0:2, 0:2] = True
    tie[5:7, 5:7] = True
    out = largest_component(BinaryMask(tie))
    assert out.pixels[0, 0] and not out.pixels[5, 5]


def test_empty_mask():
    with pytest.raises(NoForeground):
        largest_component(BinaryMask(np.zeros((3, 3), bool)))


@given(blobs)
def test_largest_component_matches_flood_fill(px):
    if not px.any():
        return
    comps = oracles.components(px.tolist())
    best = max(comps, key=len)  # max keeps the first of equal sizes
    got = largest_component(BinaryMask(px)).pixels
    assert set(zip(*np.nonzero(got.T))) == set(best)


@given(blobs)
def test_trace_matches_scans(px):
    if not px.any():
        return
    comp = largest_component(BinaryMask(px))
    if comp.count < 4:
        return
    c = trace_boundary(comp)
    pts = [tuple(p) for p in c.points.tolist()]
    # every point is a foreground boundary pixel
    assert set(pts) <= oracles.boundary_pixels(comp.pixels.tolist())
    # consecutive points, including the closing step, are 8-neighbours
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        assert max(abs(x1 - x0), abs(y1 - y0)) == 1 or len(pts) == 1
    assert c.bbox == oracles.scan_bbox(pts)
    ys, xs = np.nonzero(comp.pixels)
    assert c.bbox == {"x_min": xs.min(), "x_max": xs.max(), "y_min": ys.min(), "y_max": ys.max()}
    mx, my = oracles.exact_mean(pts)
    assert abs(c.centroid[0] - mx) <= 1e-12 and abs(c.centroid[1] - my) <= 1e-12


def test_upper_segment_arithmetic():
    pts = [(0, 20), (5, 30), (10, 40), (5, 100), (0, 110)]
    c = Contour(points=np.array(pts), bbox={"x_min": 0, "x_max": 10, "y_min": 20, "y_max": 110},
                centroid=(4.0, 60.0))
    seg = upper_segment(c)
    assert (seg.d, seg.h) == (40.0, 20.0)
    assert seg.points.tolist() == [[0, 20], [5, 30], [10, 40]]


def test_flat_contour_is_degenerate():
    c = Contour.from_points([(0, 5), (1, 5), (2, 5), (3, 5)])
    with pytest.raises(DegenerateObject):
        upper_segment(c)


@given(blobs, st.lists(st.floats(0, 25), min_size=2, max_size=6))
def test_window_count_monotone_in_h(px, hs):
    comp = largest_component(BinaryMask(px)) if px.any() else None
    if comp is None or comp.count < 4:
        return
    c = trace_boundary(comp)
    if c.centroid[1] <= c.bbox["y_min"]:
        return
    counts = [len(upper_segment(c, h).points) for h in sorted(hs)]
    assert counts == sorted(counts)


def test_contour_csv_round_trip(tmp_path):
    c = trace_boundary(_mask([".##", "###", "##."]))
    write_contour_csv(tmp_path / "c.csv", c)
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "x,y"
    back = read_contour_csv(tmp_path / "c.csv")
    assert back.points.tolist() == c.points.tolist()
    assert back.centroid == c.centroid
