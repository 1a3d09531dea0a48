import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

import oracles
from omega_detect.errors import DegenerateObject, GapInPattern, NoRealSolution, OutOfDomain, Singularity
from omega_detect.omega import (
    OmegaParams, SSolution, eval_forward, invert_for_s, invert_profile, min_invertible_height,
    normalize_profile, normalize_segment, select_branch, select_branches,
)
from omega_detect.segmentation import UpperSegment

xs = st.floats(-20, 20, allow_nan=False)
ks = st.floats(0.25, 12)


def test_forward_examples():
    assert eval_forward(0, 5, 2) == 5
    assert eval_forward(3, 3, 1) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert eval_forward(4, 5, 3) == pytest.approx(math.sqrt(13) - 4, abs=1e-12)


def test_forward_domain():
    with pytest.raises(OutOfDomain):
        eval_forward(10, 1, 2)


@given(xs, st.floats(0, 30), ks)
def test_forward_matches_oracle_and_is_even(x, s, k):
    assume(s * s - x * x + abs(x) >= 0)
    y = eval_forward(x, s, k)
    assert y == pytest.approx(oracles.forward(x, s, k), rel=1e-12, abs=1e-12)
    assert abs(eval_forward(-x, s, k) - y) <= 1e-12


def test_inversion_examples():
    sol = invert_for_s(0, 5, 2)
    assert sol.s_plus == pytest.approx(5) and sol.s_minus == pytest.approx(5)

    y = eval_forward(4, 5, 3)
    sol = invert_for_s(4, y, 3)
    assert sol.s_plus == pytest.approx(5.0, abs=1e-12)
    assert sol.q_plus == pytest.approx(3.0, abs=1e-12)
    # the other quadratic root is introduced by squaring and does not
    # reproduce y, so it is reported absent
    assert sol.q_minus == pytest.approx(-1.64761, abs=1e-4)
    assert sol.s_minus is None
    assert sol.res_minus > 0.5


def test_inversion_errors():
    with pytest.raises(Singularity):
        invert_for_s(3, 1.0, 3)
    with pytest.raises(Singularity):
        invert_for_s(-3, 1.0, 3)
    # |x| < k needs y^2 >= |x| (1 - x^2/k^2)
    with pytest.raises(NoRealSolution):
        invert_for_s(1, 0.1, 3)


def _quadratic_oracle(x, y, k):
    """Squaring y + |x| q / k = sqrt(q^2 + |x|) gives a q^2 + b q + c = 0."""
    a = x * x - k * k
    b = 2 * k * abs(x) * y
    c = k * k * (y * y - abs(x))
    r = math.sqrt(b * b - 4 * a * c)
    return sorted(((-b + r) / (2 * a), (-b - r) / (2 * a)))


@given(st.floats(-8, 8), st.floats(0.1, 15), ks)
def test_roots_match_textbook_quadratic(x, extra, k):
    s = abs(x) + extra
    assume(abs(abs(x) - k) > 0.05)
    y = eval_forward(x, s, k)
    sol = invert_for_s(x, y, k)
    want = _quadratic_oracle(x, y, k)
    got = sorted((sol.q_plus, sol.q_minus))
    scale = max(1.0, max(abs(w) for w in want))
    assert got == pytest.approx(want, abs=1e-7 * scale)


@given(st.floats(-8, 8), st.floats(0.1, 15), ks)
def test_round_trip_and_back_substitution(x, extra, k):
    s = abs(x) + extra
    assume(abs(abs(x) - k) > 1e-3)
    y = eval_forward(x, s, k)
    sol = invert_for_s(x, y, k)
    assert any(abs(b - s) <= 1e-9 * s for b, _ in sol.branches())
    for b, _ in sol.branches():
        assert abs(eval_forward(x, b, k) - y) <= 1e-9 * max(1.0, abs(y), b * b)


@given(st.floats(0, 1e3), ks)
def test_zero_abscissa_law(y, k):
    sol = invert_for_s(0.0, y, k)
    assert select_branch(sol) == pytest.approx(y, rel=1e-12, abs=1e-12)


def test_negative_height_at_zero_has_no_branch():
    sol = invert_for_s(0.0, -2.0, 1.5)
    assert sol.branches() == []
    with pytest.raises(GapInPattern):
        select_branch(sol)


def _sol(**kw):
    base = dict(x=1.0, y=1.0, q_plus=0.0, q_minus=0.0, s_plus=None, s_minus=None,
                res_plus=0.0, res_minus=0.0)
    base.update(kw)
    return SSolution(**base)


def test_select_branch_rules():
    assert select_branch(_sol(s_plus=5.0, res_plus=1e-12, s_minus=4.0, res_minus=1e-14)) == 4.0
    assert select_branch(_sol(s_plus=5.0, s_minus=4.0)) == 5.0  # tie -> larger
    assert select_branch(_sol(s_minus=4.3)) == 4.3
    assert select_branch(_sol(s_plus=5.0, s_minus=4.3), previous_s=4.4) == 4.3
    assert select_branch(_sol(s_plus=5.0, s_minus=4.3), previous_s=4.9) == 5.0


def test_continuity_prefers_minus_branch():
    # two samples whose minus root continues the chain
    a = _sol(s_plus=7.0, res_plus=1e-13, s_minus=4.33, res_minus=1e-12)
    b = _sol(s_plus=6.5, s_minus=4.35)
    assert select_branches([a, b]) == [7.0, 6.5]
    c = _sol(s_minus=4.33)
    assert select_branches([c, b]) == [4.33, 4.35]


def test_select_branches_gaps():
    a = _sol(s_plus=2.0)
    assert select_branches([a, None, _sol(), _sol(s_plus=2.5, s_minus=1.9)]) == [2.0, None, None, 1.9]


def _constant_curve(s0, k, u, n=41):
    x = np.linspace(-min(u, s0), min(u, s0), n)
    y = [eval_forward(v, s0, k) for v in x]
    return invert_profile(x, y, OmegaParams(k=k, u=u))


@pytest.mark.parametrize("s0,k,u", [(5, 3, 5), (5, 1, 5), (3, 0.5, 2)])
def test_constant_s_curve_examples(s0, k, u):
    chosen = select_branches(_constant_curve(s0, k, u))
    present = [c for c in chosen if c is not None]
    assert len(present) >= 39
    assert present == pytest.approx([s0] * len(present), rel=1e-9)


@given(st.floats(1.5, 10), st.floats(0.3, 12), st.integers(2, 12))
def test_constant_s_curve_is_recovered(s0, k, u):
    sols = _constant_curve(s0, k, u)
    # when both roots are genuine at the first sample the chain has no way
    # to know which one the curve was drawn with
    assume(sols[0] is not None and len(sols[0].branches()) == 1)
    present = [c for c in select_branches(sols) if c is not None]
    assert present == pytest.approx([s0] * len(present), rel=1e-8)


def test_normalize_profile_examples():
    xn, yn = normalize_profile(np.arange(30, 71), np.zeros(41), 100)
    assert (xn[0], xn[20], xn[40]) == (-100.0, 0.0, 100.0)
    assert np.all(yn == 0)
    with pytest.raises(DegenerateObject):
        normalize_profile([4, 4], [1, 2], 5)


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=30, unique=True), st.integers(1, 50))
def test_normalize_is_idempotent(raw, u):
    x = np.sort(np.array(raw))
    y = np.abs(np.sin(x))
    assume(x[-1] - x[0] > 1e-3)
    x1, y1 = normalize_profile(x, y, u)
    x2, y2 = normalize_profile(x1, y1, u)
    np.testing.assert_allclose(x2, x1, atol=1e-12)
    np.testing.assert_allclose(y2, y1, atol=1e-12)


def test_normalize_segment_frames():
    pts = np.array([[10, 5], [10, 9], [11, 3], [12, 4], [12, 8], [14, 5]])
    seg = UpperSegment(points=pts, d=10.0, h=5.0, y_min=3)
    params = OmegaParams(k=2.0, u=2)
    x, y = normalize_segment(seg, params)  # y up, lowest point on 0
    assert x.tolist() == [-2.0, -1.0, 0.0, 2.0]
    assert y.tolist() == [0.0, 2.0, 1.0, 0.0]
    x, y = normalize_segment(seg, params, baseline=0.5, y_axis="down")
    assert y.tolist() == [2.5, 0.5, 1.5, 2.5]
    x, y = normalize_segment(seg, params, baseline=None, y_axis="down")
    assert y.min() == pytest.approx(min_invertible_height(2, 2.0))


@given(st.integers(1, 20), st.floats(0.3, 30))
def test_min_invertible_height_is_tight(u, k):
    b = min_invertible_height(u, k)
    grid = np.linspace(0, u, 2001)
    grid = grid[np.abs(grid - k) > 1e-6]
    need = np.sqrt(np.clip(grid * (1 - grid ** 2 / k ** 2), 0, None))
    assert b >= need.max() - 1e-12
    assert b <= need.max() + 1e-3 * max(1.0, b)
    # every height at or above b has a real solution everywhere
    for x in grid[:: 97]:
        invert_for_s(float(x), b + 1e-9, k, eps_sing=1e-7)
