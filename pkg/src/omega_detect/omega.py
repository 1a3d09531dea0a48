"""Forward evaluation and closed-form inversion of the omega curve.

The curve relates a profile height ``y`` to the abscissa ``x`` through a
shape parameter ``s`` and a constant ``k``::

    y = sqrt(s^2 - x^2 + |x|) - (|x| / k) * sqrt(|s^2 - x^2|)

Substituting ``q^2 = s^2 - x^2`` and squaring gives a quadratic in ``q``
whose roots are ``k(-|x| y +/- m) / n`` with ``n = x^2 - k^2`` and
``m^2 = |x| n + k^2 y^2``. Squaring admits spurious roots, so every root
is checked by substituting ``s = sqrt(q^2 + x^2)`` back into the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateObject, GapInPattern, NoRealSolution, OutOfDomain, Singularity

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class OmegaParams:
    """Shape constant ``k`` and half-range ``u`` of the normalized abscissa."""

    k: float = 8.0
    u: int = 5
    sing_rel: float = 1e-6  # singular band half-width, as a fraction of u

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if int(self.u) != self.u or self.u < 1:
            raise ValueError(f"u must be a positive integer, got {self.u}")
        if not self.sing_rel > 0:
            raise ValueError("sing_rel must be positive")

    @property
    def eps_sing(self) -> float:
        return self.sing_rel * self.u


@dataclass(frozen=True)
class SSolution:
    """Both roots of the inverted curve at one sample.

    ``s_plus``/``s_minus`` are ``None`` when the root fails back-substitution.
    """

    x: float
    y: float
    q_plus: float
    q_minus: float
    s_plus: float | None
    s_minus: float | None
    res_plus: float
    res_minus: float

    def branches(self) -> list[tuple[float, float]]:
        """Present branches as ``(s, residual)`` pairs."""
        out = []
        if self.s_plus is not None:
            out.append((self.s_plus, self.res_plus))
        if self.s_minus is not None:
            out.append((self.s_minus, self.res_minus))
        return out


def eval_forward(x: float, s: float, k: float) -> float:
    ax = abs(x)
    outer = s * s - x * x + ax
    if outer < 0:
        raise OutOfDomain(f"s^2 - x^2 + |x| < 0 at x={x}, s={s}")
    return math.sqrt(outer) - (ax / k) * math.sqrt(abs(s * s - x * x))


def _residual(x: float, y: float, s: float, k: float) -> float:
    try:
        return abs(eval_forward(x, s, k) - y)
    except OutOfDomain:
        return math.inf


def _quadratic_roots(x: float, y: float, k: float, n: float, m: float) -> tuple[float, float]:
    """Roots ``(q_plus, q_minus)`` avoiding cancellation in the numerator."""
    b = abs(x) * y
    c_over_a = k * k * (y * y - abs(x)) / n
    if b >= 0:
        q_minus = k * (-b - m) / n
        q_plus = c_over_a / q_minus if q_minus != 0 else k * (-b + m) / n
    else:
        q_plus = k * (-b + m) / n
        q_minus = c_over_a / q_plus if q_plus != 0 else k * (-b - m) / n
    return q_plus, q_minus


def invert_for_s(x: float, y: float, k: float, eps_sing: float = 1e-4,
                 tol: float = RESIDUAL_TOL) -> SSolution:
    """Solve the curve for ``s`` at the sample ``(x, y)``.

    Raises :class:`Singularity` when ``|x|`` sits within ``eps_sing`` of
    ``k`` and :class:`NoRealSolution` when the discriminant is negative.
    """
    ax = abs(x)
    n = x * x - k * k
    if abs(ax - k) <= eps_sing:
        raise Singularity(f"|x|={ax} within {eps_sing} of k={k}")
    m2 = ax * n + k * k * y * y
    if m2 < 0:
        raise NoRealSolution(f"negative discriminant at x={x}, y={y}")
    m = math.sqrt(m2)
    q_plus, q_minus = _quadratic_roots(x, y, k, n, m)
    s_plus = math.sqrt(q_plus * q_plus + x * x)
    s_minus = math.sqrt(q_minus * q_minus + x * x)
    r_plus = _residual(x, y, s_plus, k)
    r_minus = _residual(x, y, s_minus, k)
    return SSolution(
        x=x, y=y, q_plus=q_plus, q_minus=q_minus,
        s_plus=s_plus if r_plus <= _tolerance(x, q_plus, k, tol) else None,
        s_minus=s_minus if r_minus <= _tolerance(x, q_minus, k, tol) else None,
        res_plus=r_plus, res_minus=r_minus,
    )


def _tolerance(x: float, q: float, k: float, tol: float) -> float:
    # never tighter than the rounding floor of the two curve terms
    magnitude = math.sqrt(q * q + abs(x)) + abs(x) / k * abs(q)
    return max(tol, 64 * np.finfo(float).eps * magnitude)


def select_branch(solution: SSolution, previous_s: float | None = None) -> float:
    """Pick one root: continuity with ``previous_s`` when given, else best fit.

    Without a previous value the smaller residual wins and ties go to the
    larger ``s``.
    """
    branches = solution.branches()
    if not branches:
        raise GapInPattern(f"no valid branch at x={solution.x}")
    if len(branches) == 1:
        return branches[0][0]
    if previous_s is None:
        return min(branches, key=lambda b: (b[1], -b[0]))[0]
    return min(branches, key=lambda b: (abs(b[0] - previous_s), -b[0]))[0]


def select_branches(solutions: Sequence[SSolution | None]) -> list[float | None]:
    """Left-to-right continuity fold over a sequence of solutions.

    ``None`` entries (samples that could not be inverted) and samples with no
    valid branch come back as ``None``; the chain resumes from the last
    selected value.
    """
    out: list[float | None] = []
    prev = None
    for sol in solutions:
        if sol is None:
            out.append(None)
            continue
        try:
            s = select_branch(sol, prev)
        except GapInPattern:
            out.append(None)
            continue
        out.append(s)
        prev = s
    return out


def invert_profile(xs: Iterable[float], ys: Iterable[float],
                   params: OmegaParams) -> list[SSolution | None]:
    """Invert every sample; singular or unsolvable samples become ``None``."""
    sols: list[SSolution | None] = []
    for x, y in zip(xs, ys):
        try:
            sols.append(invert_for_s(float(x), float(y), params.k, params.eps_sing))
        except (Singularity, NoRealSolution):
            sols.append(None)
    return sols


def top_profile(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Topmost (minimum image-y) point per column, columns ascending."""
    pts = np.asarray(points).reshape(-1, 2)
    cols = np.unique(pts[:, 0])
    tops = np.array([pts[pts[:, 0] == c, 1].min() for c in cols])
    return cols, tops


def normalize_profile(xs, ys_up, u: float, baseline: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Map ``x`` affinely onto ``[-u, u]`` and scale ``y`` by the same factor.

    ``ys_up`` grows upward; the lowest sample lands on ``baseline``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys_up, dtype=float)
    lo, hi = xs.min(), xs.max()
    if hi <= lo:
        raise DegenerateObject("profile spans a single column")
    scale = 2.0 * u / (hi - lo)
    xn = (xs - lo) * scale - u
    yn = (ys - ys.min()) * scale + baseline
    return xn, yn


def min_invertible_height(u: float, k: float) -> float:
    """Smallest height ``y`` with a real solution at every ``|x| <= u``.

    For ``|x| < k`` the curve's height is bounded below by
    ``sqrt(|x| (1 - x^2/k^2))``; this returns the largest such bound.
    """
    a = min(k / math.sqrt(3.0), u, k)
    return math.sqrt(a * (1.0 - a * a / (k * k)))


def normalize_segment(segment, params: OmegaParams, baseline: float | None = 0.0,
                      y_axis: str = "up") -> tuple[np.ndarray, np.ndarray]:
    """Single-valued profile of a window in the ``[-u, u]`` frame.

    With ``y_axis="up"`` heights grow upward and the lowest profile point
    lands on ``baseline``; with ``"down"`` heights grow downward from the
    topmost point instead. ``baseline=None`` picks
    :func:`min_invertible_height`.
    """
    cols, tops = top_profile(segment.points)
    if len(cols) < 2:
        raise DegenerateObject("segment spans a single column")
    if baseline is None:
        baseline = min_invertible_height(params.u, params.k)
    ys = -tops.astype(float) if y_axis == "up" else tops.astype(float)
    return normalize_profile(cols, ys, params.u, baseline)
