"""S-pattern assembly, landmark extraction and landmark distances.

Landmark naming on a pattern ``s(x)``:

* ``A`` global minimum; ``B``/``C`` highest samples left/right of ``A``.
* ``P``/``Q`` first and last samples.
* ``D`` point of the chord ``BC`` at ``A``'s abscissa.
* ``E``/``H`` deepest significant local minima left/right of ``A``.
* ``F``/``G`` highest significant local maxima between ``E`` and ``A`` and
  between ``A`` and ``H``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from .errors import MalformedPattern, UnreliablePattern

MIN_SAMPLES = 9
MAX_DROPPED = 0.2
DEFAULT_FLATNESS = 0.02  # fraction of the pattern's s-range
DEFAULT_VALLEY_TOL = 0.10  # likewise

LABELS = ("A", "B", "C", "D", "E", "F", "G", "H", "P", "Q")


@dataclass(frozen=True)
class SPattern:
    x: np.ndarray
    s: np.ndarray
    dropped_fraction: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        s = np.asarray(self.s, dtype=float)
        if x.shape != s.shape or x.ndim != 1:
            raise ValueError("x and s must be 1-D and of equal length")
        if len(x) > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("pattern abscissae must be strictly increasing")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("pattern values must be finite and non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "s", s)

    def __len__(self):
        return len(self.x)

    @property
    def s_range(self) -> float:
        return float(self.s.max() - self.s.min()) if len(self.s) else 0.0

    def mirrored(self) -> "SPattern":
        return SPattern(-self.x[::-1], self.s[::-1].copy(), self.dropped_fraction)


@dataclass(frozen=True)
class Point:
    x: float
    s: float
    index: int | None = None  # sample index; None for interpolated points

    def __iter__(self):
        return iter((self.x, self.s))


@dataclass(frozen=True)
class LandmarkSet:
    A: Point
    B: Point
    C: Point
    D: Point
    P: Point
    Q: Point
    E: Point | None = None
    F: Point | None = None
    G: Point | None = None
    H: Point | None = None
    global_min_count: int = 1

    def named(self) -> dict[str, Point]:
        """Present landmarks by name."""
        return {n: getattr(self, n) for n in LABELS if getattr(self, n) is not None}


@dataclass(frozen=True)
class LandmarkDistances:
    AB: float
    AC: float
    PA: float
    QA: float
    BD: float
    DC: float
    d1: float | None = None
    d2: float | None = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("AB", "AC", "PA", "QA", "BD", "DC", "d1", "d2")}


def smooth(values: Sequence[float], window: int) -> np.ndarray:
    """Centered moving average; the window is truncated at the edges."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"smoothing window must be a positive odd integer, got {window}")
    v = np.asarray(values, dtype=float)
    if window == 1 or len(v) == 0:
        return v.copy()
    r = window // 2
    csum = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(len(v))
    lo = np.maximum(idx - r, 0)
    hi = np.minimum(idx + r + 1, len(v))
    return (csum[hi] - csum[lo]) / (hi - lo)


def build_pattern(selected: Sequence[tuple[float, float]], smoothing_window: int = 5,
                  dropped_fraction: float = 0.0) -> SPattern:
    """Smooth the kept ``(x, s)`` samples into a pattern."""
    if len(selected) < MIN_SAMPLES:
        raise UnreliablePattern(f"only {len(selected)} samples, need {MIN_SAMPLES}")
    arr = np.asarray(selected, dtype=float).reshape(-1, 2)
    return SPattern(arr[:, 0], smooth(arr[:, 1], smoothing_window), dropped_fraction)


def pattern_from_selection(xs: Sequence[float], selected: Sequence[float | None],
                           smoothing_window: int = 5, max_dropped: float = MAX_DROPPED) -> SPattern:
    """Drop gaps (``None``), enforce the dropped-sample budget, then smooth."""
    kept = [(float(x), float(s)) for x, s in zip(xs, selected) if s is not None]
    total = len(selected)
    dropped = 1.0 - len(kept) / total if total else 1.0
    if dropped > max_dropped:
        raise UnreliablePattern(f"{dropped:.0%} of samples dropped (limit {max_dropped:.0%})")
    return build_pattern(kept, smoothing_window, dropped)


def _extrema(s: np.ndarray, minima: bool, prominence: float, toward: int | None = None) -> np.ndarray:
    """Interior strict extrema; a plateau counts once, at its middle sample.

    An even-length plateau has two middle samples; the one nearer index
    ``toward`` is used so that mirroring a pattern mirrors its extrema.
    """
    sig = -s if minima else s
    idx, props = find_peaks(sig, prominence=prominence if prominence > 0 else None, plateau_size=1)
    left, right = props["left_edges"], props["right_edges"]
    lo, hi = (left + right) // 2, (left + right + 1) // 2
    if toward is None:
        return lo
    return np.where(np.abs(hi - toward) < np.abs(lo - toward), hi, lo)


def count_global_minima(s: np.ndarray, a: int, tol: float) -> int:
    """Number of distinct valleys reaching within ``tol`` of the global minimum.

    Two candidate minima belong to separate valleys when the highest sample
    between them rises more than ``tol`` above the higher of the two.
    """
    cands = set(_extrema(s, minima=True, prominence=0).tolist())
    cands.add(a)
    deep = sorted(i for i in cands if s[i] <= s[a] + tol)
    valleys = 1
    for left, right in zip(deep, deep[1:]):
        ridge = s[left:right + 1].max()
        if ridge - max(s[left], s[right]) > tol:
            valleys += 1
    return valleys


def find_landmarks(pattern: SPattern, flatness_tol: float | None = None,
                   valley_tol: float | None = None) -> LandmarkSet:
    """Locate the named landmarks on a (smoothed) pattern.

    ``flatness_tol`` (default 2 % of the s-range) is the minimum prominence
    of the flank extrema ``E``-``H``. ``valley_tol`` (default 10 %) is how far
    a second valley may sit above ``A`` and still count as a global minimum.
    """
    x, s = pattern.x, pattern.s
    n = len(s)
    if n < 3:
        raise MalformedPattern("pattern too short for landmarks")
    if flatness_tol is None:
        flatness_tol = DEFAULT_FLATNESS * pattern.s_range
    if valley_tol is None:
        valley_tol = DEFAULT_VALLEY_TOL * pattern.s_range

    smin = s.min()
    ties = np.flatnonzero(s == smin)
    a = int(min(ties, key=lambda i: (abs(x[i]), i)))
    if a == 0 or a == n - 1:
        raise MalformedPattern("global minimum sits at a pattern endpoint")

    def pt(i):
        return Point(float(x[i]), float(s[i]), int(i))

    left, right = s[:a], s[a + 1:]
    b = int(np.flatnonzero(left == left.max())[0])
    c = a + 1 + int(np.flatnonzero(right == right.max())[-1])
    t = (x[a] - x[b]) / (x[c] - x[b])
    D = Point(float(x[a]), float(s[b] + t * (s[c] - s[b])))

    minima = _extrema(s, minima=True, prominence=flatness_tol, toward=a)
    maxima = _extrema(s, minima=False, prominence=flatness_tol, toward=a)

    def deepest(cands):
        # ties go to the candidate farthest from A
        return int(min(cands, key=lambda i: (s[i], -abs(i - a)))) if len(cands) else None

    def highest(cands):
        return int(max(cands, key=lambda i: (s[i], abs(i - a)))) if len(cands) else None

    e = deepest(minima[minima < a])
    h = deepest(minima[minima > a])
    f = highest(maxima[(maxima > e) & (maxima < a)]) if e is not None else None
    g = highest(maxima[(maxima > a) & (maxima < h)]) if h is not None else None

    return LandmarkSet(
        A=pt(a), B=pt(b), C=pt(c), D=D, P=pt(0), Q=pt(n - 1),
        E=pt(e) if e is not None else None,
        F=pt(f) if f is not None else None,
        G=pt(g) if g is not None else None,
        H=pt(h) if h is not None else None,
        global_min_count=count_global_minima(s, a, valley_tol),
    )


def _dist(p: Point, q: Point) -> float:
    return math.hypot(p.x - q.x, p.s - q.s)


def point_line_distance(p: Point, a: Point, b: Point) -> float | None:
    """Distance from ``p`` to the infinite line through ``a`` and ``b``."""
    dx, ds = b.x - a.x, b.s - a.s
    norm = math.hypot(dx, ds)
    if norm == 0:
        return None
    return abs(dx * (p.s - a.s) - ds * (p.x - a.x)) / norm


def compute_distances(lm: LandmarkSet) -> LandmarkDistances:
    d1 = point_line_distance(lm.F, lm.A, lm.E) if lm.E is not None and lm.F is not None else None
    d2 = point_line_distance(lm.G, lm.A, lm.H) if lm.G is not None and lm.H is not None else None
    return LandmarkDistances(
        AB=_dist(lm.A, lm.B), AC=_dist(lm.A, lm.C),
        PA=_dist(lm.P, lm.A), QA=_dist(lm.Q, lm.A),
        BD=_dist(lm.B, lm.D), DC=_dist(lm.D, lm.C),
        d1=d1, d2=d2,
    )


def landmark_tags(pattern: SPattern, lm: LandmarkSet | None) -> list[str]:
    """Per-sample tag strings, several names joined by ``|``."""
    tags: list[list[str]] = [[] for _ in range(len(pattern))]
    if lm is not None:
        for name, p in lm.named().items():
            if p.index is not None:
                tags[p.index].append(name)
    return ["|".join(t) for t in tags]


def export_pattern(pattern: SPattern, lm: LandmarkSet | None, path: str | os.PathLike,
                   svg_path: str | os.PathLike | None = None) -> None:
    """Write the pattern as CSV ``x,s,landmark`` and optionally an SVG plot."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "s", "landmark"])
        for x, s, tag in zip(pattern.x, pattern.s, landmark_tags(pattern, lm)):
            writer.writerow([repr(float(x)), repr(float(s)), tag])
    if svg_path is not None:
        with open(svg_path, "w") as fh:
            fh.write(render_svg(pattern, lm))


def read_pattern_csv(path: str | os.PathLike) -> tuple[SPattern, dict[str, int]]:
    """Inverse of :func:`export_pattern`: the pattern and ``{tag: row}``."""
    xs, ss, tags = [], [], {}
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.DictReader(fh)):
            xs.append(float(row["x"]))
            ss.append(float(row["s"]))
            for t in filter(None, row["landmark"].split("|")):
                tags[t] = i
    return SPattern(np.array(xs), np.array(ss)), tags


def render_svg(pattern: SPattern, lm: LandmarkSet | None, width: int = 800, height: int = 400) -> str:
    margin = 40
    x, s = pattern.x, pattern.s
    x0, x1 = float(x.min()), float(x.max())
    s0, s1 = float(s.min()), float(s.max())
    sx = (width - 2 * margin) / ((x1 - x0) or 1.0)
    sy = (height - 2 * margin) / ((s1 - s0) or 1.0)

    def px(xv, sv):
        return margin + (xv - x0) * sx, height - margin - (sv - s0) * sy

    pts = " ".join("%.2f,%.2f" % px(a, b) for a, b in zip(x, s))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{pts}"/>',
    ]
    if lm is not None:
        for name, p in lm.named().items():
            cx, cy = px(p.x, p.s)
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="red"/>')
            parts.append(f'<text x="{cx + 5:.2f}" y="{cy - 6:.2f}" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
