"""Binary mask ingestion, boundary tracing and head-shoulder windowing.

Coordinates follow the image convention throughout: ``x`` is the column
(rightward), ``y`` the row (downward), so the top of an object has the
smallest ``y``.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import pnm
from .errors import DegenerateObject, NoForeground

DEFAULT_THRESHOLD = 128
MIN_OBJECT_PIXELS = 4

# Moore neighbourhood as (dx, dy), clockwise on screen starting west.
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_MOORE_INDEX = {off: i for i, off in enumerate(_MOORE)}
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean grid, ``True`` = foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=bool)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D grid, got shape {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def count(self) -> int:
        return int(self.pixels.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None

    def to_gray(self) -> np.ndarray:
        return np.where(self.pixels, 255, 0).astype(np.uint8)


@dataclass(frozen=True)
class Contour:
    """Closed outer boundary, clockwise, first point topmost-then-leftmost."""

    points: np.ndarray  # (N, 2) int, columns (x, y)
    bbox: dict = field(default_factory=dict)
    centroid: tuple[float, float] = (0.0, 0.0)

    @classmethod
    def from_points(cls, points) -> "Contour":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        bbox = {
            "x_min": int(pts[:, 0].min()),
            "x_max": int(pts[:, 0].max()),
            "y_min": int(pts[:, 1].min()),
            "y_max": int(pts[:, 1].max()),
        }
        centroid = (float(pts[:, 0].mean()), float(pts[:, 1].mean()))
        return cls(points=pts, bbox=bbox, centroid=centroid)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class UpperSegment:
    """Contour points inside the head-shoulder window ``y <= y_min + h``."""

    points: np.ndarray
    d: float
    h: float
    y_min: int


def mask_from_array(values: np.ndarray, threshold: int = DEFAULT_THRESHOLD,
                    maxval: int | None = 255) -> BinaryMask:
    """Threshold a gray array. ``maxval=None`` marks bilevel data (threshold ignored)."""
    values = np.asarray(values)
    if maxval is None:
        return BinaryMask(values.astype(bool))
    if maxval != 255:
        # threshold is expressed on the 0..255 scale whatever the file depth
        return BinaryMask(values * 255 >= threshold * maxval)
    return BinaryMask(values >= threshold)


def load_mask(path: str | os.PathLike, threshold: int = DEFAULT_THRESHOLD) -> BinaryMask:
    """Read a PBM/PGM/PNG file into a mask.

    Gray pixels are foreground when ``value >= threshold``; for PBM files
    the stored 1 bits are foreground and ``threshold`` is ignored.
    """
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    values, maxval = pnm.read_image(path)
    return mask_from_array(values, threshold, maxval)


def save_mask(path: str | os.PathLike, mask: BinaryMask) -> None:
    pnm.write_pgm(path, mask.to_gray())


def largest_component(mask: BinaryMask) -> BinaryMask:
    """Keep only the biggest 8-connected foreground component.

    Ties go to the component whose first pixel comes earliest in row-major
    scan order.
    """
    labels, n = ndimage.label(mask.pixels, structure=_EIGHT)
    if n == 0:
        raise NoForeground("mask has no foreground pixels")
    if n == 1:
        return BinaryMask(labels > 0)
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=n + 1)
    ids, first = np.unique(flat, return_index=True)
    first_at = dict(zip(ids.tolist(), first.tolist()))
    best = min(range(1, n + 1), key=lambda lab: (-sizes[lab], first_at[lab]))
    return BinaryMask(labels == best)


def trace_boundary(mask: BinaryMask) -> Contour:
    """Moore-neighbour trace of the outer boundary with Jacob's stopping rule.

    The trace starts at the topmost-then-leftmost foreground pixel and runs
    clockwise on screen. It follows the component containing that pixel.
    """
    px = mask.pixels
    if px.sum() < MIN_OBJECT_PIXELS:
        raise DegenerateObject(f"object has fewer than {MIN_OBJECT_PIXELS} pixels")
    padded = np.pad(px, 1, constant_values=False)
    rows, cols = np.nonzero(padded)
    start = (int(cols[0]), int(rows[0]))  # np.nonzero is row-major
    start_back = (start[0] - 1, start[1])

    def successor(p, back):
        bi = _MOORE_INDEX[(back[0] - p[0], back[1] - p[1])]
        prev = back
        for step in range(1, 9):
            dx, dy = _MOORE[(bi + step) % 8]
            q = (p[0] + dx, p[1] + dy)
            if padded[q[1], q[0]]:
                return q, prev
            prev = q
        return None, None

    points = [start]
    p, back = start, start_back
    first_next, _ = successor(start, start_back)
    if first_next is None:
        raise DegenerateObject("isolated pixel has no traceable boundary")
    limit = 4 * padded.size + 8
    for _ in range(limit):
        q, back = successor(p, back)
        if q == start and successor(q, back)[0] == first_next:
            break
        points.append(q)
        p = q
    else:  # pragma: no cover - the trace is a closed walk
        raise RuntimeError("boundary trace did not close")
    pts = np.asarray(points, dtype=np.int64) - 1
    return Contour.from_points(pts)


def upper_segment(contour: Contour, h: float | None = None) -> UpperSegment:
    """Cut the head-shoulder window out of a contour.

    ``d`` is the drop from the bounding-box top to the boundary centroid and
    the window height defaults to ``d / 2``. Passing ``h`` overrides the
    window height (used for sweeps); loop order is preserved.
    """
    y_min = contour.bbox["y_min"]
    d = contour.centroid[1] - y_min
    if d <= 0:
        raise DegenerateObject("object has no vertical extent above its centroid")
    if h is None:
        h = d / 2.0
    keep = contour.points[:, 1] <= y_min + h
    return UpperSegment(points=contour.points[keep], d=float(d), h=float(h), y_min=y_min)


def object_contour(mask: BinaryMask) -> Contour:
    """Largest component followed by its boundary trace."""
    return trace_boundary(largest_component(mask))


def write_contour_csv(path: str | os.PathLike, contour: Contour) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        writer.writerows(contour.points.tolist())


def read_contour_csv(path: str | os.PathLike) -> Contour:
    with open(path, newline="") as fh:
        rows = [(int(r["x"]), int(r["y"])) for r in csv.DictReader(fh)]
    return Contour.from_points(rows)
