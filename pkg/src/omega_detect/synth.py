"""Synthetic silhouettes with known generation parameters.

Every shape is a top profile drawn over a unit abscissa ``u`` in [-1, 1]
(the shoulder span), filled down to a torso block that is wider than the
span, on a 160x120 canvas by default. Humans use the omega curve itself as
the top profile; confusers swap in a dome, a flat top, two side-by-side
omega bumps or an omega whose halves use different shape constants.

Only ``(kind, s0, k, jitter, seed)`` and the canvas size are recorded;
every other draw (pose, asymmetry, lobe spacing) comes from ``seed``, so a
manifest row is enough to regenerate a mask bit for bit.
"""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import SpecError
from .omega import eval_forward
from .segmentation import BinaryMask, save_mask

KINDS = ("omega_human", "circle_top", "rect_top", "two_lobe", "asym_omega")
NONHUMAN_KINDS = KINDS[1:]
HUMAN, NON_HUMAN = "HUMAN", "NON_HUMAN"

SPAN_FRACTION = 0.22  # shoulder span / canvas width
TORSO_WIDTH = 1.6  # x shoulder span
TOP_MARGIN = 3  # also kept free below the torso
MIN_SPAN = 12
MIN_TORSO = 2.0  # torso height, x head-shoulder height
SAMPLES_PER_PX = 4
MANIFEST_FIELDS = ("filename", "label", "kind", "s0", "k", "jitter", "seed")


@dataclass(frozen=True)
class ShapeSpec:
    kind: str = "omega_human"
    s0: float = 5.0
    k: float = 3.0
    width: int = 160
    height: int = 120
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not self.s0 > 0 or not self.k > 0:
            raise SpecError("s0 and k must be positive")
        if self.jitter < 0:
            raise SpecError("jitter must be non-negative")
        if self.width < 16 or self.height < 16:
            raise SpecError("canvas too small")

    @property
    def label(self) -> str:
        return HUMAN if self.kind == "omega_human" else NON_HUMAN

    @property
    def span_px(self) -> int:
        return int(round(SPAN_FRACTION * self.width))


@dataclass
class LabeledMask:
    mask: BinaryMask
    label: str
    spec: ShapeSpec
    ground_truth: np.ndarray = field(repr=False)  # (N, 2) analytic (col, row) of the top profile
    variant: dict = field(default_factory=dict)


def _omega(u: np.ndarray, s0: float, k: float) -> np.ndarray:
    """Omega curve over the unit span, heights in units of ``s0``."""
    return np.array([eval_forward(v * s0, s0, k) for v in u]) / s0


def _variant(spec: ShapeSpec, rng: np.random.Generator) -> dict:
    kind = spec.kind
    if kind == "omega_human":
        # a quarter of humans are seen side-on: one shoulder hidden
        side = rng.random() < 0.25
        return {"view": "side" if side else "front", "side": int(rng.choice([-1, 1]))}
    if kind == "asym_omega":
        side = int(rng.choice([-1, 1]))
        return {"shift": side * float(rng.uniform(0.3, 0.5)), "k_ratio": float(rng.uniform(1.2, 1.6))}
    if kind == "two_lobe":
        return {"gap": float(rng.uniform(0.0, 0.15))}
    if kind == "circle_top":
        return {"aspect": float(rng.uniform(0.55, 0.9))}
    return {"corner": float(rng.uniform(0.05, 0.15))}


def top_curve(spec: ShapeSpec, u: np.ndarray, variant: dict) -> np.ndarray:
    """Profile height (upward, unit-span scale) at abscissae ``u``."""
    kind, s0, k = spec.kind, spec.s0, spec.k
    if kind == "omega_human":
        y = _omega(u, s0, k)
        if variant.get("view") == "side":
            # far shoulder hidden: that half falls from the head straight to
            # the shoulder line with no neck notch
            far = u * variant["side"] > 0
            top = float(_omega(np.linspace(-1, 1, 2001), s0, k).max())
            edge = float(_omega(np.array([float(variant["side"])]), s0, k)[0])
            y = np.where(far, edge + (top - edge) * (1 - np.abs(u) ** 2), y)
        return y
    if kind == "asym_omega":
        # head pushed sideways: one half squeezed, the other stretched, and
        # the squeezed half drawn with a wider shape constant
        c = variant["shift"]
        left = u < c
        v = np.where(left, (u - c) / (1 + c), (u - c) / (1 - c))
        squeezed = left if c > 0 else ~left
        return np.where(squeezed, _omega(v, s0, k * variant["k_ratio"]), _omega(v, s0, k))
    if kind == "two_lobe":
        gap = variant["gap"]
        half = (1 - gap) / 2
        centre = np.where(u < 0, -1 + half, 1 - half)
        v = np.clip((u - centre) / half, -1, 1)
        y = _omega(v, s0, k)
        return np.where(np.abs(u) < gap / 2, y.min(), y)
    if kind == "circle_top":
        return variant["aspect"] * np.sqrt(np.clip(1 - u * u, 0, None))
    # rect_top: flat with bevelled corners
    corner = variant["corner"]
    return 0.5 * np.clip((1 - np.abs(u)) / corner, 0, 1)


def generate(spec: ShapeSpec) -> LabeledMask:
    """Rasterize one silhouette. Deterministic for a given spec."""
    rng = np.random.default_rng(spec.seed)
    variant = _variant(spec, rng)
    bottom = spec.height - 1 - TOP_MARGIN
    probe = top_curve(spec, np.linspace(-1, 1, 401), variant)
    unit_h = float(probe.max() - probe.min())
    # tall profiles get a narrower span so head, shoulders and torso still fit
    span = spec.span_px
    if unit_h > 0:
        span = min(span, int(2 * (bottom - TOP_MARGIN) / (unit_h * (1 + MIN_TORSO))))
    if span < MIN_SPAN:
        raise SpecError(f"shape does not fit a {spec.width}x{spec.height} canvas")
    if spec.jitter >= span / 8:
        raise SpecError(f"jitter {spec.jitter} must stay below a quarter of the head width")
    ppu = span / 2.0  # pixels per unit of u

    cols = np.arange(span + 1)
    u = cols / span * 2.0 - 1.0
    y = top_curve(spec, u, variant)
    prof_h = (y.max() - y.min()) * ppu
    rows = TOP_MARGIN + (y.max() - y) * ppu
    fine_u = np.linspace(-1, 1, span * SAMPLES_PER_PX + 1)
    fine_rows = TOP_MARGIN + (y.max() - top_curve(spec, fine_u, variant)) * ppu
    x0 = (spec.width - span) // 2
    truth = np.column_stack([x0 + (fine_u + 1) * ppu, fine_rows])

    if spec.jitter > 0:
        rows = rows + rng.uniform(-spec.jitter, spec.jitter, len(rows))
    rows = np.clip(np.round(rows).astype(int), 0, None)

    # shoulders continue outward from the span ends as a ledge; inside the
    # span the profile (and any neck notch) is kept. The torso runs to the
    # canvas bottom so the boundary centroid sits low enough for the
    # window to cover the shoulder line.
    shoulder = int(max(rows[0], rows[-1]))
    # same parity as the span so head and torso share a centre column
    torso_w = span + 2 * int(round((TORSO_WIDTH - 1) * span / 2))
    tx0 = (spec.width - torso_w) // 2
    if bottom - rows.max() < max(MIN_TORSO * prof_h, 8.0) or tx0 < 0:
        raise SpecError(f"shape does not fit a {spec.width}x{spec.height} canvas")

    px = np.zeros((spec.height, spec.width), dtype=bool)
    px[shoulder:bottom + 1, tx0:tx0 + torso_w + 1] = True
    px[:, x0:x0 + span + 1] = False
    for c, r in zip(cols, rows):
        px[r:bottom + 1, x0 + c] = True
    return LabeledMask(BinaryMask(px), spec.label, spec, truth, variant)


def item_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def random_spec(kind: str, seed: int, width: int = 160, height: int = 120) -> ShapeSpec:
    """Randomized parameters for one corpus item, all drawn from ``seed``."""
    rng = np.random.default_rng([seed, 1])
    s0 = round(float(rng.uniform(4.5, 5.5)), 4)
    k = round(float(rng.uniform(2.6, 3.4)), 4)
    jitter = round(float(rng.uniform(0.2, 0.6)), 4)
    return ShapeSpec(kind=kind, s0=s0, k=k, width=width, height=height, jitter=jitter, seed=seed)


def corpus_specs(n_human: int = 100, n_nonhuman: int = 25, seed: int = 0,
                 width: int = 160, height: int = 120) -> list[ShapeSpec]:
    if n_human < 1 or n_nonhuman < 1:
        raise SpecError("corpus needs at least one item of each class")
    specs = []
    for i in range(n_human):
        specs.append(random_spec("omega_human", item_seed(seed, i), width, height))
    for j in range(n_nonhuman):
        kind = NONHUMAN_KINDS[j % len(NONHUMAN_KINDS)]
        specs.append(random_spec(kind, item_seed(seed, n_human + j), width, height))
    return specs


def generate_corpus(n_human: int = 100, n_nonhuman: int = 25, seed: int = 0,
                    width: int = 160, height: int = 120) -> list[LabeledMask]:
    return [generate(s) for s in corpus_specs(n_human, n_nonhuman, seed, width, height)]


def manifest_row(filename: str, spec: ShapeSpec) -> dict:
    return {"filename": filename, "label": spec.label, "kind": spec.kind,
            "s0": spec.s0, "k": spec.k, "jitter": spec.jitter, "seed": spec.seed}


def write_corpus(items: list[LabeledMask], out_dir: str | os.PathLike,
                 manifest_name: str = "manifest.csv", prefix: str = "mask") -> str:
    """Write masks as PGM plus a manifest CSV; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for i, item in enumerate(items):
        name = f"{prefix}_{i:04d}_{item.spec.kind}.pgm"
        save_mask(os.path.join(out_dir, name), item.mask)
        rows.append(manifest_row(name, item.spec))
    path = os.path.join(out_dir, manifest_name)
    write_manifest(path, rows)
    return path


def write_manifest(path: str | os.PathLike, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def read_manifest(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        missing = [f for f in ("filename", "label") if not row.get(f)]
        if missing:
            raise ValueError(f"manifest row missing {missing}: {row}")
    return rows


def spec_from_row(row: dict, width: int = 160, height: int = 120) -> ShapeSpec:
    return ShapeSpec(kind=row["kind"], s0=float(row["s0"]), k=float(row["k"]),
                     width=width, height=height, jitter=float(row["jitter"]), seed=int(row["seed"]))


def with_jitter(spec: ShapeSpec, jitter: float) -> ShapeSpec:
    return replace(spec, jitter=jitter)


def spec_dict(spec: ShapeSpec) -> dict:
    return asdict(spec)
