"""Five-descriptor unanimous-vote classifier, calibration and evaluation."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import landmarks as lmk
from .config import RunConfig, Thresholds
from .errors import CalibrationError, OmegaError
from .omega import OmegaParams, invert_profile, normalize_segment, select_branches
from .segmentation import BinaryMask, largest_component, load_mask, trace_boundary, upper_segment

HUMAN, NON_HUMAN, REJECTED = "HUMAN", "NON_HUMAN", "REJECTED"
DESCRIPTOR_NAMES = ("omega1", "omega2", "omega3", "omega4", "omega5")


@dataclass
class Descriptors:
    omega1: int
    omega2: int
    omega3: int
    omega4: int
    omega5: int
    raw: dict = field(default_factory=dict)

    def values(self) -> tuple[int, ...]:
        return tuple(getattr(self, n) for n in DESCRIPTOR_NAMES)


@dataclass
class Decision:
    label: str
    descriptors: Descriptors | None = None
    reject_reason: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"label": self.label}
        if self.descriptors is not None:
            out["descriptors"] = {n: getattr(self.descriptors, n) for n in DESCRIPTOR_NAMES}
            out["raw"] = self.descriptors.raw
        if self.reject_reason is not None:
            out["reject_reason"] = self.reject_reason
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


@dataclass
class Analysis:
    """Every intermediate of the pipeline for one mask."""

    contour: object
    segment: object
    x: np.ndarray
    y: np.ndarray
    selected: list
    pattern: lmk.SPattern
    landmarks: lmk.LandmarkSet
    distances: lmk.LandmarkDistances


# -- descriptors -------------------------------------------------------------

def descriptor1(lm: lmk.LandmarkSet) -> int:
    return int(lm.global_min_count == 1)


def _balance(first: float | None, second: float | None, th: float, mode: str) -> int:
    if first is None or second is None:
        return 0
    if mode == "signed":
        return int(first - second > th)
    return int(abs(first - second) < th)


def descriptor2(dist: lmk.LandmarkDistances, th: Thresholds) -> int:
    return _balance(dist.AB, dist.AC, th.omega2_th, th.mode2)


def descriptor3(dist: lmk.LandmarkDistances, th: Thresholds) -> int:
    return _balance(dist.PA, dist.QA, th.omega3_th, th.mode3)


def descriptor4(dist: lmk.LandmarkDistances, th: Thresholds) -> int:
    return _balance(dist.BD, dist.DC, th.omega4_th, "absolute")


def descriptor5(dist: lmk.LandmarkDistances, th: Thresholds) -> int:
    """One flank within tolerance is enough (side views show a single flank)."""
    return int(any(d is not None and d < th.omega5_th for d in (dist.d1, dist.d2)))


def decide(values: Iterable[int]) -> str:
    return HUMAN if all(v == 1 for v in values) else NON_HUMAN


def describe(lm: lmk.LandmarkSet, dist: lmk.LandmarkDistances, thresholds: Thresholds,
             s_range: float) -> Descriptors:
    """Evaluate all five descriptors; ``thresholds`` may be s-range relative."""
    th = thresholds.scaled(s_range)
    raw = dict(dist.as_dict())
    raw.update(global_min_count=lm.global_min_count, s_range=s_range,
               mode2=th.mode2, mode3=th.mode3,
               thresholds={"omega2_th": th.omega2_th, "omega3_th": th.omega3_th,
                           "omega4_th": th.omega4_th, "omega5_th": th.omega5_th})
    return Descriptors(descriptor1(lm), descriptor2(dist, th), descriptor3(dist, th),
                       descriptor4(dist, th), descriptor5(dist, th), raw)


# -- pipeline ----------------------------------------------------------------

def analyze(mask: BinaryMask, config: RunConfig = RunConfig()) -> Analysis:
    """Run segmentation, inversion and landmarking; raises on any failure."""
    contour = trace_boundary(largest_component(mask))
    segment = upper_segment(contour)
    xs, ys = normalize_segment(segment, config.omega, config.baseline, config.y_axis)
    selected = select_branches(invert_profile(xs, ys, config.omega))
    pattern = lmk.pattern_from_selection(xs, selected, config.smoothing_window, config.max_dropped)
    lm = lmk.find_landmarks(pattern, config.flatness * pattern.s_range,
                            config.valley_tol * pattern.s_range)
    return Analysis(contour, segment, xs, ys, selected, pattern, lm, lmk.compute_distances(lm))


def classify(mask: BinaryMask, config: RunConfig = RunConfig()) -> Decision:
    try:
        a = analyze(mask, config)
    except OmegaError as exc:
        return Decision(REJECTED, reject_reason=exc.code)
    desc = describe(a.landmarks, a.distances, config.thresholds, a.pattern.s_range)
    return Decision(decide(desc.values()), desc)


def classify_path(path: str | os.PathLike, config: RunConfig = RunConfig()) -> Decision:
    """Like :func:`classify` but reading the mask; unreadable files are REJECTED."""
    try:
        mask = load_mask(path, config.gray_threshold)
    except OmegaError as exc:
        return Decision(REJECTED, reject_reason=exc.code)
    return classify(mask, config)


def _classify_star(args):
    return classify_path(*args) if isinstance(args[0], (str, os.PathLike)) else classify(*args)


def classify_many(items: Sequence, config: RunConfig, jobs: int = 1) -> list[Decision]:
    """Classify masks or paths, optionally in worker processes; order is kept."""
    work = [(item, config) for item in items]
    if jobs <= 1 or len(work) < 2:
        return [_classify_star(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_classify_star, work, chunksize=max(1, len(work) // (4 * jobs))))


# -- calibration -------------------------------------------------------------

@dataclass
class Features:
    """Raw descriptor measurements of one mask, before any threshold."""

    ok: bool
    omega1: int = 0
    bal2: float = math.nan  # AB - AC
    bal3: float = math.nan  # PA - QA
    bal4: float = math.nan  # |BD - DC|
    flank: float = math.inf  # smallest present of d1, d2
    s_range: float = 1.0
    reason: str | None = None


def features_of(mask: BinaryMask, config: RunConfig) -> Features:
    try:
        a = analyze(mask, config)
    except OmegaError as exc:
        return Features(ok=False, reason=exc.code)
    d = a.distances
    flanks = [v for v in (d.d1, d.d2) if v is not None]
    return Features(
        ok=True, omega1=descriptor1(a.landmarks), bal2=d.AB - d.AC, bal3=d.PA - d.QA,
        bal4=abs(d.BD - d.DC), flank=min(flanks) if flanks else math.inf,
        s_range=a.pattern.s_range,
    )


def _features_star(args):
    return features_of(*args)


def _candidates(values: np.ndarray, limit: int, positive: bool) -> np.ndarray:
    """Thresholds between consecutive observed values plus one past each end."""
    v = np.unique(values[np.isfinite(values)])
    if len(v) == 0:
        return np.array([1.0])
    step = (v[-1] - v[0]) / (len(v) - 1) if len(v) > 1 else max(abs(v[0]) * 0.1, 1e-9)
    cands = np.concatenate([[v[0] - step], (v[:-1] + v[1:]) / 2, [v[-1] + step]])
    if positive:
        if cands[0] <= 0 and v[0] > 0:
            cands[0] = v[0] / 2
        cands = cands[cands > 0]
    if len(cands) > limit:
        keep = np.unique(np.round(np.linspace(0, len(cands) - 1, limit)).astype(int))
        cands = cands[keep]
    return cands


@dataclass
class CalibrationResult:
    thresholds: Thresholds
    k: float
    accuracy: float
    margin: float
    per_k: dict = field(default_factory=dict)


def _margin(values: np.ndarray, t: float) -> float:
    v = values[np.isfinite(values)]
    if len(v) == 0:
        return 0.0
    spread = v.max() - v.min()
    m = np.abs(v - t).min()
    return float(m / spread) if spread > 0 else float(m)


def calibrate_features(features: Sequence[Features], labels: Sequence[str],
                       base: Thresholds = Thresholds(), max_candidates: int = 24,
                       class_weighted: bool = False) -> tuple[Thresholds, float, float]:
    """Grid-search the four thresholds for the best accuracy on ``features``.

    Ties on accuracy go to the largest summed (spread-normalized) distance
    between each threshold and its nearest observed value, then to grid order.
    Returns ``(thresholds, accuracy, margin)``.
    """
    y = np.array([lab == HUMAN for lab in labels])
    if y.all() or not y.any():
        raise CalibrationError("calibration needs both HUMAN and NON_HUMAN examples")
    ok = np.array([f.ok for f in features])
    scale = np.array([f.s_range if (base.relative and f.ok and f.s_range > 0) else 1.0
                      for f in features])
    o1 = np.array([f.omega1 == 1 for f in features]) & ok

    def col(name, absolute):
        v = np.array([getattr(f, name) for f in features], dtype=float)
        v = np.abs(v) if absolute else v
        return np.where(ok, v / scale, np.nan)

    f2 = col("bal2", base.mode2 == "absolute")
    f3 = col("bal3", base.mode3 == "absolute")
    f4 = col("bal4", True)
    f5 = col("flank", False)

    dims = []
    for values, signed in ((f2, base.mode2 == "signed"), (f3, base.mode3 == "signed"),
                           (f4, False), (f5, False)):
        cands = _candidates(values, max_candidates, positive=not signed)
        with np.errstate(invalid="ignore"):
            if signed:
                passes = values[None, :] > cands[:, None]
            else:
                passes = values[None, :] < cands[:, None]
        passes &= ok[None, :]
        margins = np.array([_margin(values, t) for t in cands])
        dims.append((cands, passes, margins))

    # integer weights keep scores exact; normalized once at the end
    if class_weighted:
        w = np.where(y, (~y).sum(), y.sum()).astype(np.int64)
        total = 2 * int(y.sum()) * int((~y).sum())
    else:
        w = np.ones(len(y), dtype=np.int64)
        total = len(y)
    (c2, p2, m2), (c3, p3, m3), (c4, p4, m4), (c5, p5, m5) = dims
    inner = p3[:, None, None, :] & p4[None, :, None, :] & p5[None, None, :, :]
    inner_margin = m3[:, None, None] + m4[None, :, None] + m5[None, None, :]
    best = (-1.0, -1.0, None)
    for i2 in range(len(c2)):
        pred = inner & (p2[i2] & o1)[None, None, None, :]
        acc = ((pred == y) * w).sum(axis=-1)
        score = acc.max()
        if score < best[0]:
            continue
        tied = acc == score
        marg = np.where(tied, inner_margin + m2[i2], -np.inf)
        j = np.unravel_index(np.argmax(marg), marg.shape)
        if score > best[0] or marg[j] > best[1] + 1e-12:
            best = (float(score), float(marg[j]), (i2, *j))
    i2, i3, i4, i5 = best[2]
    th = replace(base, omega2_th=float(c2[i2]), omega3_th=float(c3[i3]),
                 omega4_th=float(c4[i4]), omega5_th=float(c5[i5]))
    return th, best[0] / total, best[1]


def calibrate(masks: Sequence[BinaryMask], labels: Sequence[str], config: RunConfig = RunConfig(),
              k_grid: Sequence[float] | None = None, max_candidates: int = 24,
              class_weighted: bool = False, jobs: int = 1) -> tuple[RunConfig, CalibrationResult]:
    """Choose thresholds (and optionally ``k``) maximizing training accuracy.

    Returns the calibrated config, with the training accuracy recorded under
    ``meta``, and the search summary.
    """
    if len(masks) != len(labels):
        raise ValueError("masks and labels differ in length")
    labs = set(labels)
    if not ({HUMAN, NON_HUMAN} <= labs):
        raise CalibrationError("calibration needs both HUMAN and NON_HUMAN examples")
    ks = list(k_grid) if k_grid else [config.omega.k]
    best: CalibrationResult | None = None
    per_k = {}
    for k in ks:
        cfg = replace(config, omega=replace(config.omega, k=float(k)))
        work = [(m, cfg) for m in masks]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                feats = list(pool.map(_features_star, work, chunksize=max(1, len(work) // (4 * jobs))))
        else:
            feats = [features_of(m, cfg) for m, _ in work]
        th, acc, margin = calibrate_features(feats, labels, config.thresholds, max_candidates,
                                             class_weighted)
        per_k[repr(float(k))] = acc
        if best is None or acc > best.accuracy + 1e-12 or (
                abs(acc - best.accuracy) <= 1e-12 and margin > best.margin + 1e-12):
            best = CalibrationResult(th, float(k), acc, margin)
    best.per_k = per_k
    meta = dict(config.meta)
    meta.update(training_accuracy=round(best.accuracy, 12), training_size=len(masks),
                k_grid=[float(k) for k in ks])
    out = replace(config, omega=replace(config.omega, k=best.k), thresholds=best.thresholds, meta=meta)
    return out, best


# -- evaluation --------------------------------------------------------------

def evaluate(decisions: Sequence[Decision], labels: Sequence[str],
             names: Sequence[str] | None = None) -> dict:
    """Confusion matrix, accuracy and descriptor firing rates.

    REJECTED counts as a non-human prediction when scoring accuracy.
    """
    if not decisions:
        raise ValueError("nothing to evaluate")
    classes = (HUMAN, NON_HUMAN)
    confusion = {a: {p: 0 for p in (HUMAN, NON_HUMAN, REJECTED)} for a in classes}
    firing = {a: {n: 0 for n in DESCRIPTOR_NAMES} for a in classes}
    described = {a: 0 for a in classes}
    rows = []
    correct = 0
    for i, (dec, lab) in enumerate(zip(decisions, labels)):
        confusion[lab][dec.label] += 1
        hit = (dec.label == HUMAN) == (lab == HUMAN)
        correct += hit
        if dec.descriptors is not None:
            described[lab] += 1
            for n, v in zip(DESCRIPTOR_NAMES, dec.descriptors.values()):
                firing[lab][n] += v
        row = {"index": i, "actual": lab, "predicted": dec.label, "correct": bool(hit)}
        if names is not None:
            row["name"] = names[i]
        if dec.descriptors is not None:
            row["descriptors"] = list(dec.descriptors.values())
        if dec.reject_reason:
            row["reject_reason"] = dec.reject_reason
        rows.append(row)
    rates = {a: {n: (firing[a][n] / described[a] if described[a] else None) for n in DESCRIPTOR_NAMES}
             for a in classes}
    return {
        "n": len(decisions),
        "counts": {a: sum(confusion[a].values()) for a in classes},
        "confusion": confusion,
        "accuracy": correct / len(decisions),
        "firing_rates": rates,
        "rows": rows,
    }


def confusion_csv(report: dict) -> str:
    cols = (HUMAN, NON_HUMAN, REJECTED)
    lines = ["actual," + ",".join(cols)]
    for actual, row in report["confusion"].items():
        lines.append(actual + "," + ",".join(str(row[c]) for c in cols))
    return "\n".join(lines) + "\n"
