"""Command-line front end: classify, evaluate, calibrate, pattern, synth.

Exit codes:

====  ==========================================
0     HUMAN (classify) / success
1     NON_HUMAN
2     REJECTED (classify, pattern)
3     usage error, bad config, missing input file
4     calibration failed
5     output cannot be written
6     invalid synthetic shape spec
====  ==========================================

stdout carries only JSON, CSV or paths; logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import classifier as clf
from . import landmarks as lmk
from . import synth
from .config import RunConfig, load_config
from .errors import CalibrationError, ConfigError, OmegaError, SpecError
from .segmentation import load_mask

EXIT_HUMAN, EXIT_NON_HUMAN, EXIT_REJECTED = 0, 1, 2
EXIT_USAGE, EXIT_CALIBRATION, EXIT_OUTPUT, EXIT_SPEC = 3, 4, 5, 6
LABEL_EXIT = {clf.HUMAN: EXIT_HUMAN, clf.NON_HUMAN: EXIT_NON_HUMAN, clf.REJECTED: EXIT_REJECTED}

log = logging.getLogger("omega_detect")


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as REJECTED
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="JSON run configuration")
    parser.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                        default=d, help="override a config value (dotted key), repeatable")
    parser.add_argument("--jobs", type=int, default=d if suppress else os.cpu_count() or 1,
                        help="worker processes for batch commands (default: CPU count)")
    parser.add_argument("--quiet", action="store_true", default=d if suppress else False,
                        help="only log warnings and errors")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="omega-detect", description="Omega-shape human silhouette classifier.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="classify one mask and print the decision JSON")
    c.add_argument("mask")

    e = sub.add_parser("evaluate", help="classify every manifest row and report accuracy")
    e.add_argument("manifest")
    e.add_argument("--out", help="write the report JSON here instead of stdout")
    e.add_argument("--confusion-csv", help="also write the confusion matrix as CSV")

    k = sub.add_parser("calibrate", help="fit descriptor thresholds on a labelled manifest")
    k.add_argument("manifest")
    k.add_argument("--out", help="write the config JSON here instead of stdout")
    k.add_argument("--k-grid", help="comma-separated K values to search as well")
    k.add_argument("--max-candidates", type=int, default=24,
                   help="threshold candidates per descriptor (default 24)")
    k.add_argument("--class-weighted", action="store_true",
                   help="balance the two classes in the accuracy objective")

    t = sub.add_parser("pattern", help="export the landmark-annotated S-pattern of a mask")
    t.add_argument("mask")
    t.add_argument("--out", required=True, help="pattern CSV path")
    t.add_argument("--svg", help="optional SVG plot path")

    s = sub.add_parser("synth", help="generate synthetic masks plus a manifest")
    s.add_argument("--kind", default="omega_human", help=f"one of {', '.join(synth.KINDS)}")
    s.add_argument("--s0", type=float, default=5.0)
    s.add_argument("--k", type=float, default=3.0)
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--width", type=int, default=160)
    s.add_argument("--height", type=int, default=120)
    s.add_argument("--corpus", nargs=2, type=int, metavar=("N_HUMAN", "N_NONHUMAN"),
                   help="generate a randomized corpus instead of a single mask")
    s.add_argument("--out-dir", default=".", help="output directory (default: current)")

    for sp in (c, e, k, t, s):
        _global_flags(sp, suppress=True)
    return p


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _emit(text: str, path: str | None) -> None:
    if path:
        _write_text(path, text)
    else:
        sys.stdout.write(text)


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")


def _manifest(path: str) -> tuple[list[str], list[str]]:
    """Resolved mask paths and labels; paths are relative to the manifest."""
    _require_file(path)
    try:
        rows = synth.read_manifest(path)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad manifest {path}: {exc}") from exc
    if not rows:
        raise UsageError(f"manifest {path} has no rows")
    base = os.path.dirname(os.path.abspath(path))
    paths = [os.path.join(base, r["filename"]) for r in rows]
    labels = [r["label"] for r in rows]
    bad = sorted(set(labels) - {clf.HUMAN, clf.NON_HUMAN})
    if bad:
        raise UsageError(f"manifest {path} has unknown labels: {', '.join(bad)}")
    return paths, labels


def cmd_classify(args, config: RunConfig) -> int:
    _require_file(args.mask)
    decision = clf.classify_path(args.mask, config)
    sys.stdout.write(decision.to_json())
    log.info("%s: %s", args.mask, decision.label)
    return LABEL_EXIT[decision.label]


def cmd_evaluate(args, config: RunConfig) -> int:
    paths, labels = _manifest(args.manifest)
    decisions = clf.classify_many(paths, config, args.jobs)
    names = [os.path.basename(p) for p in paths]
    report = clf.evaluate(decisions, labels, names)
    log.info("accuracy %.4f over %d masks", report["accuracy"], report["n"])
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    if args.confusion_csv:
        _write_text(args.confusion_csv, clf.confusion_csv(report))
    return 0


def cmd_calibrate(args, config: RunConfig) -> int:
    paths, labels = _manifest(args.manifest)
    k_grid = None
    if args.k_grid:
        try:
            k_grid = [float(v) for v in args.k_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --k-grid: {args.k_grid}") from exc
    masks, kept = [], []
    for path, label in zip(paths, labels):
        try:
            masks.append(load_mask(path, config.gray_threshold))
            kept.append(label)
        except OmegaError as exc:
            log.warning("skipping %s: %s", path, exc)
    cal, result = clf.calibrate(masks, kept, config, k_grid, args.max_candidates,
                                args.class_weighted, args.jobs)
    log.info("training accuracy %.4f (k=%g)", result.accuracy, result.k)
    _emit(cal.to_json(), args.out)
    return 0


def cmd_pattern(args, config: RunConfig) -> int:
    _require_file(args.mask)
    try:
        analysis = clf.analyze(load_mask(args.mask, config.gray_threshold), config)
    except OmegaError as exc:
        sys.stdout.write(clf.Decision(clf.REJECTED, reject_reason=exc.code).to_json())
        log.error("%s: %s", args.mask, exc)
        return EXIT_REJECTED
    try:
        lmk.export_pattern(analysis.pattern, analysis.landmarks, args.out, args.svg)
    except OSError as exc:
        raise OutputError(f"cannot write pattern: {exc}") from exc
    sys.stdout.write(args.out + "\n")
    return 0


def cmd_synth(args, config: RunConfig) -> int:
    try:
        os.makedirs(args.out_dir, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {args.out_dir}: {exc}") from exc
    if args.corpus:
        items = synth.generate_corpus(args.corpus[0], args.corpus[1], args.seed,
                                      args.width, args.height)
    else:
        spec = synth.ShapeSpec(kind=args.kind, s0=args.s0, k=args.k, width=args.width,
                               height=args.height, jitter=args.jitter, seed=args.seed)
        items = [synth.generate(spec)]
    try:
        path = synth.write_corpus(items, args.out_dir)
    except OSError as exc:
        raise OutputError(f"cannot write masks: {exc}") from exc
    log.info("wrote %d masks", len(items))
    sys.stdout.write(path + "\n")
    return 0


COMMANDS = {"classify": cmd_classify, "evaluate": cmd_evaluate, "calibrate": cmd_calibrate,
            "pattern": cmd_pattern, "synth": cmd_synth}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if args.config is not None:
            _require_file(args.config)
        config = load_config(args.config, args.overrides or [])
        return COMMANDS[args.command](args, config)
    except (UsageError, ConfigError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except CalibrationError as exc:
        log.error("%s", exc)
        return EXIT_CALIBRATION
    except OutputError as exc:
        log.error("%s", exc)
        return EXIT_OUTPUT
    except SpecError as exc:
        log.error("%s", exc)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
