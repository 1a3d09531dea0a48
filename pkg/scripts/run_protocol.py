#!/usr/bin/env python3
"""Calibrate on one synthetic corpus, evaluate on a disjoint one, print a summary.

Example:
    python3 scripts/run_protocol.py --train-seed 1 --test-seed 2 --out-dir /tmp/omega_run
"""

import argparse
import json
import os
import sys
import time

from omega_detect import classifier as clf
from omega_detect import synth
from omega_detect.config import load_config


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--train-seed", type=int, default=1)
    p.add_argument("--test-seed", type=int, default=2)
    p.add_argument("--humans", type=int, default=100)
    p.add_argument("--nonhumans", type=int, default=25)
    p.add_argument("--k-grid", help="comma-separated K values to search as well")
    p.add_argument("--config", help="starting configuration JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", help="write calibrated config and evaluation report here")
    args = p.parse_args(argv)
    if args.train_seed == args.test_seed:
        p.error("train and test seeds must differ")

    start = time.perf_counter()
    base = load_config(args.config)
    train = synth.generate_corpus(args.humans, args.nonhumans, args.train_seed)
    test = synth.generate_corpus(args.humans, args.nonhumans, args.test_seed)
    k_grid = [float(v) for v in args.k_grid.split(",")] if args.k_grid else None
    config, result = clf.calibrate([i.mask for i in train], [i.label for i in train], base,
                                   k_grid=k_grid, jobs=args.jobs)
    decisions = clf.classify_many([i.mask for i in test], config, args.jobs)
    names = [f"{i:04d}_{item.spec.kind}" for i, item in enumerate(test)]
    report = clf.evaluate(decisions, [i.label for i in test], names)
    elapsed = time.perf_counter() - start

    th = config.thresholds
    print(f"k={config.omega.k:g} u={config.omega.u} thresholds "
          f"({th.omega2_th:.4f}, {th.omega3_th:.4f}, {th.omega4_th:.4f}, {th.omega5_th:.4f})")
    print(f"training accuracy {result.accuracy:.3f} on seed {args.train_seed}")
    print(f"held-out accuracy {report['accuracy']:.3f} on seed {args.test_seed}")
    for actual, row in report["confusion"].items():
        print(f"  {actual:9s} " + "  ".join(f"{k}={v}" for k, v in row.items()))
    wrong = [r["name"] for r in report["rows"] if not r["correct"]]
    if wrong:
        print("misclassified: " + ", ".join(wrong))
    print(f"{elapsed:.1f}s")

    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "calibrated.json"), "w") as fh:
            fh.write(config.to_json())
        with open(os.path.join(args.out_dir, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
