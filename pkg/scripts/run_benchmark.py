#!/usr/bin/env python3
"""Run the full separation benchmark: sweep, selection, test evaluation.

Generates the synthetic dataset on first use, runs every algorithm family
over the default sigma/iteration grid on the validation split, picks the
best configuration per family, evaluates it on the test split, and writes
validation.csv, test.csv and selections.json.
"""

import argparse
import json
import time
from pathlib import Path

from specinv.experiment import SweepConfig, load_sweep_config, run_benchmark
from specinv.synth import generate_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", type=Path, default=Path("data"),
                        help="dataset directory (created if missing)")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory for CSVs and selections")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON sweep config; overrides --data/--out")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes")
    parser.add_argument("--seed", type=int, default=0, help="dataset seed")
    args = parser.parse_args()

    if args.config is not None:
        cfg = load_sweep_config(args.config)
    else:
        manifest = args.data / "manifest.json"
        if not manifest.exists():
            print(f"generating dataset under {args.data} ...")
            generate_dataset(args.data, seed=args.seed)
        cfg = SweepConfig(manifest=str(manifest), output_dir=str(args.out))
    if args.jobs is not None:
        cfg.jobs = args.jobs

    start = time.perf_counter()
    paths = run_benchmark(cfg)
    elapsed = time.perf_counter() - start

    selections = json.loads(paths["selections"].read_text())
    print(f"done in {elapsed:.1f}s")
    for name, sel in selections.items():
        print(f"  {name}: sigma={sel['sigma']} iterations={sel['iterations']}")
    for key in ("validation", "test", "selections"):
        print(f"  {key}: {paths[key]}")


if __name__ == "__main__":
    main()
