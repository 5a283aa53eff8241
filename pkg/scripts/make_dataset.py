#!/usr/bin/env python3
"""Generate the bundled synthetic two-source dataset (WAVs + manifest)."""

import argparse
from pathlib import Path

from specinv.synth import generate_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path, help="directory for WAVs and manifest.json")
    parser.add_argument("--validation", type=int, default=10, help="validation items")
    parser.add_argument("--test", type=int, default=10, help="test items")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--duration", type=float, default=4.0, help="clean clip seconds")
    parser.add_argument("--noise-duration", type=float, default=5.0)
    parser.add_argument("--sample-rate", type=int, default=16000)
    parser.add_argument("--isnr", type=float, default=0.0, help="target input SNR in dB")
    args = parser.parse_args()

    manifest = generate_dataset(
        args.out_dir,
        n_validation=args.validation,
        n_test=args.test,
        seed=args.seed,
        duration=args.duration,
        noise_duration=args.noise_duration,
        sample_rate=args.sample_rate,
        isnr_db=args.isnr,
    )
    print(f"wrote {manifest}")


if __name__ == "__main__":
    main()
