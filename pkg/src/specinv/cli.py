"""Command-line front door.

Thin adapters only: every numerical result comes from the library modules.
Exit codes: 0 success, 2 I/O error, 3 usage/validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import algorithms
from .algorithms import SIGMA_INF, AlgorithmSpec, Family
from .experiment import load_sweep_config, parse_sigma, run_benchmark
from .metrics import sdr
from .signal_io import make_mixture, read_spectrogram, read_wav, write_wav
from .spectral import StftConfig, TimeSignal, istft, stft

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 3

# Algorithm names accepted by --algo: families plus their named special cases.
ALGO_PRESETS = {
    "am": (Family.AM, None, None),
    "misi": (Family.MISI, None, None),
    "mix_incons": (Family.MIX_INCONS, None, None),
    "mixture_proj": (Family.MIX_INCONS, 0.0, 1),
    "stft_proj": (Family.MIX_INCONS, SIGMA_INF, 1),
    "mix_incons_hardmag": (Family.MIX_INCONS_HARDMAG, None, None),
    "pu_iter": (Family.MIX_INCONS_HARDMAG, 0.0, None),
    "griffin_lim": (Family.MIX_INCONS_HARDMAG, SIGMA_INF, None),
    "incons_hardmix": (Family.INCONS_HARDMIX, None, 1),
    "mag_incons_hardmix": (Family.MAG_INCONS_HARDMIX, None, None),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="specinv", description="Spectrogram inversion toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    mix = sub.add_parser("mix", help="mix clean speech with noise at a target iSNR")
    mix.add_argument("--clean", required=True)
    mix.add_argument("--noise", required=True)
    mix.add_argument("--isnr", type=float, required=True)
    mix.add_argument("--seed", type=int, default=0)
    mix.add_argument("--out", required=True)

    sep = sub.add_parser("separate", help="run a spectrogram-inversion algorithm")
    sep.add_argument("--mixture", required=True)
    sep.add_argument("--mags", nargs="+", required=True, help="SPGM magnitude files, one per source")
    sep.add_argument("--algo", required=True)
    sep.add_argument("--sigma", default="0")
    sep.add_argument("--iters", type=int, default=20)
    sep.add_argument("--weights", choices=["uniform", "magratio"], default="magratio")
    sep.add_argument("--window", type=int, default=1024)
    sep.add_argument("--hop", type=int, default=256)
    sep.add_argument("--out", required=True)

    ev = sub.add_parser("evaluate", help="print the SDR between two WAV files")
    ev.add_argument("--ref", required=True)
    ev.add_argument("--est", required=True)

    bench = sub.add_parser("benchmark", help="run the sweep + test protocol")
    bench.add_argument("--config", required=True)
    bench.add_argument("--jobs", type=int, default=None)
    return parser


def cmd_mix(args) -> int:
    clean = read_wav(args.clean)
    noise = read_wav(args.noise)
    result = make_mixture(clean, noise, args.isnr, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_wav(out / "mixture.wav", result.mixture)
    write_wav(out / "scaled_noise.wav", result.scaled_noise)
    sidecar = {
        "gain": result.gain,
        "offset": result.offset,
        "isnr_target_db": args.isnr,
        "isnr_achieved_db": result.achieved_isnr_db,
        "seed": args.seed,
    }
    (out / "mix.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


def _resolve_algo(name: str, sigma_arg: str, iters: int):
    if name not in ALGO_PRESETS:
        valid = ", ".join(sorted(ALGO_PRESETS))
        raise UsageError(f"unknown algorithm {name!r}; valid names: {valid}")
    family, fixed_sigma, fixed_iters = ALGO_PRESETS[name]
    sigma = fixed_sigma if fixed_sigma is not None else parse_sigma(sigma_arg)
    iterations = fixed_iters if fixed_iters is not None else iters
    return family, sigma, iterations


def cmd_separate(args) -> int:
    mixture = read_wav(args.mixture)
    cfg = StftConfig(window_length=args.window, hop=args.hop, sample_rate=mixture.sample_rate)
    mags = np.stack([np.asarray(read_spectrogram(p), dtype=np.float64) for p in args.mags])
    mixture_spec = stft(mixture.samples, cfg)
    if mags.shape[1:] != mixture_spec.shape:
        raise ValueError(
            f"shape mismatch: magnitudes {mags.shape[1:]} vs mixture STFT {mixture_spec.shape}"
        )
    family, sigma, iterations = _resolve_algo(args.algo, args.sigma, args.iters)
    spec = AlgorithmSpec(
        family=family,
        sigma=sigma,
        weight_scheme=args.weights,
        iterations=iterations,
        max_iterations=max(iterations, 20),
    )
    trace = algorithms.run(spec, mixture_spec, mags, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for j, est in enumerate(trace.estimates, start=1):
        samples = istft(est, cfg, len(mixture))
        write_wav(out / f"est_{j}.wav", TimeSignal(samples, mixture.sample_rate))
    lines = ["iteration,h,i,m"]
    for k in range(len(trace.mixing)):
        lines.append(
            f"{k},{trace.mixing[k]:.12e},{trace.inconsistency[k]:.12e},{trace.magnitude[k]:.12e}"
        )
    (out / "trace.csv").write_text("\n".join(lines) + "\n")
    for note in trace.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ref = read_wav(args.ref)
    est = read_wav(args.est)
    print(f"{sdr(ref.samples, est.samples):.4f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = load_sweep_config(args.config)
    if args.jobs is not None:
        cfg.jobs = args.jobs
    paths = run_benchmark(cfg)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return EXIT_OK


_COMMANDS = {
    "mix": cmd_mix,
    "separate": cmd_separate,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
