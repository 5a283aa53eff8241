"""Benchmark harness: sigma/iteration sweeps, selection, test evaluation.

A sweep runs every algorithm configuration on every manifest item, computes
the speech SDR at each recorded iterate, and collects one record per
(configuration, item).  Selection picks the configuration with the best
mean validation SDR; ties go to fewer iterations, then smaller sigma.
Records are keyed and sorted before CSV emission so results are identical
regardless of worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algorithms
from .algorithms import SIGMA_INF, AlgorithmSpec, Family
from .metrics import sdr
from .signal_io import (
    degrade_magnitudes,
    load_manifest,
    make_mixture,
    oracle_magnitudes,
    read_wav,
)
from .spectral import istft, stft

CSV_HEADER = "algorithm,sigma,iterations,isnr_db,degradation,split,item_id,sdr_db,wall_ms"

DEFAULT_SIGMA_GRID = [0.0, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0, SIGMA_INF]
DEFAULT_FAMILIES = [f.value for f in Family]
DEFAULT_DEGRADATION_LEVELS = [0.0, 0.2, 0.5]


def format_sigma(sigma: float) -> str:
    return "inf" if sigma == SIGMA_INF else f"{sigma:g}"


def parse_sigma(text: str) -> float:
    if str(text).strip().lower() == "inf":
        return SIGMA_INF
    value = float(text)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"invalid sigma: {text}")
    return value


@dataclass
class SweepConfig:
    manifest: str
    output_dir: str
    families: list[str] = field(default_factory=lambda: list(DEFAULT_FAMILIES))
    sigma_grid: list[float] = field(default_factory=lambda: list(DEFAULT_SIGMA_GRID))
    max_iterations: int = 20
    weight_scheme: str = "magratio"
    degradation_levels: list[float] = field(default_factory=lambda: list(DEFAULT_DEGRADATION_LEVELS))
    jobs: int | None = None
    record_timing: bool = True

    def __post_init__(self):
        if not self.families or not self.sigma_grid or not self.degradation_levels:
            raise ValueError("families, sigma_grid and degradation_levels must be non-empty")
        if self.max_iterations < 1:
            raise ValueError("iteration cap must be >= 1")
        self.families = [Family(f).value for f in self.families]


def load_sweep_config(path) -> SweepConfig:
    doc = json.loads(Path(path).read_text())
    if "sigma_grid" in doc:
        doc["sigma_grid"] = [parse_sigma(s) for s in doc["sigma_grid"]]
    base = Path(path).parent
    cfg = SweepConfig(**doc)
    # Paths in the config file are relative to the file itself.
    if not Path(cfg.manifest).is_absolute():
        cfg.manifest = str(base / cfg.manifest)
    if not Path(cfg.output_dir).is_absolute():
        cfg.output_dir = str(base / cfg.output_dir)
    return cfg


@dataclass(frozen=True)
class ItemRecord:
    algorithm: str
    sigma: float
    iterations: int
    isnr_db: float
    degradation: float
    split: str
    item_id: str
    sdr_db: float
    wall_ms: float

    def sort_key(self):
        return (
            self.algorithm,
            self.sigma,
            self.iterations,
            self.isnr_db,
            self.degradation,
            self.split,
            self.item_id,
        )

    def csv_line(self) -> str:
        return ",".join(
            [
                self.algorithm,
                format_sigma(self.sigma),
                str(self.iterations),
                f"{self.isnr_db:g}",
                f"{self.degradation:g}",
                self.split,
                self.item_id,
                f"{self.sdr_db:.6f}",
                f"{self.wall_ms:.3f}",
            ]
        )


class ResultTable:
    """Flat list of per-item records with aggregation helpers."""

    def __init__(self, records: list[ItemRecord]):
        self.records = sorted(records, key=ItemRecord.sort_key)

    def configurations(self, algorithm: str | None = None, split: str | None = None):
        """Group records by (algorithm, sigma, iterations); returns dict -> records."""
        groups: dict[tuple, list[ItemRecord]] = {}
        for rec in self.records:
            if algorithm is not None and rec.algorithm != algorithm:
                continue
            if split is not None and rec.split != split:
                continue
            groups.setdefault((rec.algorithm, rec.sigma, rec.iterations), []).append(rec)
        return groups

    def mean_sdr(self, **filters) -> float:
        values = [
            r.sdr_db
            for r in self.records
            if all(getattr(r, k) == v for k, v in filters.items())
        ]
        if not values:
            raise ValueError(f"no records match {filters}")
        return float(np.mean(values))

    def write_csv(self, path) -> None:
        lines = [CSV_HEADER] + [r.csv_line() for r in self.records]
        Path(path).write_text("\n".join(lines) + "\n")

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class _AlgoJob:
    """One algorithm configuration plus which iterates to record."""

    algorithm: str  # name used in result rows
    family: Family
    sigma: float
    iterations: int
    record_iters: tuple[int, ...]


def _sweep_jobs(cfg: SweepConfig) -> list[_AlgoJob]:
    jobs = []
    every = tuple(range(1, cfg.max_iterations + 1))
    for name in cfg.families:
        family = Family(name)
        if family is Family.AM:
            jobs.append(_AlgoJob(name, family, 0.0, 0, (0,)))
        elif family is Family.MISI:
            jobs.append(_AlgoJob(name, family, 0.0, cfg.max_iterations, every))
        elif family is Family.INCONS_HARDMIX:
            jobs.append(_AlgoJob(name, family, 0.0, 1, (1,)))
        else:
            for sigma in cfg.sigma_grid:
                jobs.append(_AlgoJob(name, family, sigma, cfg.max_iterations, every))
    return jobs


@dataclass(frozen=True)
class _ItemTask:
    clean_path: str
    noise_path: str
    isnr_db: float
    seed: int
    split: str
    item_id: str
    level: int  # index into degradation_levels
    cfg: SweepConfig
    jobs: tuple[_AlgoJob, ...]


def _degradation_seed(item_seed: int, level: float) -> tuple[int, int]:
    return (item_seed, int(round(level * 1e6)))


def _process_item(task: _ItemTask) -> list[ItemRecord]:
    cfg = task.cfg
    level = cfg.degradation_levels[task.level]
    clean = read_wav(task.clean_path)
    noise = read_wav(task.noise_path)
    mix = make_mixture(clean, noise, task.isnr_db, task.seed)
    stft_cfg = load_manifest(Path(cfg.manifest)).stft_config()
    mixture_spec = stft(mix.mixture.samples, stft_cfg)
    mags = oracle_magnitudes([clean, mix.scaled_noise], stft_cfg)
    mags = degrade_magnitudes(mags, level, _degradation_seed(task.seed, level))

    records = []
    for job in task.jobs:
        spec = AlgorithmSpec(
            family=job.family,
            sigma=job.sigma,
            weight_scheme=cfg.weight_scheme,
            iterations=job.iterations,
            max_iterations=max(job.iterations, cfg.max_iterations),
        )
        wanted = set(job.record_iters)
        start = time.perf_counter()
        per_iter: dict[int, tuple[float, float]] = {}

        def observe(k, sources):
            if k in wanted:
                est = istft(sources[0], stft_cfg, len(clean))
                value = sdr(clean.samples, est)
                elapsed = (time.perf_counter() - start) * 1e3 if cfg.record_timing else 0.0
                per_iter[k] = (value, elapsed)

        algorithms.run(spec, mixture_spec, mags, stft_cfg, on_iterate=observe, record_losses=False)
        for k in sorted(wanted):
            value, elapsed = per_iter[k]
            records.append(
                ItemRecord(
                    algorithm=job.algorithm,
                    sigma=job.sigma,
                    iterations=k,
                    isnr_db=task.isnr_db,
                    degradation=level,
                    split=task.split,
                    item_id=task.item_id,
                    sdr_db=value,
                    wall_ms=elapsed,
                )
            )
    return records


def _process_item_safe(task: _ItemTask):
    try:
        return _process_item(task), None
    except (OSError, ValueError) as exc:
        return [], f"{task.item_id}: {exc}"


def _run_tasks(tasks: list[_ItemTask], jobs: int | None) -> ResultTable:
    records: list[ItemRecord] = []
    failures: list[str] = []
    if jobs is not None and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_item_safe, tasks))
    else:
        results = [_process_item_safe(task) for task in tasks]
    for result, error in results:
        if error is not None:
            failures.append(error)
        else:
            records.extend(result)
    if failures and not records:
        raise RuntimeError(f"all items failed: {failures}")
    return ResultTable(records)


def _build_tasks(cfg: SweepConfig, split: str, algo_jobs: list[_AlgoJob]) -> list[_ItemTask]:
    manifest = load_manifest(cfg.manifest)
    tasks = []
    for item in manifest.split_items(split):
        for level_idx in range(len(cfg.degradation_levels)):
            tasks.append(
                _ItemTask(
                    clean_path=str(manifest.resolve(item.clean_path)),
                    noise_path=str(manifest.resolve(item.noise_path)),
                    isnr_db=item.isnr_db,
                    seed=item.seed,
                    split=item.split,
                    item_id=item.clean_path.rsplit(".", 1)[0],
                    level=level_idx,
                    cfg=cfg,
                    jobs=tuple(algo_jobs),
                )
            )
    return tasks


def run_sweep(cfg: SweepConfig, split: str = "validation") -> ResultTable:
    """Run the full configuration grid on one split of the manifest."""
    tasks = _build_tasks(cfg, split, _sweep_jobs(cfg))
    if not tasks:
        raise ValueError(f"manifest has no items in split {split!r}")
    return _run_tasks(tasks, cfg.jobs)


def select_best(table: ResultTable, algorithm: str) -> tuple[float, int]:
    """Best (sigma, iterations) by mean validation SDR, pooled over items.

    Ties are broken by fewer iterations, then smaller sigma.
    """
    groups = table.configurations(algorithm=algorithm)
    if not groups:
        raise ValueError(f"no records for algorithm {algorithm!r}")
    candidates = [
        (float(np.mean([r.sdr_db for r in recs])), sigma, iters)
        for (_, sigma, iters), recs in groups.items()
    ]
    candidates.sort(key=lambda c: (-c[0], c[2], c[1]))
    _, sigma, iters = candidates[0]
    return sigma, iters


def evaluate_test(selections: dict[str, tuple[float, int]], cfg: SweepConfig) -> ResultTable:
    """Run each algorithm at its selected configuration on the test split."""
    jobs = []
    for name in cfg.families:
        if name not in selections:
            raise ValueError(f"no selection for algorithm {name!r}")
        sigma, iters = selections[name]
        jobs.append(_AlgoJob(name, Family(name), sigma, iters, (iters,)))
    tasks = _build_tasks(cfg, "test", jobs)
    if not tasks:
        raise ValueError("manifest has no test items")
    return _run_tasks(tasks, cfg.jobs)


def run_benchmark(cfg: SweepConfig) -> dict[str, Path]:
    """Full protocol: validation sweep, selection, test evaluation, CSVs."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    validation = run_sweep(cfg, split="validation")
    selections = {name: select_best(validation, name) for name in cfg.families}
    test = evaluate_test(selections, cfg)
    paths = {
        "validation": out_dir / "validation.csv",
        "test": out_dir / "test.csv",
        "selections": out_dir / "selections.json",
    }
    validation.write_csv(paths["validation"])
    test.write_csv(paths["test"])
    paths["selections"].write_text(
        json.dumps(
            {
                name: {"sigma": format_sigma(sigma), "iterations": iters}
                for name, (sigma, iters) in sorted(selections.items())
            },
            indent=2,
        )
        + "\n"
    )
    return paths
