"""Seeded benchmark batches: every planner on the same workspaces, averaged per metric.

Each run derives its own seed from the master seed and the run id, so a batch
is reproducible and runs can execute in any order (or in parallel) without
changing the report.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Sequence

from .exceptions import ConfigError, PlanningError
from .objectives import PathMetrics
from .planners import ALGORITHMS, PlannerConfig, plan
from .validation import check_positive_int
from .workspace import _sub_seed, generate_random_workspace, load_terrain

log = logging.getLogger(__name__)

DEFAULT_ALGORITHMS = ("astar", "dstar", "dstar_po")
CSV_HEADER = (
    "algorithm", "length_m", "elevation", "solar_deviation", "risk_proximity",
    "compute_time_s", "runs_ok", "runs_failed",
)
PER_RUN_HEADER = (
    "run_id", "seed", "algorithm", "length_m", "elevation", "solar_deviation",
    "risk_proximity", "compute_time_s", "expansions",
)
TERRAIN_SUFFIXES = (".csv", ".pgm")


@dataclass(frozen=True)
class BenchmarkConfig:
    runs: int = 100
    grid_size: int = 100
    coverage: float = 0.23
    master_seed: int = 0
    algorithms: tuple = DEFAULT_ALGORITHMS
    terrain_source: str = "synthetic"
    planner_options: dict = field(default_factory=dict)
    start: tuple | None = None  # default: lower-left corner
    goal: tuple | None = None  # default: upper-right corner

    def __post_init__(self):
        check_positive_int(self.runs, "runs")
        check_positive_int(self.grid_size, "grid_size")
        if not 0 <= self.coverage < 0.6:
            raise ConfigError(f"coverage must lie in [0, 0.6), got {self.coverage}")
        algos = tuple(a.replace("-", "_") for a in self.algorithms)
        if not algos:
            raise ConfigError("at least one algorithm is required")
        for a in algos:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        object.__setattr__(self, "algorithms", algos)
        if self.terrain_source != "synthetic" and not FsPath(self.terrain_source).is_dir():
            raise ConfigError(f"terrain source must be 'synthetic' or a directory, got {self.terrain_source!r}")

    def run_seed(self, run_id: int) -> int:
        return _sub_seed(self.master_seed, run_id)


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    seed: int
    algorithm: str
    metrics: PathMetrics


@dataclass(frozen=True)
class Failure:
    run_id: int
    algorithm: str
    error: str


@dataclass(frozen=True)
class AggregateRow:
    algorithm: str
    length: float
    elevation: float
    solar_deviation: float
    risk_proximity: float
    compute_time: float
    runs_ok: int
    runs_failed: int


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    per_run: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def aggregate(self) -> list[AggregateRow]:
        """Means over successful runs, one row per algorithm in config order."""
        rows = []
        for algo in self.config.algorithms:
            ms = [r.metrics for r in self.per_run if r.algorithm == algo]
            failed = sum(1 for f in self.failures if f.algorithm == algo)
            rows.append(AggregateRow(
                algo,
                _mean([m.length for m in ms]),
                _mean([m.mean_elevation for m in ms]),
                _mean([m.solar_deviation for m in ms]),
                _mean([m.risk_proximity for m in ms]),
                _mean([m.compute_time for m in ms]),
                len(ms),
                failed,
            ))
        return rows

    def row(self, algorithm: str) -> AggregateRow:
        algorithm = algorithm.replace("-", "_")
        for r in self.aggregate:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)


def _mean(values) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def _terrain_files(directory) -> list:
    files = sorted(p for p in FsPath(directory).iterdir() if p.suffix.lower() in TERRAIN_SUFFIXES)
    if not files:
        raise ConfigError(f"no .csv or .pgm heightmaps in {directory}")
    return files


def _one_run(config: BenchmarkConfig, run_id: int):
    seed = config.run_seed(run_id)
    size = config.grid_size
    records, failures = [], []
    try:
        elevation = None
        if config.terrain_source != "synthetic":
            files = _terrain_files(config.terrain_source)
            elevation = load_terrain(files[run_id % len(files)], shape=(size, size))
        ws = generate_random_workspace(seed, size, size, config.coverage, elevation=elevation,
                                       start=config.start, goal=config.goal)
    except PlanningError as exc:
        return records, [Failure(run_id, algo, f"{type(exc).__name__}: {exc}") for algo in config.algorithms]
    for algo in config.algorithms:
        try:
            _, metrics, _ = plan(ws, PlannerConfig(algorithm=algo, **config.planner_options))
        except PlanningError as exc:
            failures.append(Failure(run_id, algo, f"{type(exc).__name__}: {exc}"))
            continue
        records.append(RunRecord(run_id, seed, algo, metrics))
    log.debug("run %d (seed %d) done", run_id, seed)
    return records, failures


def run_batch(config: BenchmarkConfig, workers: int = 1, run_ids: Sequence[int] | None = None) -> BenchmarkReport:
    """Generate one workspace per run and plan it with every configured algorithm.

    ``run_ids`` overrides the order runs execute in; the report is assembled
    by run id either way.
    """
    ids = list(range(config.runs)) if run_ids is None else list(run_ids)
    if sorted(ids) != list(range(config.runs)):
        raise ConfigError("run_ids must be a permutation of range(runs)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(zip(ids, pool.map(_one_run, [config] * len(ids), ids)))
    else:
        results = {i: _one_run(config, i) for i in ids}
    report = BenchmarkReport(config)
    for i in range(config.runs):
        records, failures = results[i]
        report.per_run.extend(records)
        report.failures.extend(failures)
    return report


def _fmt(x: float) -> str:
    return repr(float(x))


def render_report(report: BenchmarkReport, fmt: str = "csv", *, per_run: bool = False,
                  timing: bool = True) -> str:
    """Aggregate table as CSV or markdown, optionally followed by per-run rows and failures.

    With ``timing=False`` the wall-clock columns are blanked, which leaves a
    report that is byte-identical across repeated batches.
    """
    if not report.per_run and not report.failures:
        raise ConfigError("cannot render an empty report")
    if fmt == "csv":
        return _render_csv(report, per_run, timing)
    if fmt in ("markdown", "md"):
        return _render_markdown(report, per_run, timing)
    raise ConfigError(f"unknown report format {fmt!r}; expected csv or markdown")


def _render_csv(report, per_run, timing) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for r in report.aggregate:
        out.writerow([r.algorithm, _fmt(r.length), _fmt(r.elevation), _fmt(r.solar_deviation),
                      _fmt(r.risk_proximity), _fmt(r.compute_time) if timing else "", r.runs_ok, r.runs_failed])
    if per_run:
        buf.write("\n")
        out.writerow(PER_RUN_HEADER)
        for rec in report.per_run:
            m = rec.metrics
            out.writerow([rec.run_id, rec.seed, rec.algorithm, _fmt(m.length), _fmt(m.mean_elevation),
                          _fmt(m.solar_deviation), _fmt(m.risk_proximity),
                          _fmt(m.compute_time) if timing else "", m.expansions])
    if report.failures:
        buf.write("\n")
        out.writerow(("run_id", "algorithm", "error"))
        for f in report.failures:
            out.writerow([f.run_id, f.algorithm, f.error])
    return buf.getvalue()


def _render_markdown(report, per_run, timing) -> str:
    lines = [
        "| Algorithm | Length (m) | Elevation [0:1] | Solar Deviation | Risk Proximity | Computation Time (s) | Runs |",
        "|---|---|---|---|---|---|---|",
    ]
    for r in report.aggregate:
        t = f"{r.compute_time:.3f}" if timing else ""
        lines.append(f"| {r.algorithm} | {r.length:.2f} | {r.elevation:.4f} | {r.solar_deviation:.4f} "
                     f"| {r.risk_proximity:.6f} | {t} | {r.runs_ok}/{r.runs_ok + r.runs_failed} |")
    if per_run:
        lines += ["", "| Run | Seed | Algorithm | Length (m) | Elevation | Solar | Risk | Expansions |",
                  "|---|---|---|---|---|---|---|---|"]
        for rec in report.per_run:
            m = rec.metrics
            lines.append(f"| {rec.run_id} | {rec.seed} | {rec.algorithm} | {m.length:.2f} | {m.mean_elevation:.4f} "
                         f"| {m.solar_deviation:.4f} | {m.risk_proximity:.6f} | {m.expansions} |")
    if report.failures:
        lines += ["", "Failures:", ""]
        lines += [f"- run {f.run_id}, {f.algorithm}: {f.error}" for f in report.failures]
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list[dict]:
    """Aggregate rows of a CSV report as dicts of strings."""
    block = text.split("\n\n", 1)[0]
    return list(csv.DictReader(io.StringIO(block)))
