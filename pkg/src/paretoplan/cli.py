"""``paretoplan`` command line: generate, plan, bench and render.

Exit codes: 0 success, 2 usage error, 3 I/O or generation failure, 4 no path
(or the search ran out of budget).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path as FsPath

from . import bench, render
from .exceptions import BudgetExceededError, GenerationError, IngestionError, NoPathError, PlanningError
from .pareto import PrioritySelector
from .planners import ALGORITHMS, DEFAULT_WEIGHTS, PlannerConfig, plan
from .workspace import generate_random_workspace, load_terrain, load_workspace, save_workspace

log = logging.getLogger("paretoplan")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NO_PATH = 0, 2, 3, 4
ALGO_CHOICES = tuple(a.replace("_", "-") for a in ALGORITHMS)
METRIC_COLUMNS = ("length_m", "elevation", "solar_deviation", "risk_proximity", "compute_time_s")


def _coverage(text: str) -> float:
    value = float(text)
    if not 0 <= value < 0.6:
        raise argparse.ArgumentTypeError(f"coverage must lie in [0, 0.6), got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _weights(text: str) -> tuple:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("weights take five comma-separated numbers (g,h,e,s,r)")
    return tuple(parts)


def _cell(text: str) -> tuple:
    try:
        row, col = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL, got {text!r}") from None
    return row, col


def _algos(text: str) -> tuple:
    algos = tuple(a.strip() for a in text.split(",") if a.strip())
    bad = [a for a in algos if a not in ALGO_CHOICES and a not in ALGORITHMS]
    if bad or not algos:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGO_CHOICES)}")
    return algos


def _add_noise_flags(parser, default) -> None:
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", default=default, help="log progress to stderr")
    noise.add_argument("-q", "--quiet", action="store_true", default=default, help="print errors only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paretoplan", description=__doc__.splitlines()[0])
    _add_noise_flags(parser, default=False)
    # The same flags are accepted after the subcommand too.
    common = argparse.ArgumentParser(add_help=False)
    _add_noise_flags(common, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    add = lambda name, help: sub.add_parser(name, help=help, parents=[common])

    g = add("generate", "write a random workspace as JSON")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=100, help="grid width and height in cells")
    g.add_argument("--coverage", type=_coverage, default=0.23)
    g.add_argument("--terrain", default="synthetic", help="'synthetic' or a .csv/.pgm heightmap")
    g.add_argument("--start", type=_cell, help="ROW,COL (default: lower-left corner)")
    g.add_argument("--goal", type=_cell, help="ROW,COL (default: upper-right corner)")
    g.add_argument("--out", required=True)

    p = add("plan", "plan one workspace and write the waypoints as CSV")
    p.add_argument("--workspace", required=True)
    p.add_argument("--algo", choices=ALGO_CHOICES, default="dstar-po")
    p.add_argument("--weights", type=_weights, default=DEFAULT_WEIGHTS, help="g,h,e,s,r")
    p.add_argument("--selector", choices=("composite", "single", "weights"), default="composite")
    p.add_argument("--selector-index", type=int)
    p.add_argument("--selector-weights", type=_weights)
    p.add_argument("--accumulation", choices=("cumulative", "instantaneous"), default="cumulative")
    p.add_argument("--out", help="waypoint CSV (default: <workspace>_<algo>.csv beside the workspace)")
    p.add_argument("--trace", help="also write the expansion trace as NDJSON")

    b = add("bench", "run a seeded batch and write the aggregate report")
    b.add_argument("--runs", type=_positive, default=100)
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--algos", type=_algos, default=("astar", "dstar", "dstar-po"))
    b.add_argument("--size", type=_positive, default=100)
    b.add_argument("--coverage", type=_coverage, default=0.23)
    b.add_argument("--terrain-dir", default="synthetic", help="directory of .csv/.pgm heightmaps")
    b.add_argument("--format", choices=("csv", "markdown"), default="csv")
    b.add_argument("--per-run", action="store_true", help="append one row per run and algorithm")
    b.add_argument("--no-timing", action="store_true", help="blank the wall-clock columns")
    b.add_argument("--start", type=_cell, help="ROW,COL for every run (default: lower-left corner)")
    b.add_argument("--goal", type=_cell, help="ROW,COL for every run (default: upper-right corner)")
    b.add_argument("--workers", type=_positive, default=1)
    b.add_argument("--out", help="report file (default: stdout)")

    r = add("render", "draw a cost layer with path overlays as PGM or SVG")
    r.add_argument("--workspace", required=True)
    r.add_argument("--path", action="append", default=[], metavar="CSV[:ALGO]",
                   help="waypoint CSV, optionally tagged with the algorithm that picks its style")
    r.add_argument("--layer", choices=render.LAYERS, default="occupancy+heuristic")
    r.add_argument("--format", choices=render.FORMATS, help="default: from the --out suffix")
    r.add_argument("--scale", type=_positive, default=6, help="pixels per cell")
    r.add_argument("--out", required=True)
    return parser


def write_waypoints(path, out) -> None:
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("step", "row", "col"))
        for i, (row, col) in enumerate(path):
            writer.writerow((i, row, col))


def read_waypoints(source) -> list:
    try:
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestionError(f"cannot read {source}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["step", "row", "col"]:
        raise IngestionError(f"{source}: expected header step,row,col")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        try:
            step, r, c = (int(x) for x in row)
        except ValueError:
            raise IngestionError(f"{source}, line {n}: expected three integers, got {row}") from None
        if step != len(out):
            raise IngestionError(f"{source}, line {n}: step {step} out of sequence")
        out.append((r, c))
    return out


def cmd_generate(args) -> int:
    elevation = None
    if args.terrain != "synthetic":
        elevation = load_terrain(args.terrain, shape=(args.size, args.size))
    ws = generate_random_workspace(args.seed, args.size, args.size, args.coverage, elevation=elevation,
                                   start=args.start, goal=args.goal)
    save_workspace(ws, args.out)
    log.info("wrote %s", args.out)
    print(f"coverage {ws.grid.coverage():.4f}, start {tuple(ws.start)} connected to goal {tuple(ws.goal)}")
    return EXIT_OK


def cmd_plan(args) -> int:
    ws = load_workspace(args.workspace)
    algo = args.algo.replace("-", "_")
    config = PlannerConfig(
        algorithm=algo,
        weights=args.weights,
        selector=PrioritySelector(args.selector, args.selector_index, args.selector_weights),
        accumulation=args.accumulation,
    )
    path, metrics, trace = plan(ws, config)
    src = FsPath(args.workspace)
    out = args.out or str(src.with_name(f"{src.stem}_{algo}.csv"))
    write_waypoints(path, out)
    if args.trace:
        FsPath(args.trace).write_text(trace.to_ndjson())
    log.info("wrote %s (%d waypoints, %d expansions)", out, len(path), metrics.expansions)
    print(",".join(METRIC_COLUMNS))
    print(",".join(repr(v) for v in (metrics.length, metrics.mean_elevation, metrics.solar_deviation,
                                      metrics.risk_proximity, metrics.compute_time)))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = bench.BenchmarkConfig(
        runs=args.runs, grid_size=args.size, coverage=args.coverage, master_seed=args.seed,
        algorithms=args.algos, terrain_source=args.terrain_dir,
        start=args.start, goal=args.goal,
    )
    report = bench.run_batch(config, workers=args.workers)
    text = bench.render_report(report, args.format, per_run=args.per_run, timing=not args.no_timing)
    if args.out:
        FsPath(args.out).write_text(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    for f in report.failures:
        log.warning("run %d %s failed: %s", f.run_id, f.algorithm, f.error)
    return EXIT_OK


def cmd_render(args) -> int:
    ws = load_workspace(args.workspace)
    fmt = args.format or render.format_for(args.out)
    overlays = []
    for item in args.path:
        source, _, algo = item.partition(":")
        label = algo or FsPath(source).stem
        overlays.append((label, read_waypoints(source), render.default_style(algo or "")))
    spec = render.RenderSpec(args.layer, tuple(overlays), fmt, args.scale)
    render.render(ws, spec, args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "plan": cmd_plan, "bench": cmd_bench, "render": cmd_render}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = logging.INFO if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except (NoPathError, BudgetExceededError) as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (OSError, IngestionError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PlanningError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
