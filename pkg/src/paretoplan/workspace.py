"""Configuration space: occupancy grid plus the elevation, risk and solar layers.

Cells are addressed as ``(row, col)`` with the origin in the lower-left corner,
so row 0 is the bottom of the map and ``x = col``, ``y = row`` when a cell is
read as a point in the plane. One cell is one meter on a side.
"""
from __future__ import annotations

import base64
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .exceptions import ConfigError, GenerationError, IngestionError, InvalidQueryError

# Row-major over the 3x3 stencil, centre excluded.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

# Side-length ranges (inclusive) for the three obstacle size classes.
OBSTACLE_SIZES = {"large": (8, 15), "medium": (4, 7), "small": (1, 3)}
DEFAULT_SIZE_MIX = {"large": 1.0, "medium": 3.0, "small": 6.0}

MAX_GENERATION_ATTEMPTS = 100
DEFAULT_EPSILON_SQ = 0.25
DEFAULT_SOLAR_RATE = 0.01


class GridCoord(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Binary occupancy, ``cells[row, col]`` is 1 for occupied and 0 for free."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.uint8, copy=True)
        if cells.ndim != 2 or cells.size == 0:
            raise ConfigError(f"occupancy grid must be a non-empty 2-D array, got shape {cells.shape}")
        if np.any(cells > 1):
            raise ConfigError("occupancy cells must be 0 (free) or 1 (occupied)")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def in_bounds(self, at) -> bool:
        return 0 <= at[0] < self.height and 0 <= at[1] < self.width

    def is_free(self, at) -> bool:
        return self.in_bounds(at) and self.cells[at[0], at[1]] == 0

    def coverage(self) -> float:
        return float(self.cells.mean())

    def __eq__(self, other):
        return isinstance(other, OccupancyGrid) and np.array_equal(self.cells, other.cells)


@dataclass(frozen=True, eq=False)
class ElevationLayer:
    """Normalized elevation in [0, 1], indexed like the occupancy grid."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.size == 0:
            raise ConfigError(f"elevation must be a non-empty 2-D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigError("elevation values must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ConfigError("elevation values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        return isinstance(other, ElevationLayer) and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class RiskField:
    """Single point of maximum risk with an inverse-square falloff."""

    center: GridCoord
    epsilon_sq: float = DEFAULT_EPSILON_SQ

    def __post_init__(self):
        object.__setattr__(self, "center", GridCoord(int(self.center[0]), int(self.center[1])))
        if not (self.epsilon_sq > 0 and math.isfinite(self.epsilon_sq)):
            raise ConfigError(f"epsilon_sq must be positive and finite, got {self.epsilon_sq}")


@dataclass(frozen=True)
class SolarModel:
    """Solar ray direction rotating counterclockwise by ``rotation_rate`` rad per step."""

    initial_vector: tuple[float, float] = (1.0, 0.0)
    rotation_rate: float = DEFAULT_SOLAR_RATE

    def __post_init__(self):
        vec = (float(self.initial_vector[0]), float(self.initial_vector[1]))
        if abs(math.hypot(*vec) - 1.0) > 1e-9:
            raise ConfigError(f"solar initial vector must be unit length, got {vec}")
        if not math.isfinite(self.rotation_rate):
            raise ConfigError("solar rotation rate must be finite")
        object.__setattr__(self, "initial_vector", vec)


@dataclass(frozen=True, eq=False)
class Workspace:
    grid: OccupancyGrid
    elevation: ElevationLayer
    risk: RiskField
    solar: SolarModel
    start: GridCoord
    goal: GridCoord
    seed: int | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "start", GridCoord(int(self.start[0]), int(self.start[1])))
        object.__setattr__(self, "goal", GridCoord(int(self.goal[0]), int(self.goal[1])))
        if self.elevation.shape != self.grid.shape:
            raise ConfigError(
                f"elevation shape {self.elevation.shape} does not match grid shape {self.grid.shape}"
            )
        if not self.grid.in_bounds(self.risk.center):
            raise ConfigError(f"risk center {self.risk.center} is outside the grid")
        for name in ("start", "goal"):
            at = getattr(self, name)
            if not self.grid.is_free(at):
                raise ConfigError(f"{name} {at} must be a free in-bounds cell")
        if self.start == self.goal:
            raise ConfigError("start and goal must differ")

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    @property
    def height(self) -> int:
        return self.grid.height

    @property
    def width(self) -> int:
        return self.grid.width

    def with_cells(self, changes) -> "Workspace":
        """Copy of the workspace with ``{coord: occupied_flag}`` applied to the grid."""
        cells = self.grid.cells.copy()
        for at, occupied in dict(changes).items():
            cells[at[0], at[1]] = 1 if occupied else 0
        return Workspace(
            OccupancyGrid(cells), self.elevation, self.risk, self.solar, self.start, self.goal, self.seed
        )

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.elevation == other.elevation
            and self.risk == other.risk
            and self.solar == other.solar
            and self.start == other.start
            and self.goal == other.goal
            and self.seed == other.seed
        )


def successors(ws: Workspace, at) -> list[GridCoord]:
    """All free in-bounds 8-neighbours of ``at``, in row-major stencil order."""
    grid = ws.grid
    if not grid.in_bounds(at):
        raise InvalidQueryError(f"cell {tuple(at)} is outside the {grid.height}x{grid.width} grid")
    if not grid.is_free(at):
        raise InvalidQueryError(f"cell {tuple(at)} is occupied")
    row, col = at
    out = []
    for dr, dc in NEIGHBOR_OFFSETS:
        nb = GridCoord(row + dr, col + dc)
        if grid.is_free(nb):
            out.append(nb)
    return out


def solar_vector_at(model: SolarModel, step: int) -> tuple[float, float]:
    angle = step * model.rotation_rate
    c, s = math.cos(angle), math.sin(angle)
    x, y = model.initial_vector
    vx, vy = c * x - s * y, s * x + c * y
    # Re-project so the unit-length guarantee survives long rotations.
    norm = math.hypot(vx, vy)
    return (vx / norm, vy / norm)


def risk_at(risk: RiskField, at) -> float:
    d_sq = (at[0] - risk.center[0]) ** 2 + (at[1] - risk.center[1]) ** 2
    return 1.0 / max(d_sq, risk.epsilon_sq)


def risk_layer(risk: RiskField, shape: tuple[int, int]) -> np.ndarray:
    rows, cols = np.indices(shape)
    d_sq = (rows - risk.center[0]) ** 2 + (cols - risk.center[1]) ** 2
    return 1.0 / np.maximum(d_sq.astype(np.float64), risk.epsilon_sq)


def is_connected(cells: np.ndarray, a, b) -> bool:
    """True when free cells ``a`` and ``b`` share an 8-connected free component."""
    labels, _ = ndimage.label(cells == 0, structure=np.ones((3, 3), dtype=int))
    return labels[a[0], a[1]] != 0 and labels[a[0], a[1]] == labels[b[0], b[1]]


def _sub_seed(*key: int) -> int:
    return int(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in key]).generate_state(1)[0])


def _protected_mask(shape, cells) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for r, c in cells:
        mask[max(r - 1, 0):r + 2, max(c - 1, 0):c + 2] = True
    return mask


def _place_obstacles(rng, shape, target, size_mix, protected, max_tries=20000) -> np.ndarray:
    height, width = shape
    cells = np.zeros(shape, dtype=np.uint8)
    if target <= 0:
        return cells
    classes = [k for k in ("large", "medium", "small") if size_mix.get(k, 0) > 0]
    weights = np.array([size_mix[k] for k in classes], dtype=float)
    weights /= weights.sum()
    total = cells.size
    occupied = 0
    ceiling = target + 0.02
    for _ in range(max_tries):
        if occupied / total >= target:
            break
        lo, hi = OBSTACLE_SIZES[classes[rng.choice(len(classes), p=weights)]]
        rh = int(rng.integers(lo, hi + 1))
        rw = int(rng.integers(lo, hi + 1))
        r0 = int(rng.integers(0, max(height - rh, 0) + 1))
        c0 = int(rng.integers(0, max(width - rw, 0) + 1))
        window = (slice(r0, r0 + rh), slice(c0, c0 + rw))
        if protected[window].any():
            continue
        added = int(rh * rw - cells[window].sum())
        if (occupied + added) / total > ceiling:
            continue
        cells[window] = 1
        occupied += added
    return cells


def generate_random_workspace(
    seed: int,
    width: int = 100,
    height: int = 100,
    target_coverage: float = 0.23,
    size_mix: dict | None = None,
    *,
    solar: SolarModel | None = None,
    epsilon_sq: float = DEFAULT_EPSILON_SQ,
    elevation: ElevationLayer | None = None,
    start=None,
    goal=None,
) -> Workspace:
    """Seeded random workspace with rectangular obstacles and a connected start/goal pair.

    Obstacles are axis-aligned rectangles drawn from three size classes in
    proportion to ``size_mix`` until ``target_coverage`` is reached. Start and
    goal default to the lower-left and upper-right corners; both are kept clear
    along with their neighbours. Disconnected maps are redrawn from derived
    sub-seeds, up to 100 attempts.
    """
    if width < 10 or height < 10:
        raise ConfigError(f"workspace must be at least 10x10, got {height}x{width}")
    if not 0 <= target_coverage < 0.6:
        raise ConfigError(f"target coverage must lie in [0, 0.6), got {target_coverage}")
    size_mix = dict(DEFAULT_SIZE_MIX if size_mix is None else size_mix)
    if any(v < 0 for v in size_mix.values()) or sum(size_mix.values()) <= 0:
        raise ConfigError(f"size mix needs non-negative weights with a positive sum: {size_mix}")
    shape = (height, width)
    start = GridCoord(0, 0) if start is None else GridCoord(*start)
    goal = GridCoord(height - 1, width - 1) if goal is None else GridCoord(*goal)
    if elevation is not None and elevation.shape != shape:
        raise ConfigError(f"elevation shape {elevation.shape} does not match {shape}")
    protected = _protected_mask(shape, [start, goal])
    solar = SolarModel() if solar is None else solar

    for attempt in range(MAX_GENERATION_ATTEMPTS):
        rng = np.random.default_rng(_sub_seed(seed, attempt))
        cells = _place_obstacles(rng, shape, target_coverage, size_mix, protected)
        if abs(cells.mean() - target_coverage) > 0.05:
            continue
        if not is_connected(cells, start, goal):
            continue
        free = np.flatnonzero(cells.ravel() == 0)
        center = divmod(int(free[rng.integers(len(free))]), width)
        terrain = elevation
        if terrain is None:
            terrain = generate_synthetic_terrain(_sub_seed(seed, attempt, 1), width, height)
        return Workspace(
            grid=OccupancyGrid(cells),
            elevation=terrain,
            risk=RiskField(GridCoord(*center), epsilon_sq),
            solar=solar,
            start=start,
            goal=goal,
            seed=seed,
        )
    raise GenerationError(
        f"no connected workspace at coverage {target_coverage} after {MAX_GENERATION_ATTEMPTS} attempts"
    )


def normalize_minmax(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant array maps to zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    out = (values - lo) / (hi - lo)
    # Pin the extremes exactly against rounding in the division.
    out[values == lo] = 0.0
    out[values == hi] = 1.0
    return out


def _diamond_square(rng: np.random.Generator, levels: int, roughness: float) -> np.ndarray:
    size = 2 ** levels + 1
    z = np.zeros((size, size))
    z[::size - 1, ::size - 1] = rng.uniform(-1.0, 1.0, (2, 2))
    step, scale = size - 1, 1.0
    while step > 1:
        half = step // 2
        centers = (z[:-1:step, :-1:step] + z[step::step, :-1:step]
                   + z[:-1:step, step::step] + z[step::step, step::step]) / 4.0
        z[half::step, half::step] = centers + rng.uniform(-scale, scale, centers.shape)

        padded = np.pad(z, half, constant_values=np.nan)
        for r0, c0 in ((0, half), (half, 0)):
            rows = np.arange(r0, size, step)[:, None] + half
            cols = np.arange(c0, size, step)[None, :] + half
            stacked = np.stack([
                padded[rows - half, cols], padded[rows + half, cols],
                padded[rows, cols - half], padded[rows, cols + half],
            ])
            mean = np.nanmean(stacked, axis=0)
            z[r0::step, c0::step] = mean + rng.uniform(-scale, scale, mean.shape)
        step, scale = half, scale * roughness
    return z


def generate_synthetic_terrain(seed: int, width: int, height: int, roughness: float = 0.55) -> ElevationLayer:
    """Diamond-square heightmap cropped to the grid and min-max normalized."""
    if width < 2 or height < 2:
        raise ConfigError(f"terrain needs at least 2x2 cells, got {height}x{width}")
    levels = max(1, math.ceil(math.log2(max(width, height) - 1)))
    rng = np.random.default_rng(seed)
    z = _diamond_square(rng, levels, roughness)[:height, :width]
    return ElevationLayer(normalize_minmax(z))


# --- terrain ingestion -----------------------------------------------------

def _read_csv_terrain(path: Path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for i, record in enumerate(csv.reader(fh)):
            if not record or all(not cell.strip() for cell in record):
                continue
            row = []
            for j, cell in enumerate(record):
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestionError(f"{path}: row {i}, col {j}: cannot parse {cell!r}") from None
                if not math.isfinite(value):
                    raise IngestionError(f"{path}: row {i}, col {j}: non-finite value {cell!r}")
                row.append(value)
            if rows and len(row) != len(rows[0]):
                raise IngestionError(f"{path}: row {i} has {len(row)} columns, expected {len(rows[0])}")
            rows.append(row)
    if not rows:
        raise IngestionError(f"{path}: no data")
    return np.array(rows, dtype=np.float64)


def _pgm_tokens(data: bytes, count: int):
    """First ``count`` header tokens and the offset just past the last one."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise IngestionError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
            end += 1
        tokens.append(data[pos:end])
        pos = end
    return tokens, pos


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise IngestionError(f"{path}: malformed PGM header") from None
    if not (0 < maxval < 65536) or width <= 0 or height <= 0:
        raise IngestionError(f"{path}: unsupported PGM header {width}x{height} maxval={maxval}")
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = data[pos + 1:]
        need = width * height * dtype.itemsize
        if len(body) < need:
            raise IngestionError(f"{path}: expected {need} bytes of pixel data, found {len(body)}")
        pixels = np.frombuffer(body[:need], dtype=dtype).astype(np.float64)
    elif magic == b"P2":
        words = data[pos:].split()
        if len(words) < width * height:
            raise IngestionError(f"{path}: expected {width * height} pixels, found {len(words)}")
        try:
            pixels = np.array([int(t) for t in words[:width * height]], dtype=np.float64)
        except ValueError as exc:
            raise IngestionError(f"{path}: bad pixel value ({exc})") from None
    else:
        raise IngestionError(f"{path}: not a PGM file (magic {magic!r})")
    pixels = pixels.reshape(height, width)
    bad = np.argwhere(pixels > maxval)
    if len(bad):
        r, c = bad[0]
        raise IngestionError(f"{path}: row {r}, col {c}: pixel exceeds maxval {maxval}")
    return pixels


def load_terrain(path, fmt: str | None = None, shape: tuple[int, int] | None = None) -> ElevationLayer:
    """Read a CSV or PGM heightmap (file row 0 = top of grid) and normalize it."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if not path.exists():
        raise IngestionError(f"{path}: no such file")
    if fmt == "csv":
        raw = _read_csv_terrain(path)
    elif fmt == "pgm":
        raw = _read_pgm(path)
    else:
        raise IngestionError(f"{path}: unknown terrain format {fmt!r}")
    if shape is not None and raw.shape != tuple(shape):
        raise IngestionError(f"{path}: terrain is {raw.shape[0]}x{raw.shape[1]}, expected {shape[0]}x{shape[1]}")
    # Files list the top row first; the grid keeps row 0 at the bottom.
    return ElevationLayer(normalize_minmax(raw[::-1]))


# --- workspace documents ---------------------------------------------------

def _rle_encode(cells: np.ndarray) -> list[int]:
    flat = cells.ravel()
    runs, current, count = [], 0, 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current, count = int(v), 1
    runs.append(count)
    return runs


def _rle_decode(runs: Sequence[int], shape) -> np.ndarray:
    if sum(runs) != shape[0] * shape[1]:
        raise IngestionError(f"occupancy runs cover {sum(runs)} cells, grid has {shape[0] * shape[1]}")
    values = np.zeros(len(runs), dtype=np.uint8)
    values[1::2] = 1
    return np.repeat(values, runs).reshape(shape)


def workspace_to_dict(ws: Workspace) -> dict:
    return {
        "width": ws.width,
        "height": ws.height,
        "occupancy": {"encoding": "rle", "runs": _rle_encode(ws.grid.cells)},
        "elevation": {
            "encoding": "base64-f64le",
            "data": base64.b64encode(ws.elevation.values.astype("<f8").tobytes()).decode("ascii"),
        },
        "risk": {"row": ws.risk.center.row, "col": ws.risk.center.col, "epsilonSq": ws.risk.epsilon_sq},
        "solar": {"vector": list(ws.solar.initial_vector), "rate": ws.solar.rotation_rate},
        "start": list(ws.start),
        "goal": list(ws.goal),
        "seed": ws.seed,
    }


def workspace_from_dict(doc: dict) -> Workspace:
    try:
        shape = (int(doc["height"]), int(doc["width"]))
        occ = doc["occupancy"]
        if isinstance(occ, dict):
            cells = _rle_decode(occ["runs"], shape)
        else:
            cells = np.array(occ, dtype=np.uint8).reshape(shape)
        elev = doc["elevation"]
        if isinstance(elev, dict):
            raw = base64.b64decode(elev["data"])
            values = np.frombuffer(raw, dtype="<f8").reshape(shape)
        else:
            values = np.array(elev, dtype=np.float64).reshape(shape)
        risk = doc["risk"]
        solar = doc["solar"]
        return Workspace(
            grid=OccupancyGrid(cells),
            elevation=ElevationLayer(values),
            risk=RiskField(GridCoord(risk["row"], risk["col"]), float(risk.get("epsilonSq", DEFAULT_EPSILON_SQ))),
            solar=SolarModel(tuple(solar["vector"]), float(solar["rate"])),
            start=GridCoord(*doc["start"]),
            goal=GridCoord(*doc["goal"]),
            seed=doc.get("seed"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"malformed workspace document: {exc}") from exc


def save_workspace(ws: Workspace, path) -> None:
    Path(path).write_text(json.dumps(workspace_to_dict(ws)))


def load_workspace(path) -> Workspace:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"{path}: cannot read workspace ({exc})") from exc
    return workspace_from_dict(doc)
