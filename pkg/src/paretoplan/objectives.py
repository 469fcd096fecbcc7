"""Per-step and per-path cost functions and the objective-space projection.

A search node is projected to five objectives ``(g, h, e, s, r)``: distance
travelled, straight-line distance still to go, elevation, solar alignment and
risk. ``path_metrics`` turns a finished path into the four reported path
costs (length, mean elevation, mean solar alignment, mean risk).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import ConfigError, InvalidStepError
from .validation import check_waypoints, check_weights, is_adjacent
from .workspace import GridCoord, Workspace, risk_at, solar_vector_at

SQRT2 = math.sqrt(2.0)
OBJECTIVE_NAMES = ("g", "h", "e", "s", "r")
ACCUMULATION_MODES = ("cumulative", "instantaneous")

# g and h are both meters; they share one scale so that g + h keeps its meaning
# after normalization.
DISTANCE_GROUP = ((0, 1),)


class ObjectiveVector(NamedTuple):
    g: float = 0.0
    h: float = 0.0
    e: float = 0.0
    s: float = 0.0
    r: float = 0.0


@dataclass(frozen=True)
class PathMetrics:
    length: float
    mean_elevation: float
    solar_deviation: float
    risk_proximity: float
    compute_time: float = 0.0
    expansions: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def step_distance(a, b) -> float:
    if not is_adjacent(a, b):
        raise InvalidStepError(f"{tuple(a)} -> {tuple(b)} is not an 8-connected move")
    return SQRT2 if (a[0] != b[0] and a[1] != b[1]) else 1.0


def heuristic(at, goal) -> float:
    return math.hypot(at[0] - goal[0], at[1] - goal[1])


def heading(step_from, step_to) -> tuple[float, float]:
    """Unit travel direction as an ``(x, y)`` vector, x along columns."""
    dx, dy = step_to[1] - step_from[1], step_to[0] - step_from[0]
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise InvalidStepError(f"zero-length heading at {tuple(step_from)}")
    return dx / norm, dy / norm


def solar_step_cost(step_from, step_to, solar) -> float:
    hx, hy = heading(step_from, step_to)
    return hx * solar[0] + hy * solar[1]


def extend_objectives(
    parent: ObjectiveVector,
    frm,
    to,
    ws: Workspace,
    step_index: int,
    *,
    target=None,
    mode: str = "cumulative",
    reverse_heading: bool = False,
) -> ObjectiveVector:
    """Objective vector of ``to`` reached from ``frm`` whose vector is ``parent``.

    ``target`` is where the heuristic points (the goal by default). With
    ``reverse_heading`` the solar term uses the ``to -> frm`` direction, which
    is how a robot travels along a tree grown backwards from its goal.
    """
    if not (ws.grid.is_free(frm) and ws.grid.is_free(to)):
        raise InvalidStepError(f"{tuple(frm)} -> {tuple(to)} touches an occupied or out-of-bounds cell")
    if mode not in ACCUMULATION_MODES:
        raise ConfigError(f"unknown accumulation mode {mode!r}")
    g = parent.g + step_distance(frm, to)
    h = heuristic(to, ws.goal if target is None else target)
    sun = solar_vector_at(ws.solar, step_index)
    e = float(ws.elevation.values[to[0], to[1]])
    s = solar_step_cost(to, frm, sun) if reverse_heading else solar_step_cost(frm, to, sun)
    r = risk_at(ws.risk, to)
    if mode == "cumulative":
        e, s, r = parent.e + e, parent.s + s, parent.r + r
    return ObjectiveVector(g, h, e, s, r)


def normalize_columns(vectors, groups: Sequence[Sequence[int]] = ()) -> np.ndarray:
    """Min-max normalize each column to [0, 1] across the given vectors.

    A zero-range column maps to 0. Columns listed together in ``groups`` keep
    their own minimum but share the largest range in the group as the divisor.
    """
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError("normalize_columns needs a non-empty list of vectors")
    lo = v.min(axis=0)
    span = v.max(axis=0) - lo
    for group in groups:
        idx = list(group)
        span[idx] = span[idx].max()
    safe = np.where(span > 0, span, 1.0)
    out = (v - lo) / safe
    out[:, span == 0] = 0.0
    np.clip(out, 0.0, 1.0, out=out)
    return out


def composite_cost(normalized, weights=(1, 1, 1, 1, 1)) -> float:
    w = check_weights(weights, len(normalized))
    return float(np.dot(np.asarray(normalized, dtype=np.float64), w))


def path_metrics(ws: Workspace, path, compute_time: float = 0.0, expansions: int = 0) -> PathMetrics:
    """Length, mean elevation, mean per-step solar alignment and mean risk of a path."""
    waypoints = getattr(path, "waypoints", path)
    pts = check_waypoints(ws, waypoints)
    n = len(pts)
    length = sum(step_distance(a, b) for a, b in zip(pts, pts[1:]))
    elevation = sum(float(ws.elevation.values[p]) for p in pts) / n
    solar = sum(
        solar_step_cost(a, b, solar_vector_at(ws.solar, i)) for i, (a, b) in enumerate(zip(pts, pts[1:]))
    ) / (n - 1)
    risk = sum(risk_at(ws.risk, p) for p in pts) / n
    return PathMetrics(length, elevation, solar, risk, float(compute_time), int(expansions))


def path_objectives(ws: Workspace, waypoints, *, mode: str = "cumulative") -> ObjectiveVector:
    """Replay a path step by step through ``extend_objectives`` (path depth drives the sun)."""
    pts = [GridCoord(*p) for p in waypoints]
    vec = ObjectiveVector(0.0, heuristic(pts[0], ws.goal), 0.0, 0.0, 0.0)
    for i, (a, b) in enumerate(zip(pts, pts[1:])):
        vec = extend_objectives(vec, a, b, ws, i, mode=mode)
    return vec
