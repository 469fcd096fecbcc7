"""Input checks shared by the estimators and the functional API."""
from __future__ import annotations

import math

import numpy as np

from .exceptions import ConfigError, InvalidQueryError, InvalidStepError
from .workspace import GridCoord, Workspace

N_OBJECTIVES = 5


def check_workspace(ws) -> Workspace:
    if not isinstance(ws, Workspace):
        raise TypeError(f"expected a Workspace, got {type(ws).__name__}")
    return ws


def check_coord(ws: Workspace, at, *, require_free: bool = True) -> GridCoord:
    try:
        coord = GridCoord(int(at[0]), int(at[1]))
    except (TypeError, ValueError, IndexError):
        raise InvalidQueryError(f"not a grid coordinate: {at!r}") from None
    if not ws.grid.in_bounds(coord):
        raise InvalidQueryError(f"cell {tuple(coord)} is outside the {ws.height}x{ws.width} grid")
    if require_free and not ws.grid.is_free(coord):
        raise InvalidQueryError(f"cell {tuple(coord)} is occupied")
    return coord


def check_weights(weights, n: int = N_OBJECTIVES) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ConfigError(f"expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ConfigError(f"weights must be finite and non-negative: {w.tolist()}")
    if not np.any(w > 0):
        raise ConfigError("at least one weight must be positive")
    return w


def is_adjacent(a, b) -> bool:
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dr, dc) == 1


def check_waypoints(ws: Workspace, waypoints, *, start=None, goal=None) -> list[GridCoord]:
    """Validate a waypoint sequence against the path invariants and return it as coords."""
    pts = [GridCoord(int(p[0]), int(p[1])) for p in waypoints]
    if len(pts) < 2:
        raise InvalidStepError(f"a path needs at least 2 waypoints, got {len(pts)}")
    if start is not None and pts[0] != tuple(start):
        raise InvalidStepError(f"path starts at {pts[0]}, expected {tuple(start)}")
    if goal is not None and pts[-1] != tuple(goal):
        raise InvalidStepError(f"path ends at {pts[-1]}, expected {tuple(goal)}")
    seen = set()
    for i, p in enumerate(pts):
        if not ws.grid.is_free(p):
            raise InvalidStepError(f"waypoint {i} {tuple(p)} is occupied or out of bounds")
        if p in seen:
            raise InvalidStepError(f"waypoint {i} {tuple(p)} repeats an earlier waypoint")
        seen.add(p)
        if i and not is_adjacent(pts[i - 1], p):
            raise InvalidStepError(f"waypoints {i - 1} and {i} are not 8-adjacent")
    return pts


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value <= 0:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_finite(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    return value
