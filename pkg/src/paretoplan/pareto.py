"""Domination tests, Pareto-front extraction and priority-cost selection.

All objectives are minimized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ._kernels import sweep_front
from .exceptions import ConfigError
from .validation import check_weights

SELECTOR_MODES = ("composite", "single", "weights")


@dataclass(frozen=True)
class ParetoPoint:
    values: tuple
    node_id: Any

    def __post_init__(self):
        values = tuple(map(float, self.values))
        if not all(map(math.isfinite, values)):
            raise ValueError(f"Pareto point values must be finite: {values}")
        object.__setattr__(self, "values", values)


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    strictly = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strictly = True
    return strictly


def nondominated_mask(values) -> np.ndarray:
    """Boolean mask of the rows of ``values`` that no other row dominates.

    Rows are swept in lexicographic order; a dominating row always sorts
    strictly before the row it dominates, so each row only has to be checked
    against the front collected so far. Exact duplicates of a front row stay
    on the front.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError("need a non-empty (n, d) array of objective values")
    if not np.all(np.isfinite(v)):
        raise ValueError("objective values must be finite")
    order = np.lexsort(v.T[::-1])
    keep = np.empty(v.shape[0], dtype=bool)
    keep[order] = sweep_front(np.ascontiguousarray(v[order]))
    return keep


def pareto_front(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """Non-dominated subset of ``points`` in their original order."""
    if len(points) == 0:
        raise ValueError("pareto_front needs at least one point")
    mask = nondominated_mask([p.values for p in points])
    return [p for p, keep in zip(points, mask) if keep]


@dataclass(frozen=True)
class PrioritySelector:
    """Scalar priority cost used to pick one member of a Pareto front.

    ``composite`` sums all objectives with equal weight, ``single`` ranks by one
    objective (``index``), ``weights`` applies a custom weight vector.
    """

    mode: str = "composite"
    index: int | None = None
    weights: tuple | None = None

    def __post_init__(self):
        if self.mode not in SELECTOR_MODES:
            raise ConfigError(f"unknown selector mode {self.mode!r}; expected one of {SELECTOR_MODES}")
        if self.mode == "single" and (self.index is None or not 0 <= self.index):
            raise ConfigError("single-objective selector needs a non-negative index")
        if self.mode == "weights":
            if self.weights is None:
                raise ConfigError("weights selector needs a weight vector")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def as_weights(self, dims: int) -> np.ndarray:
        """The selector as a weight vector over ``dims`` objectives."""
        if self.mode == "composite":
            return np.ones(dims)
        if self.mode == "single":
            if self.index >= dims:
                raise ConfigError(f"selector index {self.index} out of range for {dims} objectives")
            out = np.zeros(dims)
            out[self.index] = 1.0
            return out
        return check_weights(self.weights, dims)

    def priority(self, values) -> np.ndarray:
        v = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if self.mode == "composite":
            return v.sum(axis=1)
        if self.mode == "single":
            if self.index >= v.shape[1]:
                raise ConfigError(f"selector index {self.index} out of range for {v.shape[1]} objectives")
            return v[:, self.index].copy()
        return v @ check_weights(self.weights, v.shape[1])


def _argmin_lex(scores: np.ndarray, keys: Sequence) -> int:
    best = np.flatnonzero(scores == scores.min())
    if best.size == 1:
        return int(best[0])
    return int(min(best, key=lambda i: keys[i]))


def select_successor(front: Sequence[ParetoPoint], selector: PrioritySelector = PrioritySelector()):
    """Node id of the front member with the lowest priority cost.

    Equal costs fall back to the smaller node id, which for grid cells is the
    lexicographically smaller ``(row, col)``.
    """
    if len(front) == 0:
        raise ValueError("select_successor needs a non-empty front")
    scores = selector.priority([p.values for p in front])
    keys = [p.node_id for p in front]
    return keys[_argmin_lex(scores, keys)]
