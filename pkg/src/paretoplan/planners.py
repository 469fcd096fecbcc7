"""Grid search engines: A*, D* and their Pareto-front variants.

Every planner runs the same best-first skeleton and differs only in where the
tree is rooted and how the next open node is chosen:

* ``astar`` / ``astar_po`` grow a tree from the start towards the goal;
* ``dstar`` / ``dstar_po`` grow it from the goal towards the start, which is
  what lets D* repair the tree in place when cells change state;
* the composite policy scalarizes the normalized open list, the Pareto policy
  first restricts the choice to the non-dominated open nodes.

A node's objective vector is carried along its back-pointer chain. When a
second route reaches an open node, the policy decides whether to re-point it:
composite planners keep the route with the lower weighted, normalized cost,
Pareto planners switch only to a route that dominates the current one. With
``relaxation="distance"`` every planner keeps the shorter route instead.
Closed nodes are never reopened during the initial search; the D* repair
(``dstar_replan``) propagates changes in path length only.

Because any priority cost that grows with every objective has its minimum on
the Pareto front, a Pareto planner with the equal-weight composite selector
expands nodes in the same order as its composite twin. The two differ in the
re-pointing rule above and in ``selector_scope="front"``.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import BudgetExceededError, ConfigError, CorruptStateError, NoPathError
from .objectives import (
    ACCUMULATION_MODES,
    ObjectiveVector,
    PathMetrics,
    path_metrics,
    path_objectives,
)
from ._kernels import select_open
from .pareto import PrioritySelector
from .validation import check_coord, check_waypoints, check_weights, check_workspace, is_adjacent
from .workspace import NEIGHBOR_OFFSETS, GridCoord, Workspace, risk_layer

ALGORITHMS = ("astar", "dstar", "dstar_po", "astar_po")
DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 1.0, 1.0)
DISTANCE_WEIGHTS = (1.0, 1.0, 0.0, 0.0, 0.0)
RELAXATIONS = ("policy", "distance")
SELECTOR_SCOPES = ("open", "front")
INF = math.inf
SQRT2 = math.sqrt(2.0)

_NEW, _OPEN, _CLOSED = 0, 1, 2


class NodeTag(enum.Enum):
    NEW = "new"
    OPEN = "open"
    CLOSED = "closed"
    RAISE = "raise"
    LOWER = "lower"


@dataclass(frozen=True)
class SearchNode:
    coord: GridCoord
    objectives: ObjectiveVector
    tag: NodeTag = NodeTag.OPEN
    back_pointer: GridCoord | None = None
    step_index: int = 0


@dataclass(frozen=True)
class Path:
    waypoints: tuple

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(GridCoord(int(p[0]), int(p[1])) for p in self.waypoints))

    def __len__(self):
        return len(self.waypoints)

    def __iter__(self):
        return iter(self.waypoints)

    def __getitem__(self, i):
        return self.waypoints[i]

    @property
    def length(self) -> float:
        return sum(SQRT2 if (a[0] != b[0] and a[1] != b[1]) else 1.0
                   for a, b in zip(self.waypoints, self.waypoints[1:]))


@dataclass(frozen=True)
class CostChangeEvent:
    cell: GridCoord
    occupied: bool

    def __post_init__(self):
        object.__setattr__(self, "cell", GridCoord(int(self.cell[0]), int(self.cell[1])))


@dataclass
class PlannerConfig:
    algorithm: str = "dstar_po"
    weights: tuple = DEFAULT_WEIGHTS
    selector: PrioritySelector = field(default_factory=PrioritySelector)
    accumulation: str = "cumulative"
    max_expansions: int | None = None
    record_snapshots: bool = False
    relaxation: str = "policy"
    selector_scope: str = "open"

    def __post_init__(self):
        self.algorithm = self.algorithm.replace("-", "_")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        self.weights = tuple(check_weights(self.weights).tolist())
        if self.accumulation not in ACCUMULATION_MODES:
            raise ConfigError(f"unknown accumulation mode {self.accumulation!r}")
        if self.max_expansions is not None and self.max_expansions <= 0:
            raise ConfigError("max_expansions must be positive")
        if not isinstance(self.selector, PrioritySelector):
            raise ConfigError("selector must be a PrioritySelector")
        if self.selector_scope not in SELECTOR_SCOPES:
            raise ConfigError(f"unknown selector scope {self.selector_scope!r}; expected one of {SELECTOR_SCOPES}")
        if self.relaxation not in RELAXATIONS:
            raise ConfigError(f"unknown relaxation {self.relaxation!r}; expected one of {RELAXATIONS}")

    @property
    def goal_rooted(self) -> bool:
        return self.algorithm.startswith("dstar")

    @property
    def pareto(self) -> bool:
        return self.algorithm.endswith("_po")


@dataclass(frozen=True)
class TraceRecord:
    expansion_index: int
    chosen_cell: GridCoord
    open_list_size: int
    front_size: int | None
    policy: str
    snapshot_hash: str

    def as_json(self) -> str:
        doc = {
            "expansionIndex": self.expansion_index,
            "chosenCell": list(self.chosen_cell),
            "openListSize": self.open_list_size,
            "policy": self.policy,
            "snapshotHash": self.snapshot_hash,
        }
        if self.front_size is not None:
            doc["frontSize"] = self.front_size
        return json.dumps(doc)


@dataclass
class SearchTrace:
    records: list = field(default_factory=list)
    # (cells, objective rows) per expansion, kept only when requested.
    snapshots: list | None = None

    def __len__(self):
        return len(self.records)

    def to_ndjson(self) -> str:
        return "".join(r.as_json() + "\n" for r in self.records)


# --- expansion policies ------------------------------------------------------

class CompositePolicy:
    """Lowest weighted sum of the open list normalized column by column."""

    name = "composite"
    pareto = False
    front_scope = False

    def __init__(self, weights=DEFAULT_WEIGHTS):
        self.weights = check_weights(weights)
        self.active = self.weights > 0
        self.select_weights = self.weights
        self.scale = np.ones(len(self.weights))
        self._span = np.empty(len(self.weights))

    def choose(self, ids: np.ndarray, values: np.ndarray) -> tuple[int, int | None]:
        """Position in ``values`` of the chosen node and, for Pareto policies, the front size."""
        pos, front_size = select_open(
            values, ids, self.weights, self.select_weights, self.active,
            self.pareto, self.front_scope, self._span,
        )
        self.scale = np.where(self._span > 0, self._span, 1.0)
        return int(pos), (int(front_size) if self.pareto else None)

    def prefer(self, candidate, current) -> bool:
        """Whether ``candidate`` beats ``current`` for the same cell, on the last open list's scale."""
        total = 0.0
        for a, b, w, s in zip(candidate, current, self.weights, self.scale):
            total += w * (a - b) / s
        return total < 0.0


class ParetoPolicy(CompositePolicy):
    """Choose among the non-dominated open nodes by a priority cost.

    Objectives whose weight is zero are left out of the projection, so a
    distance-only configuration compares nodes on ``(g, h)`` alone.
    """

    name = "pareto"
    pareto = True

    def __init__(self, selector: PrioritySelector = PrioritySelector(), weights=DEFAULT_WEIGHTS, scope="open"):
        super().__init__(weights)
        if scope not in SELECTOR_SCOPES:
            raise ConfigError(f"unknown selector scope {scope!r}; expected one of {SELECTOR_SCOPES}")
        self.selector = selector
        self.select_weights = selector.as_weights(len(self.weights)) * self.active
        self.front_scope = scope == "front"

    def prefer(self, candidate, current) -> bool:
        strictly = False
        for a, b, on in zip(candidate, current, self.active):
            if not on:
                continue
            if a > b:
                return False
            if a < b:
                strictly = True
        return strictly


def _open_list_arrays(open_list: Sequence[SearchNode]):
    if len(open_list) == 0:
        raise NoPathError("open list is empty")
    coords = [n.coord for n in open_list]
    width = max(c[1] for c in coords) + 1
    ids = np.array([c[0] * width + c[1] for c in coords])
    values = np.array([tuple(n.objectives) for n in open_list], dtype=np.float64)
    return coords, ids, values


def expand_policy_composite(open_list: Sequence[SearchNode], weights=DEFAULT_WEIGHTS) -> GridCoord:
    coords, ids, values = _open_list_arrays(open_list)
    pos, _ = CompositePolicy(weights).choose(ids, values)
    return coords[pos]


def expand_policy_pareto(
    open_list: Sequence[SearchNode], selector=PrioritySelector(), weights=DEFAULT_WEIGHTS
) -> GridCoord:
    coords, ids, values = _open_list_arrays(open_list)
    pos, _ = ParetoPolicy(selector, weights).choose(ids, values)
    return coords[pos]


def make_policy(config: PlannerConfig):
    if config.pareto:
        return ParetoPolicy(config.selector, config.weights, config.selector_scope)
    return CompositePolicy(config.weights)


# --- search engine -------------------------------------------------------------

@lru_cache(maxsize=16)
def _neighbor_table(height: int, width: int) -> tuple:
    """Per cell: tuple of (neighbour id, step length, d_row, d_col)."""
    table = []
    for r in range(height):
        for c in range(width):
            nbs = []
            for dr, dc in NEIGHBOR_OFFSETS:
                rr, cc = r + dr, c + dc
                if 0 <= rr < height and 0 <= cc < width:
                    nbs.append((rr * width + cc, SQRT2 if dr and dc else 1.0, dr, dc))
            table.append(tuple(nbs))
    return tuple(table)


class SearchEngine:
    """Best-first search with D*-style incremental repair.

    ``cost`` is the back-pointer path length to the root and ``key`` the D*
    key (smallest cost seen since the node last entered the open list). A
    node on the open list with ``key < cost`` is a RAISE state, otherwise a
    LOWER state.
    """

    def __init__(self, ws: Workspace, config: PlannerConfig, policy=None):
        self.ws = ws
        self.config = config
        self.policy = make_policy(config) if policy is None else policy
        height, width = ws.shape
        self.width = width
        n = height * width
        self.free = [bool(v == 0) for v in ws.grid.cells.ravel()]
        self.elev = ws.elevation.values.ravel().tolist()
        self.risk = risk_layer(ws.risk, ws.shape).ravel().tolist()
        self.nbrs = _neighbor_table(height, width)
        self.tag = [_NEW] * n
        self.cost = [INF] * n
        self.key = [INF] * n
        self.bp = [-1] * n
        self.depth = [0] * n
        self.vecs = np.zeros((n, 5))
        # Row mirror of ``vecs`` for cheap scalar access in the inner loops.
        self.rows = [(0.0,) * 5] * n
        self.open_ids: list[int] = []
        self.open_pos: dict[int, int] = {}
        self.expansions = 0
        self.goal_rooted = config.goal_rooted
        self.cumulative = config.accumulation == "cumulative"
        self.root = self._id(ws.goal if self.goal_rooted else ws.start)
        self.target = self._id(ws.start if self.goal_rooted else ws.goal)
        self.max_expansions = config.max_expansions or 50 * n
        self.trace = SearchTrace(snapshots=[] if config.record_snapshots else None)
        self.sun = ws.solar

    def _id(self, at) -> int:
        return at[0] * self.width + at[1]

    def _coord(self, i: int) -> GridCoord:
        return GridCoord(*divmod(i, self.width))

    # open list bookkeeping
    def _open_add(self, i):
        if i not in self.open_pos:
            self.open_pos[i] = len(self.open_ids)
            self.open_ids.append(i)

    def _open_remove(self, i):
        pos = self.open_pos.pop(i)
        last = self.open_ids.pop()
        if last != i:
            self.open_ids[pos] = last
            self.open_pos[last] = pos

    def _insert(self, i, new_cost):
        t = self.tag[i]
        if t == _NEW:
            self.key[i] = new_cost
        elif t == _OPEN:
            self.key[i] = min(self.key[i], new_cost)
        else:
            self.key[i] = min(self.cost[i], new_cost)
        self.cost[i] = new_cost
        self.tag[i] = _OPEN
        self._open_add(i)

    def _vec_via(self, child, parent, cost):
        """Objective vector of ``child`` reached through ``parent`` with path cost ``cost``."""
        w = self.width
        cr, cc = divmod(child, w)
        pr, pc = divmod(parent, w)
        tr, tc = divmod(self.target, w)
        if self.goal_rooted:
            step = self.expansions
            hx, hy = pc - cc, pr - cr
        else:
            step = self.depth[parent]
            hx, hy = cc - pc, cr - pr
        angle = step * self.sun.rotation_rate
        ca, sa = math.cos(angle), math.sin(angle)
        ix, iy = self.sun.initial_vector
        norm = math.hypot(hx, hy)
        s = ((ca * ix - sa * iy) * hx + (sa * ix + ca * iy) * hy) / norm
        e, r = self.elev[child], self.risk[child]
        if self.cumulative:
            pv = self.rows[parent]
            e, s, r = pv[2] + e, pv[3] + s, pv[4] + r
        return (cost, math.hypot(cr - tr, cc - tc), e, s, r)

    def _set_vec(self, child, parent):
        self.depth[child] = self.depth[parent] + 1
        vec = self._vec_via(child, parent, self.cost[child])
        self.rows[child] = vec
        self.vecs[child] = vec

    def _expand(self, x):
        """Close ``x`` and relax its free neighbours; closed cells stay closed."""
        self._open_remove(x)
        self.tag[x] = _CLOSED
        self.expansions += 1
        tag, cost, free = self.tag, self.cost, self.free
        by_distance = self.config.relaxation == "distance"
        for y, d, _, _ in self.nbrs[x]:
            if not free[y] or tag[y] == _CLOSED:
                continue
            new = cost[x] + d
            if tag[y] == _NEW:
                self.bp[y] = x
                self._insert(y, new)
                self._set_vec(y, x)
                continue
            if by_distance:
                better = new < cost[y]
            else:
                candidate = self._vec_via(y, x, new)
                better = self.policy.prefer(candidate, self.rows[y])
            if better:
                self.bp[y] = x
                self.cost[y] = self.key[y] = new
                self._set_vec(y, x)

    def _arc(self, a, b, d) -> float:
        return d if self.free[a] and self.free[b] else INF

    def _process(self, x):
        """One D* PROCESS-STATE on ``x``; for a fresh search this is a plain expansion."""
        k_old = self.key[x]
        self._open_remove(x)
        self.tag[x] = _CLOSED
        self.expansions += 1
        tag, cost, bp = self.tag, self.cost, self.bp
        if k_old < cost[x]:
            for y, d, _, _ in self.nbrs[x]:
                if tag[y] == _NEW:
                    continue
                c = self._arc(x, y, d)
                if cost[y] <= k_old and cost[x] > cost[y] + c:
                    bp[x] = y
                    cost[x] = cost[y] + c
                    self._set_vec(x, y)
        hx = cost[x]
        lower = k_old == hx
        for y, d, _, _ in self.nbrs[x]:
            c = self._arc(x, y, d)
            if tag[y] == _NEW:
                if c == INF:
                    continue
                bp[y] = x
                self._insert(y, hx + c)
                self._set_vec(y, x)
                continue
            new = hx + c
            if bp[y] == x and cost[y] != new:
                self._insert(y, new)
                self._set_vec(y, x)
            elif bp[y] != x and cost[y] > new:
                if lower:
                    bp[y] = x
                    self._insert(y, new)
                    self._set_vec(y, x)
                else:
                    self._insert(x, hx)
            elif (not lower and bp[y] != x and hx > cost[y] + c
                  and tag[y] == _CLOSED and cost[y] > k_old):
                self._insert(y, cost[y])

    def _snapshot(self, ids: np.ndarray, values: np.ndarray) -> str:
        """Hash of the open list in its current (deterministic) order."""
        h = hashlib.blake2b(digest_size=12)
        h.update(ids.tobytes())
        h.update(values.tobytes())
        if self.trace.snapshots is not None:
            self.trace.snapshots.append((ids.copy(), values.copy()))
        return h.hexdigest()

    def _choose(self) -> int:
        ids = np.fromiter(self.open_ids, dtype=np.int64, count=len(self.open_ids))
        values = self.vecs[ids]
        pos, front_size = self.policy.choose(ids, values)
        chosen = int(ids[pos])
        self.trace.records.append(TraceRecord(
            expansion_index=self.expansions,
            chosen_cell=self._coord(chosen),
            open_list_size=int(ids.size),
            front_size=front_size,
            policy=self.policy.name,
            snapshot_hash=self._snapshot(ids, values),
        ))
        return chosen

    def initial_search(self):
        root = self.root
        self.tag[root] = _NEW
        self._insert(root, 0.0)
        tr, tc = divmod(self.target, self.width)
        rr, rc = divmod(root, self.width)
        self.rows[root] = (0.0, math.hypot(rr - tr, rc - tc), 0.0, 0.0, 0.0)
        self.vecs[root] = self.rows[root]
        while True:
            if not self.open_ids:
                raise NoPathError(f"{self._coord(self.target)} is unreachable from {self._coord(root)}")
            if self.expansions >= self.max_expansions:
                raise BudgetExceededError(f"search exceeded {self.max_expansions} expansions")
            x = self._choose()
            self._expand(x)
            if x == self.target:
                return

    # D* repair
    def _min_key(self):
        ids = self.open_ids
        best = min(ids, key=lambda i: (self.key[i], i))
        return best, self.key[best]

    def apply_event(self, event: CostChangeEvent):
        y = self._id(event.cell)
        if event.occupied:
            if not self.free[y]:
                return
            self.free[y] = False
            if self.tag[y] != _NEW:
                self._insert(y, INF)
        else:
            if self.free[y]:
                return
            self.free[y] = True
            for n, _, _, _ in self.nbrs[y]:
                if self.free[n] and self.tag[n] == _CLOSED:
                    self._insert(n, self.cost[n])

    def repair(self, robot: int):
        """Process states in key order until ``robot``'s cost is settled."""
        budget = self.expansions + self.max_expansions
        while self.open_ids:
            x, k_min = self._min_key()
            if k_min >= self.cost[robot]:
                break
            if self.expansions >= budget:
                raise BudgetExceededError(f"repair exceeded {self.max_expansions} expansions")
            self._process(x)
        if self.cost[robot] == INF:
            raise NoPathError(f"goal is unreachable from {self._coord(robot)}")

    def back_pointers(self) -> dict:
        return {self._coord(i): self._coord(b) for i, b in enumerate(self.bp)
                if b >= 0 and self.tag[i] != _NEW and self.cost[i] < INF}

    def path_from_tree(self, leaf: int) -> Path:
        """Follow back-pointers from ``leaf`` to the root."""
        out = [leaf]
        seen = {leaf}
        i = leaf
        while i != self.root:
            i = self.bp[i]
            if i < 0 or i in seen or not self.free[i] or self.cost[i] == INF:
                raise CorruptStateError(f"broken back-pointer chain at {self._coord(out[-1])}")
            seen.add(i)
            out.append(i)
        return Path([self._coord(i) for i in out])

    def node(self, at) -> SearchNode:
        i = self._id(at)
        t = self.tag[i]
        if t == _OPEN:
            tag = NodeTag.RAISE if self.key[i] < self.cost[i] else NodeTag.LOWER
        else:
            tag = (NodeTag.NEW, NodeTag.OPEN, NodeTag.CLOSED)[t]
        bp = self.bp[i]
        return SearchNode(
            coord=self._coord(i),
            objectives=ObjectiveVector(*self.rows[i]),
            tag=tag,
            back_pointer=self._coord(bp) if bp >= 0 else None,
            step_index=self.depth[i],
        )


# --- public API ---------------------------------------------------------------

def extract_path(back_pointers: Mapping, start) -> Path:
    """Follow a ``{cell: parent}`` field from ``start`` until a cell without a parent."""
    at = GridCoord(*start)
    out = [at]
    seen = {at}
    while at in back_pointers:
        nxt = back_pointers[at]
        if nxt is None:
            break
        nxt = GridCoord(*nxt)
        if not is_adjacent(at, nxt):
            raise CorruptStateError(f"dangling back-pointer {tuple(at)} -> {tuple(nxt)}")
        if nxt in seen:
            raise CorruptStateError(f"back-pointer cycle through {tuple(nxt)}")
        seen.add(nxt)
        out.append(nxt)
        at = nxt
    if len(out) < 2:
        raise CorruptStateError(f"no back-pointer leaves {tuple(start)}")
    return Path(out)


@dataclass
class DStarState:
    """Mutable planner state kept between D* replans."""

    engine: SearchEngine
    path: Path

    @property
    def back_pointers(self) -> dict:
        return self.engine.back_pointers()

    @property
    def workspace(self) -> Workspace:
        """The original workspace with every applied event reflected in the grid."""
        engine = self.engine
        original = engine.ws.grid.cells.ravel()
        changed = {engine._coord(i): not free for i, free in enumerate(engine.free)
                   if free != (original[i] == 0)}
        return engine.ws.with_cells(changed)


def _run(ws: Workspace, config: PlannerConfig) -> tuple[SearchEngine, Path]:
    check_workspace(ws)
    engine = SearchEngine(ws, config)
    engine.initial_search()
    if config.goal_rooted:
        path = engine.path_from_tree(engine.target)
    else:
        path = Path(reversed(engine.path_from_tree(engine.target).waypoints))
    check_waypoints(ws, path.waypoints, start=ws.start, goal=ws.goal)
    return engine, path


def _timed_run(ws: Workspace, config: PlannerConfig) -> tuple[SearchEngine, Path, PathMetrics]:
    t0 = time.perf_counter()
    engine, path = _run(ws, config)
    elapsed = time.perf_counter() - t0
    return engine, path, path_metrics(ws, path, elapsed, engine.expansions)


def plan(ws: Workspace, config: PlannerConfig | None = None) -> tuple[Path, PathMetrics, SearchTrace]:
    """Plan start to goal; returns the path, its metrics and the expansion trace."""
    engine, path, metrics = _timed_run(ws, PlannerConfig() if config is None else config)
    return path, metrics, engine.trace


def dstar_initial_plan(ws: Workspace, config: PlannerConfig | None = None) -> tuple[Path, DStarState]:
    config = PlannerConfig(algorithm="dstar") if config is None else config
    if not config.goal_rooted:
        raise ConfigError(f"D* planning needs a goal-rooted algorithm, got {config.algorithm!r}")
    engine, path = _run(ws, config)
    return path, DStarState(engine, path)


def dstar_replan(state: DStarState, events: Iterable[CostChangeEvent], robot_at) -> Path:
    """Apply cell changes and repair the goal-rooted tree until ``robot_at`` is consistent."""
    engine = state.engine
    ws = engine.ws
    robot = check_coord(ws, robot_at, require_free=False)
    for event in events:
        if not isinstance(event, CostChangeEvent):
            event = CostChangeEvent(*event)
        check_coord(ws, event.cell, require_free=False)
        if event.cell in (ws.start, ws.goal):
            raise ConfigError(f"cost change events may not touch the start or goal ({tuple(event.cell)})")
        engine.apply_event(event)
    rid = engine._id(robot)
    if not engine.free[rid]:
        raise NoPathError(f"robot cell {tuple(robot)} is occupied")
    engine.repair(rid)
    path = engine.path_from_tree(rid)
    state.path = path
    return path


def composite_path_cost(ws: Workspace, path, weights=DISTANCE_WEIGHTS, mode: str = "cumulative") -> float:
    """Weighted sum of a path's accumulated objectives (heuristic is zero at the goal)."""
    w = check_weights(weights)
    vec = path_objectives(ws, getattr(path, "waypoints", path), mode=mode)
    return float(np.dot(np.asarray(vec, dtype=np.float64), w))
