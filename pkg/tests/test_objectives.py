import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from paretoplan.exceptions import ConfigError, InvalidStepError
from paretoplan.objectives import (
    DISTANCE_GROUP,
    ObjectiveVector,
    composite_cost,
    extend_objectives,
    heading,
    heuristic,
    normalize_columns,
    path_metrics,
    path_objectives,
    solar_step_cost,
    step_distance,
)
from paretoplan.workspace import (
    ElevationLayer,
    OccupancyGrid,
    RiskField,
    SolarModel,
    Workspace,
    generate_random_workspace,
    risk_at,
)

from oracles import dijkstra_field


def open_ws(height, width, elevation=None, risk=(0, 0), solar=None):
    cells = np.zeros((height, width), dtype=np.uint8)
    elevation = np.zeros((height, width)) if elevation is None else np.asarray(elevation, dtype=float)
    return Workspace(
        OccupancyGrid(cells), ElevationLayer(elevation), RiskField(risk), solar or SolarModel(),
        (0, 0), (height - 1, width - 1),
    )


class TestStepCosts:
    def test_orthogonal_and_diagonal(self):
        assert step_distance((0, 0), (0, 1)) == 1.0
        assert step_distance((0, 0), (1, 1)) == math.sqrt(2.0)

    def test_non_adjacent_rejected(self):
        with pytest.raises(InvalidStepError):
            step_distance((0, 0), (0, 2))
        with pytest.raises(InvalidStepError):
            step_distance((3, 3), (3, 3))

    def test_heuristic_three_four_five(self):
        assert heuristic((0, 0), (3, 4)) == 5.0

    def test_corner_to_corner(self):
        assert heuristic((0, 0), (99, 99)) == pytest.approx(140.0071, abs=1e-4)

    def test_heading_uses_column_as_x(self):
        assert heading((0, 0), (0, 1)) == (1.0, 0.0)
        assert heading((0, 0), (1, 0)) == (0.0, 1.0)

    @pytest.mark.parametrize(
        "step_to, solar, expected",
        [((0, 1), (0.0, 1.0), 0.0), ((0, 1), (1.0, 0.0), 1.0), ((1, 1), (1.0, 0.0), 0.70711)],
    )
    def test_solar_dot(self, step_to, solar, expected):
        assert solar_step_cost((0, 0), step_to, solar) == pytest.approx(expected, abs=1e-5)

    @settings(max_examples=300, deadline=None)
    @given(st.sampled_from([(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if dr or dc]),
           st.floats(-10 * math.pi, 10 * math.pi))
    def test_solar_bounded(self, offset, angle):
        cost = solar_step_cost((5, 5), (5 + offset[0], 5 + offset[1]), (math.cos(angle), math.sin(angle)))
        assert abs(cost) <= 1 + 1e-12


class TestHeuristicAdmissible:
    @pytest.mark.parametrize("seed", range(10))
    def test_never_overestimates(self, seed):
        ws = generate_random_workspace(seed, 20, 20, 0.25)
        field = dijkstra_field(ws.grid.cells, ws.goal)
        for r, c in zip(*np.nonzero(np.isfinite(field))):
            assert heuristic((r, c), ws.goal) <= field[r, c] + 1e-12


class TestExtend:
    def test_componentwise(self):
        ws = open_ws(5, 5, risk=(4, 4), solar=SolarModel((0.0, 1.0)))
        vec = extend_objectives(ObjectiveVector(), (0, 0), (0, 1), ws, 0)
        assert vec.g == 1.0
        assert vec.h == heuristic((0, 1), (4, 4))
        assert vec.e == 0.0
        assert vec.s == 0.0
        assert vec.r == risk_at(ws.risk, (0, 1))

    def test_instantaneous_does_not_sum(self):
        ws = open_ws(3, 3, elevation=np.full((3, 3), 0.5))
        parent = ObjectiveVector(1.0, 0.0, 7.0, 3.0, 2.0)
        vec = extend_objectives(parent, (0, 0), (0, 1), ws, 0, mode="instantaneous")
        assert vec.g == 2.0
        assert vec.e == 0.5

    def test_reverse_heading(self):
        ws = open_ws(3, 3)
        fwd = extend_objectives(ObjectiveVector(), (0, 0), (0, 1), ws, 0)
        back = extend_objectives(ObjectiveVector(), (0, 0), (0, 1), ws, 0, reverse_heading=True)
        assert back.s == -fwd.s == -1.0

    def test_blocked_step_rejected(self):
        cells = np.zeros((3, 3), dtype=np.uint8)
        cells[0, 1] = 1
        ws = Workspace(OccupancyGrid(cells), ElevationLayer(np.zeros((3, 3))), RiskField((2, 0)),
                       SolarModel(), (0, 0), (2, 2))
        with pytest.raises(InvalidStepError):
            extend_objectives(ObjectiveVector(), (0, 0), (0, 1), ws, 0)

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            extend_objectives(ObjectiveVector(), (0, 0), (0, 1), open_ws(2, 2), 0, mode="sum")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_replay_is_bit_identical(self, seed):
        ws = generate_random_workspace(seed % 1000, 12, 12, 0.0)
        rng = np.random.default_rng(seed)
        path = [(0, 0)]
        while path[-1] != ws.goal and len(path) < 40:
            r, c = path[-1]
            nxt = (min(r + int(rng.integers(0, 2)), 11), min(c + int(rng.integers(0, 2)), 11))
            if nxt != (r, c):
                path.append(nxt)
        if len(path) < 2:
            return
        a = path_objectives(ws, path)
        b = path_objectives(ws, path)
        assert a == b
        # Two successive extends accumulate like one running sum.
        vec = ObjectiveVector(0.0, heuristic(path[0], ws.goal), 0.0, 0.0, 0.0)
        e = 0.0
        for i, (p, q) in enumerate(zip(path, path[1:])):
            vec = extend_objectives(vec, p, q, ws, i)
            e += float(ws.elevation.values[q])
        assert vec.e == e
        assert vec.h == heuristic(path[-1], ws.goal)


class TestNormalize:
    def test_min_max(self):
        out = normalize_columns([[0, 10, 5, 1, 1], [10, 20, 5, 3, 1]])
        assert out.tolist() == [[0, 0, 0, 0, 0], [1, 1, 0, 1, 0]]

    def test_zero_range_maps_to_zero(self):
        assert normalize_columns([[3.0, 3.0]]).tolist() == [[0.0, 0.0]]

    def test_distance_group_shares_scale(self):
        out = normalize_columns([[0, 0], [2, 1]], DISTANCE_GROUP)
        assert out.tolist() == [[0.0, 0.0], [1.0, 0.5]]

    def test_group_preserves_distance_order(self):
        v = np.array([[1.0, 9.0], [4.0, 5.0], [6.0, 2.0]])
        out = normalize_columns(v, DISTANCE_GROUP)
        assert np.argmin(out.sum(axis=1)) == np.argmin(v.sum(axis=1))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize_columns(np.zeros((0, 5)))

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 40), st.just(5)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_unit_box_and_idempotent(self, v):
        out = normalize_columns(v)
        assert np.all((out >= 0) & (out <= 1))
        full = np.ptp(out, axis=0) == 1.0
        again = normalize_columns(out)
        assert np.array_equal(again[:, full], out[:, full])
        grouped = normalize_columns(v, DISTANCE_GROUP)
        assert np.all((grouped >= 0) & (grouped <= 1))

    def test_composite(self):
        assert composite_cost([0.2, 0.2, 0.0, 0.0, 0.0], (1, 1, 0, 0, 0)) == pytest.approx(0.4)
        with pytest.raises(ConfigError):
            composite_cost([0.1] * 5, (1, 1, 1))


class TestPathMetrics:
    def test_diagonal_path(self):
        elevation = np.zeros((3, 3))
        elevation[0, 0], elevation[1, 1], elevation[2, 2] = 0.0, 0.5, 1.0
        m = path_metrics(open_ws(3, 3, elevation), [(0, 0), (1, 1), (2, 2)])
        assert m.length == pytest.approx(2.8284, abs=1e-4)
        assert m.length == 2 * math.sqrt(2.0)
        assert m.mean_elevation == 0.5

    def test_risk_mean(self):
        # No lattice path keeps every waypoint at exactly d^2 = 100, so the
        # constant-kernel case is checked with a uniform field and then a
        # near-constant one against the formula.
        ws = open_ws(30, 30, risk=(10, 1))
        m = path_metrics(ws, [(0, 0), (0, 1), (0, 2)])
        assert m.risk_proximity == pytest.approx((1 / 101 + 1 / 100 + 1 / 101) / 3, rel=1e-15)
        assert m.risk_proximity == pytest.approx(0.01, abs=1e-4)

    def test_solar_mean_over_steps(self):
        ws = open_ws(1, 4, solar=SolarModel((1.0, 0.0), 0.0))
        m = path_metrics(ws, [(0, 0), (0, 1), (0, 2), (0, 3)])
        assert m.solar_deviation == 1.0

    def test_single_cell_rejected(self):
        with pytest.raises(Exception):
            path_metrics(open_ws(2, 2), [(0, 0)])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_length_matches_independent_sum(self, seed):
        rng = np.random.default_rng(seed)
        pts = [(0, 0)]
        seen = {(0, 0)}
        for _ in range(30):
            r, c = pts[-1]
            dr, dc = int(rng.integers(0, 2)), int(rng.integers(0, 2))
            nxt = (min(r + dr, 19), min(c + dc, 19))
            if nxt in seen:
                continue
            seen.add(nxt)
            pts.append(nxt)
        if len(pts) < 2:
            return
        m = path_metrics(open_ws(20, 20), pts)
        total = 0.0
        for a, b in zip(pts, pts[1:]):
            total += math.hypot(a[0] - b[0], a[1] - b[1])
        assert m.length == total
