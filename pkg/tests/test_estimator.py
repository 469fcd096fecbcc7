import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from paretoplan.estimator import GridPlanner
from paretoplan.exceptions import ConfigError
from paretoplan.planners import CostChangeEvent, PlannerConfig, composite_path_cost, plan
from paretoplan.validation import check_waypoints
from paretoplan.workspace import generate_random_workspace


@pytest.fixture(scope="module")
def ws():
    return generate_random_workspace(5, 25, 25, 0.2)


def test_params_round_trip():
    est = GridPlanner(algorithm="astar", accumulation="instantaneous")
    params = est.get_params()
    assert params["algorithm"] == "astar" and params["accumulation"] == "instantaneous"
    twin = clone(est)
    assert twin.get_params() == params
    assert twin.set_params(algorithm="dstar").algorithm == "dstar"


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        GridPlanner().predict()


@pytest.mark.parametrize("algo", ["astar", "dstar", "dstar_po", "astar_po"])
def test_fit_matches_plan(ws, algo):
    est = GridPlanner(algorithm=algo).fit(ws)
    path, metrics, _ = plan(ws, PlannerConfig(algorithm=algo))
    assert est.predict() == path
    assert est.predict(ws) == path
    assert est.metrics_.length == metrics.length
    assert est.score() == -path.length
    check_waypoints(ws, est.path_.waypoints)


def test_predict_other_workspace(ws):
    est = GridPlanner(algorithm="astar").fit(ws)
    with pytest.raises(ConfigError):
        est.predict(generate_random_workspace(6, 25, 25, 0.2))


def test_fit_rejects_non_workspace():
    with pytest.raises(TypeError):
        GridPlanner().fit([[0, 1], [1, 0]])


def test_bad_param_surfaces_at_fit(ws):
    with pytest.raises(ConfigError):
        GridPlanner(algorithm="bfs").fit(ws)


def test_partial_fit_repairs(ws):
    est = GridPlanner(algorithm="dstar", weights=(1, 1, 0, 0, 0)).fit(ws)
    blocked = est.path_[len(est.path_) // 2]
    est.partial_fit([(blocked, True)])
    assert blocked not in est.path_.waypoints
    final = ws.with_cells({blocked: True})
    check_waypoints(final, est.path_.waypoints)
    scratch, _, _ = plan(final, PlannerConfig(algorithm="dstar", weights=(1, 1, 0, 0, 0)))
    assert composite_path_cost(final, est.path_) == pytest.approx(composite_path_cost(final, scratch), abs=1e-9)


def test_partial_fit_accepts_events(ws):
    est = GridPlanner(algorithm="dstar_po").fit(ws)
    robot = est.path_[2]
    est.partial_fit([CostChangeEvent((10, 10), False)], robot_at=robot)
    assert est.path_[0] == robot and est.path_[-1] == ws.goal


def test_partial_fit_needs_goal_rooted(ws):
    est = GridPlanner(algorithm="astar").fit(ws)
    assert est.state_ is None
    with pytest.raises(ConfigError):
        est.partial_fit([((3, 3), True)])
