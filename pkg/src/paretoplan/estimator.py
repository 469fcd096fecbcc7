"""scikit-learn style front end for the planners.

``fit`` plans on a workspace, ``predict`` returns the planned path and, for
goal-rooted planners, ``partial_fit`` feeds cell changes to the D* repair.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError
from .pareto import PrioritySelector
from .planners import DEFAULT_WEIGHTS, CostChangeEvent, DStarState, PlannerConfig, _timed_run, dstar_replan
from .validation import check_workspace


class GridPlanner(BaseEstimator):
    """Plan a start-to-goal path on a :class:`~paretoplan.workspace.Workspace`.

    Parameters mirror :class:`~paretoplan.planners.PlannerConfig`; the
    selector is given as ``selector`` (``composite``, ``single`` or
    ``weights``) plus ``selector_index`` or ``selector_weights``.

    Attributes set by ``fit``: ``path_``, ``metrics_``, ``trace_`` and, for
    ``dstar``/``dstar_po``, ``state_`` for later repair.
    """

    def __init__(
        self,
        algorithm="dstar_po",
        weights=DEFAULT_WEIGHTS,
        selector="composite",
        selector_index=None,
        selector_weights=None,
        accumulation="cumulative",
        max_expansions=None,
        relaxation="policy",
        record_snapshots=False,
    ):
        self.algorithm = algorithm
        self.weights = weights
        self.selector = selector
        self.selector_index = selector_index
        self.selector_weights = selector_weights
        self.accumulation = accumulation
        self.max_expansions = max_expansions
        self.relaxation = relaxation
        self.record_snapshots = record_snapshots

    def _config(self) -> PlannerConfig:
        return PlannerConfig(
            algorithm=self.algorithm,
            weights=tuple(self.weights),
            selector=PrioritySelector(self.selector, self.selector_index, self.selector_weights),
            accumulation=self.accumulation,
            max_expansions=self.max_expansions,
            record_snapshots=self.record_snapshots,
            relaxation=self.relaxation,
        )

    def fit(self, X, y=None):
        """Plan on workspace ``X``; ``y`` is ignored."""
        ws = check_workspace(X)
        config = self._config()
        engine, path, self.metrics_ = _timed_run(ws, config)
        self.trace_ = engine.trace
        self.state_ = DStarState(engine, path) if config.goal_rooted else None
        self.path_ = path
        self.workspace_ = ws
        return self

    def predict(self, X=None):
        """The current path. ``X`` may be the fitted workspace or ``None``."""
        check_is_fitted(self, "path_")
        if X is not None and X is not self.workspace_ and X != self.workspace_:
            raise ConfigError("predict only answers for the workspace the planner was fitted on")
        return self.path_

    def partial_fit(self, events, robot_at=None):
        """Apply cell changes and repair the plan from ``robot_at`` (default: the start)."""
        check_is_fitted(self, "path_")
        if self.state_ is None:
            raise ConfigError(f"{self.algorithm!r} cannot repair a plan; use dstar or dstar_po")
        events = [e if isinstance(e, CostChangeEvent) else CostChangeEvent(*e) for e in events]
        robot = self.workspace_.start if robot_at is None else robot_at
        self.path_ = dstar_replan(self.state_, events, robot)
        return self

    def score(self, X=None, y=None):
        """Negative path length, so that higher is better."""
        return -self.predict(X).length
