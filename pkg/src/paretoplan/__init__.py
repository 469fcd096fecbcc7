"""Multiobjective grid path planning with Pareto-front expansion (A*, D*, D*-PO, A*-PO)."""
from .bench import BenchmarkConfig, BenchmarkReport, render_report, run_batch
from .estimator import GridPlanner
from .exceptions import (
    BudgetExceededError,
    ConfigError,
    CorruptStateError,
    GenerationError,
    IngestionError,
    InvalidQueryError,
    InvalidStepError,
    NoPathError,
    PlanningError,
)
from .objectives import ObjectiveVector, PathMetrics, extend_objectives, normalize_columns, path_metrics
from .pareto import ParetoPoint, PrioritySelector, dominates, pareto_front, select_successor
from .planners import (
    ALGORITHMS,
    DEFAULT_WEIGHTS,
    DISTANCE_WEIGHTS,
    CostChangeEvent,
    Path,
    PlannerConfig,
    SearchTrace,
    dstar_initial_plan,
    dstar_replan,
    extract_path,
    plan,
)
from .workspace import (
    GridCoord,
    SolarModel,
    Workspace,
    generate_random_workspace,
    generate_synthetic_terrain,
    load_terrain,
    load_workspace,
    save_workspace,
)

__version__ = "0.1.0"
