from .planner import PLANNER_PRM, PLANNER_RRT, PlanningWorld, plan, plan_prm, plan_rrt, direct_path, shortcut_path
from .cover_builder import (
    MODE_COVER,
    MODE_APP_BASELINE,
    WARM_START_NONE,
    WARM_START_DISJOINT,
    BuildParams,
    CoverageArtifact,
    composite_occupancy,
    repair,
    warm_start_disjoint,
    baseline_footprint,
    build,
    app_baseline,
)
from .cover_query_core import CoverQueryCore, QueryResult, QueryStats, OUTCOME_PATH, OUTCOME_UNCOVERED, OUTCOME_INFEASIBLE
from .cover_query import CoverQuery, query, batch_query, check_fingerprint
