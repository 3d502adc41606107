from .decomposition import (
    Envelope,
    Leaf,
    LocateResult,
    DecompositionTree,
    column_envelopes,
    envelope_planes,
    signed_distance,
    partition_obstacle_space,
    partition_all,
    refine_tree,
    refine_all,
)
from .coverage import (
    DEFAULT_COMBO_CAP,
    REPORT_SCHEMA,
    STATUS_COVERED,
    STATUS_UNCOVERED,
    STATUS_INFEASIBLE,
    STATUS_NAMES,
    ArrangementSet,
    ArrangementSets,
    CoverageReport,
    CoverageEvaluation,
    all_combinations,
    classify,
    coverage_ratio,
    arrangement_volume,
    evaluate_coverage,
)
