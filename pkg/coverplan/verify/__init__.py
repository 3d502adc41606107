from .monte_carlo import (
    VERIFY_SCHEMA,
    DEFAULT_POSES_PER_SEGMENT,
    VerifyReport,
    monte_carlo_verify,
    sample_positions,
    sample_arrangements,
    interpolate_path,
    flip_signature_bit,
)
from .grid_oracle import CELL_OUTSIDE, ObstacleGrid, GridOracleResult, GridComparison, grid_oracle, obstacle_grid, compare_with_classification
from .bench import BENCH_SCHEMA, EXPERIMENT_SCHEMA, DEFAULT_TRIALS, BenchResult, bench_query, footprint_sweep, query_success_rate, default_size_pairs, footprint_experiment
