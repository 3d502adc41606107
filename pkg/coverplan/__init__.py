from .errors import (
    CoverplanError,
    ParseError,
    ValidationError,
    EmptyConfigRegion,
    DegenerateGeometry,
    BoundaryAmbiguous,
    OutOfRegion,
    InvalidPath,
    PlannerFailure,
    CombinationExplosion,
    BuildTimeout,
    ArtifactMismatch,
    UnknownTarget,
    ResolutionTooCoarse,
)
from .geometry import EPS_SNAP, EPS_AREA, DEFAULT_POLYGON_SIDES, Point2, ConvexPolygon, Region, regular_polygon, square, rectangle
from .scene import Scene, MovableObstacleSpec, Arrangement, collides, get_scene, BUNDLED_SCENES
from .roadmap import Roadmap, PathSet, enumerate_paths
from .coverage import DecompositionTree, ArrangementSets, CoverageReport, partition_obstacle_space, all_combinations, classify, coverage_ratio, evaluate_coverage
from .cover_search import BuildParams, CoverageArtifact, CoverQuery, CoverQueryCore, QueryResult, build, app_baseline, query, batch_query
from .file_io import load_scene, save_scene, read_artifact, write_artifact
from .verify import VerifyReport, monte_carlo_verify, grid_oracle, bench_query
from .render import RenderSpec, render
from .version import __version__
