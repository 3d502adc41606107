#!/usr/bin/env python3
"""
Roadmap construction certified against the arrangement space.

The roadmap starts from the scene's start and goal vertices and a path planned without
movable obstacles. Every uncovered arrangement set is then turned into a composite problem,
in which each obstacle occupies its whole leaf at once. A path solving the composite problem
is valid for every arrangement of the set, so adding it to the roadmap covers the set.
"""
import dataclasses
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import shapely

from ..coverage import (
    DEFAULT_COMBO_CAP,
    STATUS_COVERED,
    STATUS_UNCOVERED,
    ArrangementSet,
    ArrangementSets,
    CoverageReport,
    DecompositionTree,
    all_combinations,
    arrangement_volume,
    classify,
    coverage_ratio,
    evaluate_coverage,
    partition_all,
    refine_all,
)
from ..errors import PlannerFailure, ValidationError
from ..file_io.scene_file import scene_fingerprint
from ..geometry import EPS_SNAP, ConvexPolygon, Region, boolean, minkowski_sum_convex, minkowski_sum_region, regular_polygon, swept_hulls, union_all
from ..roadmap import DEFAULT_PATH_CAP, PathSet, Roadmap, RoadmapView, enumerate_paths, unpack_bits
from ..scene import Scene
from .planner import PLANNER_PRM, PLANNER_RRT, PlanningWorld, plan

logger = logging.getLogger(__name__)

MODE_COVER = "cover"
MODE_APP_BASELINE = "app_baseline"
WARM_START_NONE = "none"
WARM_START_DISJOINT = "disjoint"


@dataclass
class BuildParams:
    """
    Knobs of a roadmap build.

    :param seed:    The seed of every random stream of the build. Required.
    :param planner: "prm" or "rrt".
    :param planner_samples: Samples (PRM) or iterations (RRT) per planner call.
    :param planner_timeout: Seconds per planner call.
    :param path_cap:    Maximum number of enumerated paths.
    :param combo_cap:   Maximum number of arrangement sets.
    :param warm_start:  "none", or "disjoint" to start from n + 1 disjoint paths.
    :param mode:    "cover", or "app_baseline" to evaluate the disjoint paths only, with every
                    footprint replaced by the hull of all footprints.
    :param max_total_time:  Seconds for the whole build. The best artifact so far is returned
                            and flagged when it runs out.
    :param max_iterations:  Maximum number of repair iterations.
    :param connect_radius:  PRM connection radius or RRT step. Defaults scale with the workspace.
    :param k_neighbors: PRM nearest neighbors per sample.
    :param goal_bias:   RRT goal sampling probability.
    :param polygon_sides:   Sides of the polygons standing in for discs (terminal zones).
    """

    seed: int
    planner: str = PLANNER_PRM
    planner_samples: int = 500
    planner_timeout: float = 10.0
    path_cap: int = DEFAULT_PATH_CAP
    combo_cap: int = DEFAULT_COMBO_CAP
    warm_start: str = WARM_START_NONE
    mode: str = MODE_COVER
    max_total_time: float = 120.0
    max_iterations: int = 1000
    connect_radius: Optional[float] = None
    k_neighbors: int = 10
    goal_bias: float = 0.1
    polygon_sides: int = 16

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ValidationError("params.seed", "an integer seed is required")
        if self.planner not in (PLANNER_PRM, PLANNER_RRT):
            raise ValidationError("params.planner", f"expected 'prm' or 'rrt', got {self.planner!r}")
        if self.warm_start not in (WARM_START_NONE, WARM_START_DISJOINT):
            raise ValidationError("params.warm_start", f"expected 'none' or 'disjoint', got {self.warm_start!r}")
        if self.mode not in (MODE_COVER, MODE_APP_BASELINE):
            raise ValidationError("params.mode", f"expected 'cover' or 'app_baseline', got {self.mode!r}")
        for name in ("planner_samples", "planner_timeout", "path_cap", "combo_cap", "max_total_time", "k_neighbors"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"params.{name}", "must be positive")
        if self.max_iterations < 0:
            raise ValidationError("params.max_iterations", "must not be negative")
        if not 0 <= self.goal_bias <= 1:
            raise ValidationError("params.goal_bias", "must lie in [0, 1]")
        if self.polygon_sides < 3:
            raise ValidationError("params.polygon_sides", "at least 3 sides are needed")
        if self.connect_radius is not None and not self.connect_radius > 0:
            raise ValidationError("params.connect_radius", "must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BuildParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError("params", f"unknown field(s): {sorted(unknown)}")
        return cls(**data)

    def planner_kwargs(self) -> dict:
        return {
            "n_samples": self.planner_samples,
            "timeout": self.planner_timeout,
            "connect_radius": self.connect_radius,
            "k_neighbors": self.k_neighbors,
            "goal_bias": self.goal_bias,
        }


@dataclass
class CoverageArtifact:
    """
    Everything the query engine needs, plus the build log.

    ``trees`` are built for ``evaluated_scene``: the scene itself in cover mode, the scene
    with the baseline footprint in app_baseline mode.
    """

    scene: Scene
    fingerprint: str
    params: BuildParams
    roadmap: Roadmap
    path_set: PathSet
    trees: List[DecompositionTree]
    sets: ArrangementSets
    report: CoverageReport
    build_log: List[dict] = field(default_factory=list)
    timed_out: bool = False
    footprints: dict = field(default_factory=dict)

    @property
    def evaluated_scene(self) -> Scene:
        return self.scene.with_footprints(self.footprints) if self.footprints else self.scene

    def check_consistency(self):
        assert all(tree.n_columns == self.path_set.n_columns for tree in self.trees), "Tree columns differ from the incidence columns."
        assert self.path_set.n_columns == self.roadmap.n_columns, "Incidence columns differ from the roadmap columns."
        assert len(self.trees) == self.scene.n_movables, "One tree per movable obstacle is expected."


def composite_occupancy(arrangement_set: ArrangementSet, trees: Sequence[DecompositionTree]) -> List[Region]:
    """
    The workspace blocked by each obstacle of a set when it occupies its whole leaf:
    leaf_region (+) footprint, per obstacle.
    """
    assert len(arrangement_set.leaf_refs) == len(trees), "One leaf per tree is expected."
    return [minkowski_sum_region(tree.leaves[leaf].region, tree.spec.footprint) for leaf, tree in zip(arrangement_set.leaf_refs, trees)]


def repair(view: RoadmapView, occupancies: Sequence[Region], scene: Scene, params: BuildParams, rng: np.random.Generator) -> np.ndarray:
    """
    Plan a start-to-goal path in the composite world: static obstacles plus every occupancy.

    The unblocked edges of the view are valid in the composite world and seed the planner.

    :return:    Waypoints, shape (K, 2).
    :raises PlannerFailure: when the planner gives up.
    """
    world = PlanningWorld(scene, occupancies)
    seed_a, seed_b = view.edge_segments()
    kwargs = params.planner_kwargs()
    if params.planner == PLANNER_PRM:
        kwargs["seed_edges"] = list(zip(seed_a, seed_b))
    starts = np.asarray([tuple(p) for p in scene.starts], dtype=np.float64)
    goals = np.asarray([tuple(p) for p in scene.goals], dtype=np.float64)
    return plan(params.planner, world, starts, goals, rng, **kwargs)


def warm_start_disjoint(scene: Scene, n: int, params: BuildParams) -> List[np.ndarray]:
    """
    Up to n + 1 start-goal paths that no single obstacle placement can block together.

    Paths are planned greedily in the static world. After each path, the corridor it sweeps,
    grown by the largest footprint and its reflection, is forbidden to the next ones.
    Discs around the start and goal configurations stay allowed since all paths share them.
    """
    paths = []
    forbidden = Region.empty()
    if scene.movables:
        largest = max(scene.movables, key=lambda spec: spec.footprint.area).footprint
        grow = minkowski_sum_convex(largest, largest.reflected())
        radius = scene.robot.circumradius + largest.diameter
        zones = union_all(Region.from_convex(regular_polygon(radius, params.polygon_sides, tuple(p))) for p in scene.terminals)
        grown_robot = minkowski_sum_convex(scene.robot, grow)

    starts = np.asarray([tuple(p) for p in scene.starts], dtype=np.float64)
    goals = np.asarray([tuple(p) for p in scene.goals], dtype=np.float64)
    for k in range(n + 1):
        world = PlanningWorld(scene, [forbidden])
        try:
            waypoints = plan(params.planner, world, starts, goals, np.random.default_rng([params.seed, 0, k]), **params.planner_kwargs())
        except PlannerFailure as e:
            logger.info("Found %d disjoint path(s) of %d wanted: %s", len(paths), n + 1, e)
            break
        paths.append(waypoints)
        if k == n:
            break
        corridor = Region.from_geometry(shapely.union_all(swept_hulls(grown_robot, waypoints[:-1], waypoints[1:]), grid_size=EPS_SNAP))
        forbidden = boolean("union", forbidden, boolean("difference", corridor, zones))
    return paths


def baseline_footprint(scene: Scene) -> ConvexPolygon:
    """The hull of every movable footprint: the largest footprint when they are nested."""
    return ConvexPolygon.hull_of(np.vstack([spec.footprint.vertices for spec in scene.movables]), allow_degenerate=False)


class _BuildState:
    def __init__(self, scene: Scene, params: BuildParams, fingerprint: str):
        self.scene = scene
        self.params = params
        self.fingerprint = fingerprint
        self.roadmap = Roadmap(scene)
        self.trees = partition_all(self.roadmap, scene.movables)
        self.path_set = None
        self.sets = None
        self.report = None
        self.log = []

    def evaluate(self):
        self.path_set = enumerate_paths(self.roadmap, self.params.path_cap)
        self.trees = refine_all(self.trees, self.roadmap)
        self.sets = classify(self.path_set, all_combinations(self.trees, self.params.combo_cap, roadmap=self.roadmap))
        self.report = coverage_ratio(self.sets, self.path_set.truncated, arrangement_volume(self.scene), self.path_set.n_paths)

    def uncovered_queue(self) -> deque:
        uncovered = self.sets.status_of(STATUS_UNCOVERED)
        order = np.argsort(-self.sets.volume[uncovered], kind="stable")
        return deque(int(i) for i in uncovered[order])

    def record(self, iteration: int, outcome: str, set_volume: float = 0.0, edges_added: int = 0):
        entry = {
            "iteration": iteration,
            "outcome": outcome,
            "set_volume": float(set_volume),
            "edges_added": int(edges_added),
            "n_edges": self.roadmap.n_edges,
            "n_paths": self.path_set.n_paths,
            "n_sets": len(self.sets),
            "n_uncovered": len(self.report.uncovered),
            "raw_coverage": float(self.report.raw_coverage),
            "feasible_coverage": float(self.report.feasible_coverage),
        }
        self.log.append(entry)
        logger.info(
            "Iteration %d: %s, |C| = %d, raw coverage %.6f, feasible coverage %.6f.",
            iteration,
            outcome,
            entry["n_uncovered"],
            entry["raw_coverage"],
            entry["feasible_coverage"],
        )

    def artifact(self, timed_out: bool) -> CoverageArtifact:
        for tree in self.trees:
            self.report.warnings.extend(f"{tree.obstacle_id}: {w}" for w in tree.warnings)
        return CoverageArtifact(
            scene=self.scene,
            fingerprint=self.fingerprint,
            params=self.params,
            roadmap=self.roadmap,
            path_set=self.path_set,
            trees=self.trees,
            sets=self.sets,
            report=self.report,
            build_log=self.log,
            timed_out=timed_out,
        )


def build(scene: Scene, params: BuildParams) -> CoverageArtifact:
    """
    Build a coverage-certified roadmap.

    1. Initialize the roadmap with the start and goal vertices and build one tree per obstacle.
    2. Add a path planned without movable obstacles (or the disjoint warm-start paths).
    3. Detect the uncovered arrangement sets C, largest volume first.
    4. Dequeue a set, hide the edges its signature blocks and repair the roadmap in the
       composite world. On success add the path, refine the trees, re-detect C and reset the
       failure counter; on failure re-enqueue the set and count the failure.
    5. Stop when C is empty or the failure count reaches |C|.

    :raises ValidationError:    on invalid parameters.
    :return:    The artifact. When max_total_time runs out, the artifact built so far is
                returned with ``timed_out`` set.
    """
    if params.mode == MODE_APP_BASELINE:
        return app_baseline(scene, params)

    time_start = time.time()
    state = _BuildState(scene, params, scene_fingerprint(scene))

    if params.warm_start == WARM_START_DISJOINT:
        initial_paths = warm_start_disjoint(scene, scene.n_movables, params)
    else:
        initial_paths = warm_start_disjoint(scene, 0, params)
    if not initial_paths:
        logger.warning("No path exists in the world without movable obstacles.")
    for waypoints in initial_paths:
        state.roadmap.add_path(waypoints)
    state.evaluate()
    state.record(0, "initial", edges_added=state.roadmap.n_edges)

    queue = state.uncovered_queue()
    failures, iteration, timed_out = 0, 0, False
    while queue and failures < len(queue):
        if time.time() - time_start > params.max_total_time:
            timed_out = True
            logger.warning("Build timed out after %.1f s; returning the roadmap built so far.", time.time() - time_start)
            break
        if iteration >= params.max_iterations:
            logger.info("Stopping after %d iterations.", iteration)
            break
        iteration += 1

        set_index = queue.popleft()
        arrangement_set = state.sets[set_index]
        blocked = unpack_bits(arrangement_set.composite_signature, state.roadmap.n_columns)
        view = state.roadmap.remove_invalid_edges(blocked)
        occupancies = composite_occupancy(arrangement_set, state.trees)
        try:
            waypoints = repair(view, occupancies, scene, params, np.random.default_rng([params.seed, iteration]))
        except PlannerFailure as e:
            failures += 1
            queue.append(set_index)
            logger.debug("Repair of set %d failed: %s", set_index, e)
            state.record(iteration, "failed", arrangement_set.volume)
            continue

        n_edges_before = state.roadmap.n_edges
        previous_report = state.report
        state.roadmap.add_path(waypoints)
        state.evaluate()
        _check_resolved(state, arrangement_set)
        assert state.path_set.truncated or state.report.raw_coverage >= previous_report.raw_coverage - 1e-12, "Coverage decreased after adding a path."
        failures = 0
        queue = state.uncovered_queue()
        state.record(iteration, "added", arrangement_set.volume, state.roadmap.n_edges - n_edges_before)

    artifact = state.artifact(timed_out)
    logger.info("Build finished after %d iteration(s): raw coverage %.6f, %d path(s).", iteration, artifact.report.raw_coverage, artifact.path_set.n_paths)
    return artifact


def _check_resolved(state: _BuildState, arrangement_set: ArrangementSet):
    """Every set the repaired set was split into must now be covered."""
    if not state.trees:
        return
    children = [tree.lineage[leaf] for tree, leaf in zip(state.trees, arrangement_set.leaf_refs)]
    grids = np.meshgrid(*[np.asarray(c, dtype=np.int64) for c in children], indexing="ij")
    index = np.ravel_multi_index(tuple(g.reshape(-1) for g in grids), tuple(tree.n_leaves for tree in state.trees))
    assert state.path_set.truncated or np.all(state.sets.status[index] == STATUS_COVERED), "The added path does not cover every part of the repaired arrangement set."


def app_baseline(scene: Scene, params: BuildParams) -> CoverageArtifact:
    """
    The disjoint-paths baseline: n + 1 disjoint paths, no repair, every footprint replaced by
    the hull of all footprints, coverage evaluated with the same machinery.
    """
    roadmap = Roadmap(scene)
    for waypoints in warm_start_disjoint(scene, scene.n_movables, params):
        roadmap.add_path(waypoints)
    footprints = {}
    if scene.movables:
        hull = baseline_footprint(scene)
        footprints = {spec.id: hull for spec in scene.movables}
    evaluation = evaluate_coverage(scene, roadmap, params.path_cap, params.combo_cap, footprints=footprints)
    log = [
        {
            "iteration": 0,
            "outcome": "initial",
            "set_volume": 0.0,
            "edges_added": roadmap.n_edges,
            "n_edges": roadmap.n_edges,
            "n_paths": evaluation.path_set.n_paths,
            "n_sets": len(evaluation.sets),
            "n_uncovered": len(evaluation.report.uncovered),
            "raw_coverage": float(evaluation.report.raw_coverage),
            "feasible_coverage": float(evaluation.report.feasible_coverage),
        }
    ]
    return CoverageArtifact(
        scene=scene,
        fingerprint=scene_fingerprint(scene),
        params=params,
        roadmap=roadmap,
        path_set=evaluation.path_set,
        trees=evaluation.trees,
        sets=evaluation.sets,
        report=evaluation.report,
        build_log=log,
        footprints=footprints,
    )
