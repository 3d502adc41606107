#!/usr/bin/env python3
"""
Brute-force classification of a grid of arrangements.

Every obstacle is placed at the centers of a regular grid over its configuration region and
each enumerated path is tested against the exactly placed footprint. No envelope, tree or
signature is involved, so the result can be compared with the signature classification.
"""
import logging
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional

import numpy as np
import shapely

from ..coverage import STATUS_COVERED, STATUS_INFEASIBLE, STATUS_UNCOVERED
from ..errors import ResolutionTooCoarse, ValidationError
from ..geometry import EPS_SNAP, placed_shapes, swept_hulls
from ..parallel import parallel_map
from ..roadmap import DEFAULT_PATH_CAP, Roadmap, enumerate_paths, pack_bits
from ..scene import Scene

logger = logging.getLogger(__name__)

CELL_OUTSIDE = -1
MAX_GRID_OBSTACLES = 2


@dataclass
class ObstacleGrid:
    """The cell centers of one obstacle and which paths and terminals each cell blocks."""

    obstacle_id: str
    centers: np.ndarray
    inside: np.ndarray
    cell_size: float
    blocked_paths: np.ndarray
    blocked_terminals: np.ndarray


@dataclass
class GridOracleResult:
    """
    ``status`` has one axis per obstacle and holds STATUS_COVERED, STATUS_UNCOVERED,
    STATUS_INFEASIBLE, or CELL_OUTSIDE for cells whose center lies outside some region.
    """

    resolution: int
    grids: List[ObstacleGrid]
    status: np.ndarray
    n_paths: int

    @property
    def n_cells(self) -> int:
        return int(np.sum(self.status != CELL_OUTSIDE))

    def count(self, status: int) -> int:
        return int(np.sum(self.status == status))


@dataclass
class GridComparison:
    compared: int = 0
    boundary_skipped: int = 0
    mismatches: int = 0
    mismatch_examples: List[dict] = field(default_factory=list)

    @property
    def agreement(self) -> float:
        return 1.0 - self.mismatches / self.compared if self.compared else 1.0


def obstacle_grid(scene: Scene, roadmap: Roadmap, paths, spec, resolution: int) -> ObstacleGrid:
    """Place one obstacle at every grid center and test every path and terminal against it."""
    min_x, min_y, max_x, max_y = spec.effective_region.bounds
    dx, dy = (max_x - min_x) / resolution, (max_y - min_y) / resolution
    xs = min_x + (np.arange(resolution) + 0.5) * dx
    ys = min_y + (np.arange(resolution) + 0.5) * dy
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack((grid_x.ravel(), grid_y.ravel()))
    inside = shapely.intersects_xy(spec.effective_region.geometry, centers[:, 0], centers[:, 1])
    footprints = placed_shapes(spec.footprint, centers)

    ############## Step 1: Every edge and terminal against every placement. ##############
    terminals = roadmap.vertex_xy[: roadmap.n_terminals]
    robots = placed_shapes(roadmap.scene.robot, terminals)
    blocked_terminals = np.column_stack([shapely.intersects(footprints, robot) for robot in robots]).astype(bool)
    edges = np.asarray(roadmap.edges, dtype=np.int64).reshape((-1, 2))
    hulls = swept_hulls(roadmap.scene.robot, roadmap.vertex_xy[edges[:, 0]], roadmap.vertex_xy[edges[:, 1]])
    blocked_edges = {}

    ############## Step 2: Combine them per path. ##############
    blocked = np.zeros((len(centers), len(paths)), dtype=bool)
    for j, path in enumerate(paths):
        blocked[:, j] = blocked_terminals[:, path[0]] | blocked_terminals[:, path[-1]]
        for u, v in zip(path[:-1], path[1:]):
            edge_id = roadmap.edge_id(u, v)
            if edge_id not in blocked_edges:
                blocked_edges[edge_id] = shapely.intersects(footprints, hulls[edge_id]).astype(bool)
            blocked[:, j] |= blocked_edges[edge_id]
    return ObstacleGrid(spec.id, centers, inside, max(dx, dy), pack_bits(blocked), blocked_terminals)


def grid_oracle(scene: Scene, roadmap: Roadmap, resolution: int = 50, path_cap: int = DEFAULT_PATH_CAP, threads: Optional[int] = None) -> GridOracleResult:
    """
    Classify the arrangement at every grid cell center by direct collision tests.

    :param scene:   The scene with the footprints to test.
    :param roadmap: The roadmap whose enumerated paths are tested.
    :param resolution:  Cells per axis and obstacle. The cost grows as resolution^(2n).
    :raises ValidationError:    if the scene has more than two movable obstacles.
    """
    if scene.n_movables > MAX_GRID_OBSTACLES:
        raise ValidationError("movables", f"the grid oracle handles at most {MAX_GRID_OBSTACLES} movable obstacles")
    if resolution < 1:
        raise ValidationError("resolution", "at least one cell per axis is needed")
    paths = enumerate_paths(roadmap, path_cap).paths
    full = pack_bits(np.ones(len(paths), dtype=bool))
    grids = [obstacle_grid(scene, roadmap, paths, spec, resolution) for spec in scene.movables]
    n_starts = len(scene.starts)

    if not grids:
        # No movables: one arrangement, blocked by nothing.
        status = np.array(STATUS_COVERED if paths else STATUS_UNCOVERED, dtype=np.int8)
    elif len(grids) == 1:
        status = _classify_cells(grids[0].blocked_paths, grids[0].blocked_terminals, full, n_starts)
        status[~grids[0].inside] = CELL_OUTSIDE
    else:
        first, second = grids
        rows = parallel_map(partial(_classify_row, first, second, full, n_starts), range(len(first.centers)), threads=threads)
        status = np.vstack(rows)
        status[~first.inside, :] = CELL_OUTSIDE
        status[:, ~second.inside] = CELL_OUTSIDE

    result = GridOracleResult(resolution, grids, status, len(paths))
    logger.info(
        "Grid oracle: %d cell(s), %d covered, %d uncovered, %d infeasible.",
        result.n_cells,
        result.count(STATUS_COVERED),
        result.count(STATUS_UNCOVERED),
        result.count(STATUS_INFEASIBLE),
    )
    return result


def _classify_cells(blocked_paths, blocked_terminals, full, n_starts) -> np.ndarray:
    if len(full):
        covered = np.any(blocked_paths != full[None, :], axis=-1)
    else:
        covered = np.zeros(len(blocked_paths), dtype=bool)
    infeasible = np.all(blocked_terminals[:, :n_starts], axis=-1) | np.all(blocked_terminals[:, n_starts:], axis=-1)
    status = np.where(covered, STATUS_COVERED, STATUS_UNCOVERED).astype(np.int8)
    status[infeasible] = STATUS_INFEASIBLE
    return status


def _classify_row(first: ObstacleGrid, second: ObstacleGrid, full, n_starts, row: int) -> np.ndarray:
    blocked_paths = second.blocked_paths | first.blocked_paths[row][None, :]
    blocked_terminals = second.blocked_terminals | first.blocked_terminals[row][None, :]
    return _classify_cells(blocked_paths, blocked_terminals, full, n_starts)


def compare_with_classification(oracle: GridOracleResult, artifact, eps: float = EPS_SNAP) -> GridComparison:
    """
    Compare the oracle with the status of the arrangement set containing each cell center.

    Cell centers within eps of a cut or of their region boundary are skipped. A warning of
    category ResolutionTooCoarse is issued when some leaf is thinner than a grid cell.
    """
    trees, sets = artifact.trees, artifact.sets
    for grid, tree in zip(oracle.grids, trees):
        areas = tree.leaf_areas
        perimeters = np.array([leaf.region.geometry.length for leaf in tree.leaves])
        thickness = np.divide(2.0 * areas, perimeters, out=np.full(len(areas), np.inf), where=perimeters > 0)
        if np.any(thickness < grid.cell_size):
            warnings.warn(ResolutionTooCoarse(f"A leaf of {tree.obstacle_id!r} is thinner than the {grid.cell_size:.4g} grid cell."), stacklevel=2)

    ############## Step 1: Locate every cell center once per obstacle. ##############
    located, skipped = [], []
    for grid, tree in zip(oracle.grids, trees):
        leaves = np.zeros(len(grid.centers), dtype=np.int64)
        boundary = np.zeros(len(grid.centers), dtype=bool)
        distance = shapely.distance(tree.region.geometry.boundary, shapely.points(grid.centers))
        for k in np.flatnonzero(grid.inside):
            result = tree.locate(grid.centers[k])
            leaves[k] = result.leaf
            boundary[k] = result.ambiguous or distance[k] <= eps
        located.append(leaves)
        skipped.append(boundary)

    ############## Step 2: Look up the set status of every cell combination. ##############
    if trees:
        table = np.full([tree.n_leaves for tree in trees], CELL_OUTSIDE, dtype=np.int8)
        table[tuple(sets.leaf_index.T)] = sets.status
        expected = table[np.ix_(*located)]
    else:
        expected = np.array(sets.status[0], dtype=np.int8)
    boundary = np.zeros(oracle.status.shape, dtype=bool)
    for axis, mask in enumerate(skipped):
        shape = [1] * len(skipped)
        shape[axis] = -1
        boundary |= mask.reshape(shape)

    valid = oracle.status != CELL_OUTSIDE
    comparison = GridComparison()
    comparison.boundary_skipped = int(np.sum(valid & boundary))
    judged = valid & ~boundary
    comparison.compared = int(np.sum(judged))
    mismatch = judged & (expected != oracle.status)
    comparison.mismatches = int(np.sum(mismatch))
    for index in np.argwhere(mismatch)[:10]:
        comparison.mismatch_examples.append(
            {
                "positions": [oracle.grids[i].centers[k].tolist() for i, k in enumerate(index)],
                "oracle": int(oracle.status[tuple(index)]),
                "classified": int(expected[tuple(index)]),
            }
        )
    if comparison.mismatches:
        logger.warning("Grid oracle disagrees with the classification on %d of %d cell(s).", comparison.mismatches, comparison.compared)
    return comparison
