#!/usr/bin/env python3
"""
Sampling planners for a translating convex robot in the plane.

Both planners work on a :class:`PlanningWorld`, the static obstacles plus any extra
blocking regions, and check straight segments exactly through the robot's swept hull.
"""
import logging
import math
import time
from typing import Optional, Sequence

import networkx as nx
import numpy as np
import shapely
from scipy.spatial import cKDTree

from ..errors import PlannerFailure
from ..geometry import EPS_SNAP, Region, placed_shapes, swept_hulls
from ..scene import Scene

logger = logging.getLogger(__name__)

PLANNER_PRM = "prm"
PLANNER_RRT = "rrt"


class PlanningWorld:
    """
    The obstacles a planner has to avoid.

    :param scene:   The scene, for the robot, the static obstacles and the bounds.
    :param blocking:    Extra regions the robot must not touch, e.g. composite occupancies.
    """

    def __init__(self, scene: Scene, blocking: Sequence[Region] = ()):
        self.scene = scene
        self.robot = scene.robot
        self.bounds = np.asarray(scene.workspace_bounds, dtype=np.float64)
        geometries = [r.geometry for r in [scene.static_obstacles, *blocking] if not r.geometry.is_empty]
        self.obstacles = shapely.union_all(geometries) if geometries else None
        if self.obstacles is not None:
            shapely.prepare(self.obstacles)

    def points_free(self, positions) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.float64).reshape((-1, 2))
        inside = np.all((positions >= self.bounds[:2]) & (positions <= self.bounds[2:]), axis=1)
        if self.obstacles is None or len(positions) == 0:
            return inside
        return inside & ~shapely.intersects(placed_shapes(self.robot, positions), self.obstacles)

    def segments_free(self, starts, ends) -> np.ndarray:
        starts = np.asarray(starts, dtype=np.float64).reshape((-1, 2))
        ends = np.asarray(ends, dtype=np.float64).reshape((-1, 2))
        if self.obstacles is None or len(starts) == 0:
            return np.ones(len(starts), dtype=bool)
        return ~shapely.intersects(swept_hulls(self.robot, starts, ends), self.obstacles)

    def path_free(self, waypoints) -> bool:
        waypoints = np.asarray(waypoints, dtype=np.float64).reshape((-1, 2))
        return bool(np.all(self.points_free(waypoints)) and np.all(self.segments_free(waypoints[:-1], waypoints[1:])))

    def sample_free(self, rng: np.random.Generator, n: int) -> np.ndarray:
        x_min, y_min, x_max, y_max = self.bounds
        samples = np.column_stack((rng.uniform(x_min, x_max, n), rng.uniform(y_min, y_max, n)))
        return samples[self.points_free(samples)]

    @property
    def diagonal(self) -> float:
        return float(math.hypot(self.bounds[2] - self.bounds[0], self.bounds[3] - self.bounds[1]))


def direct_path(world: PlanningWorld, starts: np.ndarray, goals: np.ndarray) -> Optional[np.ndarray]:
    """The first free straight start-goal segment, trying starts then goals in index order."""
    for start in starts:
        free = world.segments_free(np.repeat(start[None, :], len(goals), axis=0), goals)
        hit = np.flatnonzero(free)
        if len(hit):
            return np.vstack((start, goals[hit[0]]))
    return None


def _free_terminals(world: PlanningWorld, starts, goals):
    starts = np.asarray(starts, dtype=np.float64).reshape((-1, 2))
    goals = np.asarray(goals, dtype=np.float64).reshape((-1, 2))
    starts, goals = starts[world.points_free(starts)], goals[world.points_free(goals)]
    if len(starts) == 0 or len(goals) == 0:
        raise PlannerFailure("Every start or every goal configuration is blocked.")
    return starts, goals


def shortcut_path(world: PlanningWorld, waypoints: np.ndarray) -> np.ndarray:
    """Greedily replace runs of waypoints by the farthest free straight segment."""
    waypoints = np.asarray(waypoints, dtype=np.float64)
    result = [0]
    i = 0
    while i < len(waypoints) - 1:
        candidates = np.arange(len(waypoints) - 1, i, -1)
        free = world.segments_free(np.repeat(waypoints[i][None, :], len(candidates), axis=0), waypoints[candidates])
        i = int(candidates[np.flatnonzero(free)[0]]) if np.any(free) else i + 1
        result.append(i)
    return waypoints[result]


def plan_prm(
    world: PlanningWorld,
    starts: np.ndarray,
    goals: np.ndarray,
    rng: np.random.Generator,
    n_samples: int = 500,
    timeout: float = 10.0,
    k_neighbors: int = 10,
    connect_radius: Optional[float] = None,
    seed_edges: Optional[Sequence] = None,
) -> np.ndarray:
    """
    Probabilistic roadmap query from any start to any goal.

    Samples are drawn in batches; after each batch the roadmap is searched with Dijkstra from a
    virtual source joined to every start to a virtual sink joined to every goal.

    :param seed_edges:  Known free segments (pairs of positions) that are added to the roadmap.
    :return:    The waypoints, shape (K, 2).
    :raises PlannerFailure: when no path is found within n_samples samples or the timeout.
    """
    starts, goals = _free_terminals(world, starts, goals)
    path = direct_path(world, starts, goals)
    if path is not None:
        return path

    if connect_radius is None:
        connect_radius = 0.3 * world.diagonal
    nodes = np.vstack((starts, goals))
    graph = nx.Graph()
    graph.add_nodes_from(range(len(nodes)))
    if seed_edges:
        seed_a = np.asarray([a for a, _ in seed_edges], dtype=np.float64).reshape((-1, 2))
        seed_b = np.asarray([b for _, b in seed_edges], dtype=np.float64).reshape((-1, 2))
        free = world.segments_free(seed_a, seed_b)
        nodes, graph = _add_seed_edges(nodes, graph, seed_a[free], seed_b[free])

    source, sink = "source", "sink"
    time_start = time.time()
    n_batches = 4
    batch = max(1, math.ceil(n_samples / n_batches))
    drawn = 0
    while drawn < n_samples:
        if time.time() - time_start > timeout:
            raise PlannerFailure(f"PRM timed out after {timeout} s and {drawn} samples.")
        samples = world.sample_free(rng, min(batch, n_samples - drawn))
        drawn += min(batch, n_samples - drawn)
        first_new = len(nodes)
        nodes = np.vstack((nodes, samples))
        graph.add_nodes_from(range(first_new, len(nodes)))
        _connect_nodes(world, nodes, graph, first_new, k_neighbors, connect_radius)

        search = graph.copy()
        search.add_edges_from(((source, i) for i in range(len(starts))), weight=0.0)
        search.add_edges_from(((i, sink) for i in range(len(starts), len(starts) + len(goals))), weight=0.0)
        try:
            node_path = nx.dijkstra_path(search, source, sink, weight="weight")
        except nx.NetworkXNoPath:
            continue
        waypoints = nodes[node_path[1:-1]]
        logger.debug("PRM found a path after %d samples.", drawn)
        return shortcut_path(world, waypoints)

    raise PlannerFailure(f"PRM found no path with {n_samples} samples.")


def _add_seed_edges(nodes, graph, seed_a, seed_b):
    index = {tuple(p): i for i, p in enumerate(nodes)}
    points = list(nodes)
    for a, b in zip(seed_a, seed_b):
        ids = []
        for p in (a, b):
            key = tuple(p)
            if key not in index:
                index[key] = len(points)
                points.append(p)
                graph.add_node(index[key])
            ids.append(index[key])
        if ids[0] != ids[1]:
            graph.add_edge(ids[0], ids[1], weight=float(np.hypot(*(a - b))))
    return np.asarray(points, dtype=np.float64).reshape((-1, 2)), graph


def _connect_nodes(world, nodes, graph, first_new, k_neighbors, connect_radius):
    kd_tree = cKDTree(nodes)
    k = min(k_neighbors + 1, len(nodes))
    distance, neighbor = kd_tree.query(nodes, k=k)
    distance = np.asarray(distance).reshape((len(nodes), k))
    neighbor = np.asarray(neighbor).reshape((len(nodes), k))
    pairs = set()
    for i in range(len(nodes)):
        for d, j in zip(distance[i], neighbor[i]):
            j = int(j)
            if j == i or d > connect_radius or (i < first_new and j < first_new):
                continue
            pair = (min(i, j), max(i, j))
            if not graph.has_edge(*pair):
                pairs.add(pair)
    if not pairs:
        return
    pairs = sorted(pairs)
    a = nodes[[p[0] for p in pairs]]
    b = nodes[[p[1] for p in pairs]]
    free = world.segments_free(a, b)
    for (i, j), ok, pa, pb in zip(pairs, free, a, b):
        if ok:
            graph.add_edge(i, j, weight=float(np.hypot(*(pa - pb))))


def plan_rrt(
    world: PlanningWorld,
    starts: np.ndarray,
    goals: np.ndarray,
    rng: np.random.Generator,
    n_samples: int = 500,
    timeout: float = 10.0,
    step_size: Optional[float] = None,
    goal_bias: float = 0.1,
) -> np.ndarray:
    """
    Rapidly-exploring random tree grown from every start, with goal biased sampling.

    :return:    The waypoints, shape (K, 2).
    :raises PlannerFailure: when no path is found within n_samples iterations or the timeout.
    """
    starts, goals = _free_terminals(world, starts, goals)
    path = direct_path(world, starts, goals)
    if path is not None:
        return path

    if step_size is None:
        step_size = 0.1 * world.diagonal
    x_min, y_min, x_max, y_max = world.bounds
    nodes = [p for p in starts]
    parent = [-1] * len(starts)
    time_start = time.time()

    for iteration in range(n_samples):
        if time.time() - time_start > timeout:
            raise PlannerFailure(f"RRT timed out after {timeout} s and {iteration} iterations.")
        if rng.random() < goal_bias:
            target = goals[rng.integers(len(goals))]
        else:
            target = np.array([rng.uniform(x_min, x_max), rng.uniform(y_min, y_max)])

        tree = np.asarray(nodes)
        nearest = int(np.argmin(np.hypot(*(tree - target).T)))
        direction = target - tree[nearest]
        length = float(np.hypot(*direction))
        if length <= EPS_SNAP:
            continue
        new = tree[nearest] + direction * min(1.0, step_size / length)
        if not (world.points_free(new)[0] and world.segments_free(tree[nearest], new)[0]):
            continue
        nodes.append(new)
        parent.append(nearest)

        reach = np.hypot(*(goals - new).T) <= step_size
        candidates = np.flatnonzero(reach)
        if len(candidates) == 0:
            continue
        free = world.segments_free(np.repeat(new[None, :], len(candidates), axis=0), goals[candidates])
        if np.any(free):
            goal = goals[candidates[np.flatnonzero(free)[0]]]
            waypoints = [goal]
            node = len(nodes) - 1
            while node >= 0:
                waypoints.append(nodes[node])
                node = parent[node]
            logger.debug("RRT found a path after %d iterations.", iteration + 1)
            return shortcut_path(world, np.asarray(waypoints[::-1]))

    raise PlannerFailure(f"RRT found no path with {n_samples} iterations.")


def plan(
    planner: str,
    world: PlanningWorld,
    starts,
    goals,
    rng: np.random.Generator,
    n_samples: int = 500,
    timeout: float = 10.0,
    connect_radius: Optional[float] = None,
    k_neighbors: int = 10,
    goal_bias: float = 0.1,
    seed_edges: Optional[Sequence] = None,
) -> np.ndarray:
    """
    Dispatch to :func:`plan_prm` or :func:`plan_rrt`.

    For the RRT, connect_radius is the extension step.
    """
    if planner == PLANNER_PRM:
        return plan_prm(world, starts, goals, rng, n_samples, timeout, k_neighbors, connect_radius, seed_edges)
    elif planner == PLANNER_RRT:
        return plan_rrt(world, starts, goals, rng, n_samples, timeout, connect_radius, goal_bias)
    else:
        raise ValueError(f"Unknown planner: {planner}")
