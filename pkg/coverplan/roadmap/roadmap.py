#!/usr/bin/env python3
"""
The roadmap graph G = (V, E).

Vertices are robot positions. The first ``n_terminals`` vertices are the scene's start
configurations followed by its goal configurations; every vertex added later is an interior
vertex. Edges are straight-line motions, indexed in creation order and never renumbered.

Signature columns follow the same indexing: column k < n_terminals is terminal vertex k,
column n_terminals + e is edge e. New edges therefore always append new columns.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import InvalidPath
from ..geometry import EPS_SNAP
from ..scene import Scene

logger = logging.getLogger(__name__)

ROLE_START = "start"
ROLE_GOAL = "goal"
ROLE_INTERIOR = "interior"


class Roadmap:
    def __init__(self, scene: Scene):
        """
        Create a roadmap holding only the start and goal vertices of the scene.

        :param scene:   The scene the roadmap is built for. Edges are validated against its static obstacles.
        """
        self.scene = scene
        self.graph = nx.Graph()
        self.vertex_xy = np.zeros((0, 2), dtype=np.float64)
        self.vertex_role: List[str] = []
        self.edges: List[Tuple[int, int]] = []
        self._edge_index = {}

        for p in scene.starts:
            self._append_vertex(p, ROLE_START)
        for p in scene.goals:
            self._append_vertex(p, ROLE_GOAL)
        self.n_starts = len(scene.starts)
        self.n_terminals = len(scene.starts) + len(scene.goals)

    @property
    def n_vertices(self) -> int:
        return self.vertex_xy.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_columns(self) -> int:
        return self.n_terminals + len(self.edges)

    @property
    def start_ids(self) -> range:
        return range(0, self.n_starts)

    @property
    def goal_ids(self) -> range:
        return range(self.n_starts, self.n_terminals)

    def is_start(self, vertex_id: int) -> bool:
        return vertex_id < self.n_starts

    def is_goal(self, vertex_id: int) -> bool:
        return self.n_starts <= vertex_id < self.n_terminals

    def is_terminal(self, vertex_id: int) -> bool:
        return vertex_id < self.n_terminals

    def edge_id(self, u: int, v: int) -> Optional[int]:
        return self._edge_index.get((min(u, v), max(u, v)))

    def edge_column(self, edge_id: int) -> int:
        return self.n_terminals + edge_id

    def column_endpoints(self, column: int) -> Tuple[np.ndarray, np.ndarray]:
        """The two robot positions whose swept hull is the geometry of a signature column."""
        assert 0 <= column < self.n_columns, "The column index is out of range."
        if column < self.n_terminals:
            p = self.vertex_xy[column]
            return p, p
        u, v = self.edges[column - self.n_terminals]
        return self.vertex_xy[u], self.vertex_xy[v]

    def column_segments(self, first_column: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """Start and end positions of every column from first_column on, as two (K, 2) arrays."""
        starts, ends = [], []
        for column in range(first_column, self.n_columns):
            a, b = self.column_endpoints(column)
            starts.append(a)
            ends.append(b)
        return np.asarray(starts, dtype=np.float64).reshape((-1, 2)), np.asarray(ends, dtype=np.float64).reshape((-1, 2))

    def find_vertex(self, point) -> Optional[int]:
        """The lowest-index vertex within EPS_SNAP of the point, if any."""
        if self.n_vertices == 0:
            return None
        point = np.asarray(tuple(point), dtype=np.float64)
        distance = np.hypot(*(self.vertex_xy - point).T)
        candidates = np.flatnonzero(distance <= EPS_SNAP)
        return int(candidates[0]) if len(candidates) else None

    def add_vertex(self, point, role: str = ROLE_INTERIOR) -> int:
        """Add an interior vertex, reusing an existing vertex within EPS_SNAP."""
        assert role == ROLE_INTERIOR, "Terminal vertices are created from the scene."
        vertex_id = self.find_vertex(point)
        if vertex_id is not None:
            return vertex_id
        return self._append_vertex(point, role)

    def add_edge(self, u: int, v: int) -> int:
        """
        Add the straight edge between two vertices.

        :return:    The edge index. An existing edge keeps its index.
        :raises InvalidPath:    if the robot sweeping the edge hits a static obstacle.
        """
        assert u != v, "Self-loops are not allowed."
        edge_id = self.edge_id(u, v)
        if edge_id is not None:
            return edge_id
        if not self.scene.edge_is_free(self.vertex_xy[u], self.vertex_xy[v]):
            raise InvalidPath(f"Edge {u}-{v} collides with the static obstacles.")
        edge_id = len(self.edges)
        key = (min(u, v), max(u, v))
        self.edges.append(key)
        self._edge_index[key] = edge_id
        self.graph.add_edge(u, v, edge_id=edge_id)
        return edge_id

    def add_path(self, waypoints: Sequence) -> "Roadmap":
        """
        Append a start-to-goal waypoint path to the roadmap.

        The whole path is validated before the roadmap is touched. Waypoints within EPS_SNAP
        of an existing vertex reuse it, and existing edges keep their indices.

        :param waypoints:   A list of positions, the first at a start and the last at a goal.
        :return:    The roadmap itself.
        :raises InvalidPath:    if the path does not run from a start to a goal, or a segment
                                collides with the static obstacles.
        """
        points = [tuple(p) for p in waypoints]
        if len(points) < 2:
            raise InvalidPath("A path needs at least two waypoints.")
        first, last = self.find_vertex(points[0]), self.find_vertex(points[-1])
        if first is None or not self.is_start(first):
            raise InvalidPath(f"The first waypoint {points[0]} is not a start configuration.")
        if last is None or not self.is_goal(last):
            raise InvalidPath(f"The last waypoint {points[-1]} is not a goal configuration.")

        # Merge repeated waypoints.
        merged = [points[0]]
        for p in points[1:]:
            if np.hypot(p[0] - merged[-1][0], p[1] - merged[-1][1]) > EPS_SNAP:
                merged.append(p)
        for i, (a, b) in enumerate(zip(merged[:-1], merged[1:])):
            if not self.scene.edge_is_free(a, b):
                raise InvalidPath(f"Segment {i} from {a} to {b} collides with the static obstacles.")

        n_edges_before = self.n_edges
        vertex_ids = [first] + [self.add_vertex(p) for p in merged[1:-1]] + [last]
        for u, v in zip(vertex_ids[:-1], vertex_ids[1:]):
            if u != v:
                self.add_edge(u, v)
        logger.debug("Added a path with %d waypoints, %d new edge(s).", len(merged), self.n_edges - n_edges_before)
        return self

    def remove_invalid_edges(self, blocked) -> "RoadmapView":
        """
        A logical view without the edges and terminal vertices whose column bit is set.

        :param blocked: A boolean vector with one entry per column.
        """
        blocked = np.asarray(blocked, dtype=bool)
        assert blocked.shape == (self.n_columns,), "The blocked vector must have one entry per column."
        return RoadmapView(self, blocked)

    def copy(self) -> "Roadmap":
        roadmap = Roadmap.__new__(Roadmap)
        roadmap.scene = self.scene
        roadmap.graph = self.graph.copy()
        roadmap.vertex_xy = self.vertex_xy.copy()
        roadmap.vertex_role = list(self.vertex_role)
        roadmap.edges = list(self.edges)
        roadmap._edge_index = dict(self._edge_index)
        roadmap.n_starts = self.n_starts
        roadmap.n_terminals = self.n_terminals
        return roadmap

    def to_dict(self) -> dict:
        return {
            "vertex_xy": self.vertex_xy,
            "vertex_role": list(self.vertex_role),
            "edges": np.asarray(self.edges, dtype=np.int64).reshape((-1, 2)),
        }

    @classmethod
    def from_dict(cls, scene: Scene, data: dict) -> "Roadmap":
        roadmap = cls(scene)
        vertex_xy = np.asarray(data["vertex_xy"], dtype=np.float64).reshape((-1, 2))
        assert np.allclose(vertex_xy[: roadmap.n_terminals], roadmap.vertex_xy, atol=EPS_SNAP), "Terminal vertices do not match the scene."
        for p in vertex_xy[roadmap.n_terminals :]:
            roadmap._append_vertex(p, ROLE_INTERIOR)
        for u, v in np.asarray(data["edges"], dtype=np.int64).reshape((-1, 2)):
            key = (int(u), int(v))
            roadmap._edge_index[key] = len(roadmap.edges)
            roadmap.graph.add_edge(key[0], key[1], edge_id=len(roadmap.edges))
            roadmap.edges.append(key)
        return roadmap

    def _append_vertex(self, point, role: str) -> int:
        vertex_id = self.n_vertices
        self.vertex_xy = np.vstack((self.vertex_xy, np.asarray(tuple(point), dtype=np.float64)))
        self.vertex_role.append(role)
        self.graph.add_node(vertex_id)
        return vertex_id

    def __repr__(self):
        return f"Roadmap(vertices={self.n_vertices}, edges={self.n_edges}, columns={self.n_columns})"


class RoadmapView:
    """A read-only view of a roadmap with blocked edges and terminal vertices hidden."""

    def __init__(self, roadmap: Roadmap, blocked: np.ndarray):
        self.roadmap = roadmap
        self.blocked = blocked
        n_terminals = roadmap.n_terminals
        self.graph = nx.subgraph_view(
            roadmap.graph,
            filter_node=lambda v: not (v < n_terminals and blocked[v]),
            filter_edge=lambda u, v: not blocked[n_terminals + roadmap.graph.edges[u, v]["edge_id"]],
        )

    @property
    def starts(self) -> List[int]:
        return [v for v in self.roadmap.start_ids if v in self.graph]

    @property
    def goals(self) -> List[int]:
        return [v for v in self.roadmap.goal_ids if v in self.graph]

    @property
    def edge_ids(self) -> List[int]:
        return sorted(data["edge_id"] for _, _, data in self.graph.edges(data=True))

    def has_start_goal_path(self) -> bool:
        goals = set(self.goals)
        for start in self.starts:
            if goals & nx.node_connected_component(self.graph, start):
                return True
        return False

    def edge_segments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoints of every unblocked edge."""
        ids = self.edge_ids
        edges = np.asarray([self.roadmap.edges[e] for e in ids], dtype=np.int64).reshape((-1, 2))
        return self.roadmap.vertex_xy[edges[:, 0]], self.roadmap.vertex_xy[edges[:, 1]]
