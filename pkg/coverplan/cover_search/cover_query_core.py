#!/usr/bin/env python3
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..geometry import EPS_SNAP
from ..parallel import convert_numpy_array_to_shared_memory
from ..roadmap import popcount

logger = logging.getLogger(__name__)

OUTCOME_PATH = "path"
OUTCOME_UNCOVERED = "uncovered"
OUTCOME_INFEASIBLE = "infeasible"


@dataclass
class QueryStats:
    tree_steps: int = 0
    matvec_bit_ops: int = 0
    geometric_checks: int = 0

    def to_dict(self) -> dict:
        return {"tree_steps": self.tree_steps, "matvec_bit_ops": self.matvec_bit_ops, "geometric_checks": self.geometric_checks}


@dataclass
class QueryResult:
    """
    The answer to one arrangement query.

    ``outcome`` is "path", "uncovered" or "infeasible". For "path", ``path_index`` is the
    lowest index of a path with no blocked column and ``waypoints`` its vertex positions.
    ``boundary_ambiguous`` is set when some position lay within EPS_SNAP of a cut; such cuts
    are resolved toward the invalidating side.
    """

    outcome: str
    signature: np.ndarray
    leaves: Tuple[int, ...]
    stats: QueryStats
    path_index: int = -1
    waypoints: Optional[np.ndarray] = None
    boundary_ambiguous: bool = False

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "path_index": int(self.path_index),
            "waypoints": None if self.waypoints is None else self.waypoints.tolist(),
            "signature": self.signature.tobytes().hex(),
            "leaves": [int(x) for x in self.leaves],
            "boundary_ambiguous": bool(self.boundary_ambiguous),
            "stats": self.stats.to_dict(),
        }


class CoverQueryCore:
    """
    Flat index of a coverage artifact answering queries with tree traversals and one bit
    matrix-vector product, without polygon intersection tests.
    """

    def __init__(self, path_data=None) -> None:
        """
        :param path_data:   The directory of the index files, used by read() and write() when
                            no path is given to them.
        """
        self._init_for_multiprocessing = False
        self.n_obstacles = 0
        self.n_columns = 0
        self.n_terminals = 0
        self.n_starts = 0
        self.n_paths = 0
        self.index = []

        if path_data:
            self.path_data = Path(path_data)
        else:
            self.path_data = None

        self.index_names = [
            "tree_root",
            "tree_depth",
            "tree_node_start",
            "tree_leaf_start",
            "node_column",
            "node_left",
            "node_right",
            "node_plane_start",
            "planes",
            "leaf_signature",
            "incidence",
            "path_vertex",
            "path_start",
            "vertex_xy",
        ]
        self.index_dtypes = {
            "tree_root": np.int64,
            "tree_depth": np.int64,
            "tree_node_start": np.int64,
            "tree_leaf_start": np.int64,
            "node_column": np.int64,
            "node_left": np.int64,
            "node_right": np.int64,
            "node_plane_start": np.int64,
            "planes": np.float64,
            "leaf_signature": np.uint8,
            "incidence": np.uint8,
            "path_vertex": np.int64,
            "path_start": np.int64,
            "vertex_xy": np.float64,
        }

    @property
    def n_bytes(self) -> int:
        return (self.n_columns + 7) // 8

    def build_index(self, trees, path_set, roadmap):
        """
        Build the index from the decomposition trees, the path set and the roadmap of an artifact.

        Child references inside a tree keep their meaning: ``>= 0`` is a node of the same tree
        and ``< 0`` the leaf ``-(ref + 1)`` of the same tree.
        """
        assert all(tree.n_columns == path_set.n_columns for tree in trees), "The trees and the path set have different columns."
        self.n_obstacles = len(trees)
        self.n_columns = path_set.n_columns
        self.n_terminals = path_set.n_terminals
        self.n_starts = path_set.n_starts
        self.n_paths = path_set.n_paths

        ############## Step 1: Flatten the trees. ##############
        tree_root, tree_depth, tree_node_start, tree_leaf_start = [], [], [0], [0]
        node_column, node_left, node_right, node_plane_start, planes, leaf_signature = [], [], [], [0], [], []
        for tree in trees:
            tree_root.append(tree.root)
            tree_depth.append(tree.depth)
            tree_node_start.append(tree_node_start[-1] + tree.n_nodes)
            tree_leaf_start.append(tree_leaf_start[-1] + tree.n_leaves)
            node_column.extend(tree.node_column.tolist())
            node_left.extend(tree.node_left.tolist())
            node_right.extend(tree.node_right.tolist())
            for column in tree.node_column:
                node_planes = tree.column_planes(int(column))
                planes.append(node_planes)
                node_plane_start.append(node_plane_start[-1] + len(node_planes))
            leaf_signature.append(tree.leaf_signatures)

        ############## Step 2: Collect the paths. ##############
        path_start = np.zeros(path_set.n_paths + 1, dtype=np.int64)
        path_start[1:] = np.cumsum([len(p) for p in path_set.paths])
        path_vertex = np.asarray([v for p in path_set.paths for v in p], dtype=np.int64)

        self.index = [
            np.asarray(tree_root, dtype=np.int64),
            np.asarray(tree_depth, dtype=np.int64),
            np.asarray(tree_node_start, dtype=np.int64),
            np.asarray(tree_leaf_start, dtype=np.int64),
            np.asarray(node_column, dtype=np.int64),
            np.asarray(node_left, dtype=np.int64),
            np.asarray(node_right, dtype=np.int64),
            np.asarray(node_plane_start, dtype=np.int64),
            np.vstack(planes).astype(np.float64) if planes else np.zeros((0, 3), dtype=np.float64),
            np.vstack(leaf_signature).astype(np.uint8) if leaf_signature else np.zeros((0, self.n_bytes), dtype=np.uint8),
            np.asarray(path_set.incidence, dtype=np.uint8).reshape((path_set.n_paths, self.n_bytes)),
            path_vertex,
            path_start,
            np.asarray(roadmap.vertex_xy, dtype=np.float64).reshape((-1, 2)),
        ]
        return self.index

    def locate(self, obstacle: int, position) -> Tuple[int, bool, int]:
        """
        Traverse one tree for exactly depth(tree) steps. At a leaf the traversal stays put, so
        the step count is the same for every position.

        :return:    (leaf index within the tree, boundary ambiguous, steps).
        """
        tree_root, tree_depth, tree_node_start, _, _, node_left, node_right, node_plane_start, planes = self.index[:9]
        x, y = position
        node_offset = tree_node_start[obstacle]
        ref = int(tree_root[obstacle])
        ambiguous = False
        depth = int(tree_depth[obstacle])
        for _ in range(depth):
            if ref < 0:
                continue
            node = node_offset + ref
            node_planes = planes[node_plane_start[node] : node_plane_start[node + 1]]
            distance = np.max(node_planes[:, 0] * x + node_planes[:, 1] * y - node_planes[:, 2])
            if abs(distance) <= EPS_SNAP:
                ambiguous = True
            ref = int(node_left[node]) if distance <= EPS_SNAP else int(node_right[node])
        return -(ref + 1), ambiguous, depth

    def search(self, positions) -> QueryResult:
        """
        Answer a query for positions given in obstacle order, shape (n_obstacles, 2).
        Callers validate that each position lies in its configuration region.
        """
        positions = np.asarray(positions, dtype=np.float64).reshape((-1, 2))
        assert positions.shape[0] == self.n_obstacles, "One position per movable obstacle is expected."
        tree_leaf_start = self.index[3]
        leaf_signature, incidence, path_vertex, path_start, vertex_xy = self.index[9:]

        ############## Step 1: Locate the leaves and OR their signatures. ##############
        stats = QueryStats()
        signature = np.zeros(self.n_bytes, dtype=np.uint8)
        leaves, ambiguous = [], False
        for i in range(self.n_obstacles):
            leaf, leaf_ambiguous, steps = self.locate(i, positions[i])
            leaves.append(leaf)
            ambiguous |= leaf_ambiguous
            stats.tree_steps += steps
            signature |= leaf_signature[tree_leaf_start[i] + leaf]

        ############## Step 2: Terminal columns. ##############
        terminal_bits = np.unpackbits(signature, count=self.n_terminals).astype(bool)
        if np.all(terminal_bits[: self.n_starts]) or np.all(terminal_bits[self.n_starts :]):
            return QueryResult(OUTCOME_INFEASIBLE, signature, tuple(leaves), stats, boundary_ambiguous=ambiguous)

        ############## Step 3: Blocked columns per path. ##############
        blocked = popcount(incidence & signature[None, :])
        stats.matvec_bit_ops = self.n_paths * self.n_columns
        free = np.flatnonzero(blocked == 0)
        if len(free) == 0:
            return QueryResult(OUTCOME_UNCOVERED, signature, tuple(leaves), stats, boundary_ambiguous=ambiguous)

        path_index = int(free[0])
        waypoints = vertex_xy[path_vertex[path_start[path_index] : path_start[path_index + 1]]]
        return QueryResult(OUTCOME_PATH, signature, tuple(leaves), stats, path_index, np.array(waypoints), ambiguous)

    def save_memory_for_multiprocessing(self):
        """
        Move the numpy arrays of the index to shared memory.
        Not required with one worker; with several it avoids one copy of the index per worker.
        """
        if self._init_for_multiprocessing:
            return

        for i, array in enumerate(self.index):
            self.index[i] = convert_numpy_array_to_shared_memory(array)
        self._init_for_multiprocessing = True

    def read(self, path_data=None):
        """
        Read the index from the specified directory.
        """
        try:
            if path_data is None:
                path_data = self.path_data

            path_data = Path(path_data)
            with open(path_data / "information.json", "r") as f:
                information = json.load(f)
            self.n_obstacles = information["n_obstacles"]
            self.n_columns = information["n_columns"]
            self.n_terminals = information["n_terminals"]
            self.n_starts = information["n_starts"]
            self.n_paths = information["n_paths"]

            self.index = []
            for name in self.index_names:
                array = np.fromfile(path_data / f"{name}.npy", dtype=self.index_dtypes[name])
                self.index.append(array.reshape(information["shapes"][name]))
            return True
        except (OSError, KeyError, ValueError) as e:
            logger.error("Failed to read the query index from %s: %s", path_data, e)
            return False

    def write(self, path_data=None):
        """
        Write the index to the specified directory.
        """
        if path_data is None:
            path_data = self.path_data

        path_data = Path(path_data)
        path_data.mkdir(parents=True, exist_ok=True)
        for i, name in enumerate(self.index_names):
            self.index[i].tofile(str(path_data / f"{name}.npy"))
        information = {
            "n_obstacles": int(self.n_obstacles),
            "n_columns": int(self.n_columns),
            "n_terminals": int(self.n_terminals),
            "n_starts": int(self.n_starts),
            "n_paths": int(self.n_paths),
            "shapes": {name: list(self.index[i].shape) for i, name in enumerate(self.index_names)},
        }
        with open(path_data / "information.json", "w") as f:
            json.dump(information, f, sort_keys=True)
