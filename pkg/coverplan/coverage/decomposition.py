#!/usr/bin/env python3
"""
Per-obstacle decomposition of the configuration region.

For every signature column the envelope is the set of obstacle reference positions whose
footprint meets the robot's swept hull along that column:

    envelope = swept_hull(robot, a, b) (+) (-O) = swept_hull(robot (+) (-O), a, b)

The decomposition tree splits the region by the envelopes in column order. The left child of a
node holds the placements inside the envelope (they invalidate the column), the right
child the placements outside. Leaves carry their region, area and signature.
"""
import logging
import warnings
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence

import numpy as np
import shapely

from ..errors import DegenerateGeometry, OutOfRegion
from ..geometry import EPS_AREA, EPS_SNAP, ConvexPolygon, Region, boolean, minkowski_sum_convex, swept_hull
from ..parallel import parallel_map
from ..roadmap import Roadmap, pack_bits, resize_packed, unpack_bits
from ..scene import MovableObstacleSpec

logger = logging.getLogger(__name__)


@dataclass
class Envelope:
    column_id: int
    region: Region


@dataclass
class Leaf:
    region: Region
    signature: np.ndarray
    area: float


@dataclass
class LocateResult:
    leaf: int
    ambiguous: bool
    steps: int


def column_envelopes(roadmap: Roadmap, spec: MovableObstacleSpec, first_column: int = 0) -> List[ConvexPolygon]:
    """The convex envelope of every column from first_column on, before clipping to the region."""
    grown_robot = minkowski_sum_convex(roadmap.scene.robot, spec.reflected_footprint)
    envelopes = []
    for column in range(first_column, roadmap.n_columns):
        a, b = roadmap.column_endpoints(column)
        envelopes.append(swept_hull(grown_robot, a, b))
    return envelopes


def envelope_planes(polygon: ConvexPolygon) -> np.ndarray:
    """
    Half-planes (nx, ny, c) of a convex polygon with unit outward normals.

    A point p is inside iff max(n . p - c) <= 0, and that maximum is a lower bound of the
    distance to the polygon for points outside.
    """
    vertices = polygon.vertices
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    normals = np.column_stack((edges[:, 1], -edges[:, 0])) / lengths[:, None]
    offsets = np.sum(normals * vertices, axis=1)
    return np.column_stack((normals, offsets))


def signed_distance(planes: np.ndarray, point) -> float:
    x, y = tuple(point)
    return float(np.max(planes[:, 0] * x + planes[:, 1] * y - planes[:, 2]))


class DecompositionTree:
    """
    Binary space partition of one obstacle's effective configuration region.

    Internal nodes are stored as flat arrays. A child reference ``>= 0`` is a node index and a
    reference ``< 0`` is the leaf ``-(ref + 1)``. Leaves are numbered in left-first depth-first
    order, so refining a tree and rebuilding it from scratch give the same numbering.
    """

    def __init__(self, spec: MovableObstacleSpec):
        self.obstacle_id = spec.id
        self.spec = spec
        self.n_columns = 0
        self.n_terminals = 0
        self.n_starts = 0
        self.envelopes: List[ConvexPolygon] = []
        self.node_column = np.zeros(0, dtype=np.int64)
        self.node_left = np.zeros(0, dtype=np.int64)
        self.node_right = np.zeros(0, dtype=np.int64)
        self.root = -1
        self.leaves: List[Leaf] = [Leaf(spec.effective_region, np.zeros(0, dtype=np.uint8), spec.effective_region.area)]
        # For every leaf of the previous generation, the leaves it was split into.
        self.lineage: List[List[int]] = [[0]]
        self.warnings: List[str] = []

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def n_nodes(self) -> int:
        return len(self.node_column)

    @property
    def region(self) -> Region:
        return self.spec.effective_region

    @property
    def leaf_areas(self) -> np.ndarray:
        return np.array([leaf.area for leaf in self.leaves], dtype=np.float64)

    @property
    def leaf_signatures(self) -> np.ndarray:
        """Packed leaf signatures with shape (n_leaves, ceil(n_columns / 8))."""
        n_bytes = (self.n_columns + 7) // 8
        return np.array([resize_packed(leaf.signature, self.n_columns) for leaf in self.leaves], dtype=np.uint8).reshape((-1, n_bytes))

    def signature_bits(self, leaf: int) -> np.ndarray:
        return unpack_bits(resize_packed(self.leaves[leaf].signature, self.n_columns), self.n_columns)

    @property
    def depth(self) -> int:
        """The number of internal nodes on the longest root-to-leaf path."""
        if self.root < 0:
            return 0
        depth, stack = 0, [(self.root, 1)]
        while stack:
            node, level = stack.pop()
            depth = max(depth, level)
            for child in (self.node_left[node], self.node_right[node]):
                if child >= 0:
                    stack.append((int(child), level + 1))
        return depth

    def clipped_envelopes(self) -> List[Envelope]:
        """Every envelope intersected with the region."""
        return [Envelope(k, boolean("intersection", Region.from_convex(env), self.region)) for k, env in enumerate(self.envelopes)]

    def column_planes(self, column: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_planes", {})
        if column not in cache:
            cache[column] = envelope_planes(self.envelopes[column])
        return cache[column]

    def locate(self, position) -> LocateResult:
        """
        Find the leaf containing a position.

        Positions within EPS_SNAP of a cut go to the invalidating (left) side and are flagged.

        :raises OutOfRegion:    if the position lies outside the region.
        """
        x, y = tuple(position)
        if not shapely.intersects_xy(self.region.geometry, x, y):
            raise OutOfRegion(f"Position ({x}, {y}) lies outside the configuration region of {self.obstacle_id!r}.")
        ambiguous, steps = False, 0
        ref = self.root
        while ref >= 0:
            distance = signed_distance(self.column_planes(int(self.node_column[ref])), (x, y))
            if abs(distance) <= EPS_SNAP:
                ambiguous = True
            ref = self.node_left[ref] if distance <= EPS_SNAP else self.node_right[ref]
            steps += 1
        return LocateResult(int(-(ref + 1)), ambiguous, steps)

    def copy(self) -> "DecompositionTree":
        tree = DecompositionTree.__new__(DecompositionTree)
        tree.__dict__.update(self.__dict__)
        tree.envelopes = list(self.envelopes)
        tree.leaves = list(self.leaves)
        tree.lineage = [list(x) for x in self.lineage]
        tree.warnings = list(self.warnings)
        return tree

    def __repr__(self):
        return f"DecompositionTree({self.obstacle_id!r}, nodes={self.n_nodes}, leaves={self.n_leaves}, columns={self.n_columns})"


def partition_obstacle_space(roadmap: Roadmap, spec: MovableObstacleSpec) -> DecompositionTree:
    """
    Build the decomposition tree of one obstacle for the current roadmap columns.

    :param roadmap: The roadmap whose columns (terminal vertices, then edges) split the region.
    :param spec:    The movable obstacle. Its footprint and effective region are used.
    :return:    The tree. Loops dropped by the boolean operations are listed in ``tree.warnings``.
    """
    return refine_tree(DecompositionTree(spec), roadmap)


def partition_all(roadmap: Roadmap, specs: Sequence[MovableObstacleSpec], threads: Optional[int] = None) -> List[DecompositionTree]:
    """One tree per obstacle, built in parallel when allowed."""
    return parallel_map(partial(partition_obstacle_space, roadmap), list(specs), threads=threads)


def refine_all(trees: Sequence[DecompositionTree], roadmap: Roadmap, threads: Optional[int] = None) -> List[DecompositionTree]:
    return parallel_map(partial(_refine_tree_for_map, roadmap), list(trees), threads=threads)


def _refine_tree_for_map(roadmap, tree):
    return refine_tree(tree, roadmap)


def refine_tree(tree: DecompositionTree, roadmap: Roadmap) -> DecompositionTree:
    """
    Split the leaves of a tree by the envelopes of the roadmap columns it has not seen yet.

    Existing leaves keep their signature prefix. ``result.lineage[i]`` lists the leaves that
    old leaf i became.

    :param tree:    A tree built for a prefix of the roadmap's columns.
    :param roadmap: The roadmap, extended append-only since the tree was built.
    :return:    A new tree. The input tree is not modified.
    """
    assert roadmap.n_columns >= tree.n_columns, "The roadmap has fewer columns than the tree."
    first_column = tree.n_columns
    n_columns = roadmap.n_columns
    if first_column == n_columns:
        result = tree.copy()
        result.lineage = [[i] for i in range(tree.n_leaves)]
        return result

    new_envelopes = column_envelopes(roadmap, tree.spec, first_column)
    for envelope in new_envelopes:
        shapely.prepare(envelope.shape)
    envelopes = tree.envelopes + new_envelopes
    envelope_regions = [None] * first_column + [Region.from_convex(env) for env in new_envelopes]

    node_column, node_left, node_right = [], [], []
    leaves: List[Leaf] = []
    lineage: List[List[int]] = [[] for _ in range(tree.n_leaves)]
    dropped = []

    def new_node(column):
        node_column.append(column)
        node_left.append(0)
        node_right.append(0)
        return len(node_column) - 1

    # Each task is (old node ref or None, region, signature bits, next column, old leaf, parent slot).
    # Old internal nodes are copied as they are met so the depth-first order is preserved.
    stack = [(tree.root, None, None, None, None, None)]
    root = None
    while stack:
        old_ref, region, bits, column, old_leaf, slot = stack.pop()

        if old_ref is not None and old_ref >= 0:
            node = new_node(int(tree.node_column[old_ref]))
            _attach(slot, node, node_left, node_right)
            root = node if slot is None else root
            stack.append((int(tree.node_right[old_ref]), None, None, None, None, (node, "right")))
            stack.append((int(tree.node_left[old_ref]), None, None, None, None, (node, "left")))
            continue

        if old_ref is not None:
            old_leaf = -(old_ref + 1)
            leaf = tree.leaves[old_leaf]
            region = leaf.region
            bits = np.zeros(n_columns, dtype=bool)
            bits[:first_column] = unpack_bits(resize_packed(leaf.signature, first_column), first_column)
            column = first_column

        split = None
        while column < n_columns:
            envelope = envelopes[column]
            if shapely.intersects(region.geometry, envelope.shape):
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", DegenerateGeometry)
                    inside = boolean("intersection", region, envelope_regions[column])
                    outside = boolean("difference", region, envelope_regions[column])
                dropped.extend(str(w.message) for w in caught)
                if inside.area <= EPS_AREA:
                    # A sliver overlap leaves the bit clear; it only misclassifies a null set.
                    pass
                elif outside.area <= EPS_AREA:
                    bits[column] = True
                else:
                    split = (inside, outside)
                    break
            column += 1

        if split is None:
            leaf_id = len(leaves)
            leaves.append(Leaf(region, pack_bits(bits), region.area))
            lineage[old_leaf].append(leaf_id)
            ref = -(leaf_id + 1)
            _attach(slot, ref, node_left, node_right)
            root = ref if slot is None else root
            continue

        node = new_node(column)
        _attach(slot, node, node_left, node_right)
        root = node if slot is None else root
        inside, outside = split
        bits_right = bits.copy()
        bits_left = bits.copy()
        bits_left[column] = True
        stack.append((None, outside, bits_right, column + 1, old_leaf, (node, "right")))
        stack.append((None, inside, bits_left, column + 1, old_leaf, (node, "left")))

    result = DecompositionTree.__new__(DecompositionTree)
    result.obstacle_id = tree.obstacle_id
    result.spec = tree.spec
    result.n_columns = n_columns
    result.n_terminals = roadmap.n_terminals
    result.n_starts = roadmap.n_starts
    result.envelopes = envelopes
    result.node_column = np.asarray(node_column, dtype=np.int64)
    result.node_left = np.asarray(node_left, dtype=np.int64)
    result.node_right = np.asarray(node_right, dtype=np.int64)
    result.root = int(root)
    result.leaves = leaves
    result.lineage = lineage
    result.warnings = tree.warnings + dropped
    for message in dropped:
        logger.warning("Tree %r: %s", tree.obstacle_id, message)
    logger.debug("Refined tree %r from %d to %d columns: %d leaves.", tree.obstacle_id, first_column, n_columns, len(leaves))
    return result


def _attach(slot, ref, node_left, node_right):
    if slot is None:
        return
    node, side = slot
    if side == "left":
        node_left[node] = ref
    else:
        node_right[node] = ref
