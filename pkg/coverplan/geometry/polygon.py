#!/usr/bin/env python3
"""
Planar polygon kernel.

Regions are thin wrappers around shapely (multi)polygons. Boolean operations are
evaluated with snap rounding on a grid of ``EPS_SNAP`` meters and every loop whose
area falls below ``EPS_AREA`` is dropped from the result with a recorded warning.
Convex polygons are stored as counter-clockwise numpy vertex arrays, which keeps the
Minkowski sum and the swept hull down to a pairwise vertex sum followed by a hull.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import LineString, MultiPolygon, Point, Polygon
from shapely.geometry.polygon import orient

from ..errors import BoundaryAmbiguous, DegenerateGeometry

logger = logging.getLogger(__name__)

EPS_SNAP = 1e-9
EPS_AREA = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point2 coordinates must be finite, got ({self.x}, {self.y}).")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)

    def distance(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2

    @property
    def length(self) -> float:
        return self.a.distance(self.b)

    @property
    def is_degenerate(self) -> bool:
        return self.length <= EPS_SNAP


def _as_points(points) -> np.ndarray:
    if isinstance(points, Point2):
        points = [points.as_array()]
    elif isinstance(points, ConvexPolygon):
        return points.vertices
    points = np.asarray([p.as_array() if isinstance(p, Point2) else p for p in points], dtype=np.float64)
    points = points.reshape((-1, 2))
    assert np.all(np.isfinite(points)), "Coordinates must be finite."
    return points


def _signed_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _hull_vertices(points: np.ndarray) -> np.ndarray:
    """Return the convex hull of a point cloud as CCW vertices starting at the lowest (x, y)."""
    hull = shapely.MultiPoint(points).convex_hull
    if isinstance(hull, Polygon):
        coords = np.asarray(orient(hull, 1.0).exterior.coords, dtype=np.float64)[:-1]
    elif isinstance(hull, LineString):
        coords = np.asarray(hull.coords, dtype=np.float64)
    else:
        coords = np.asarray(hull.coords, dtype=np.float64).reshape((-1, 2))

    if coords.shape[0] >= 3:
        # Remove collinear vertices.
        prev_edge = coords - np.roll(coords, 1, axis=0)
        next_edge = np.roll(coords, -1, axis=0) - coords
        cross = prev_edge[:, 0] * next_edge[:, 1] - prev_edge[:, 1] * next_edge[:, 0]
        coords = coords[np.abs(cross) > EPS_AREA]

    if coords.shape[0] > 1:
        first = np.lexsort((coords[:, 1], coords[:, 0]))[0]
        coords = np.roll(coords, -first, axis=0)
    return np.ascontiguousarray(coords)


class ConvexPolygon:
    """
    A convex polygon stored as counter-clockwise vertices.

    Footprints must have positive area. Hulls produced internally (for example the swept
    hull of a point robot) may be degenerate: a single point or a segment. Those are
    created through :meth:`hull_of` and report ``is_degenerate``.
    """

    __slots__ = ("vertices", "_shape")

    def __init__(self, vertices, allow_degenerate: bool = False):
        points = _as_points(vertices)
        hull = _hull_vertices(points)
        if points.shape[0] >= 3 and hull.shape[0] >= 3:
            loop_area = abs(_signed_area(points))
            hull_area = abs(_signed_area(hull))
            if abs(hull_area - loop_area) > 1e-9 * max(1.0, hull_area):
                raise ValueError("The vertices do not describe a convex polygon.")
        if not allow_degenerate and (hull.shape[0] < 3 or abs(_signed_area(hull)) <= EPS_AREA):
            raise DegenerateGeometry("A convex polygon needs at least 3 non-collinear vertices and a positive area.")
        hull.setflags(write=False)
        self.vertices = hull
        self._shape = None

    @classmethod
    def hull_of(cls, points, allow_degenerate: bool = True) -> "ConvexPolygon":
        """Build the convex hull of an arbitrary point cloud."""
        polygon = cls.__new__(cls)
        hull = _hull_vertices(_as_points(points))
        if not allow_degenerate and (hull.shape[0] < 3 or abs(_signed_area(hull)) <= EPS_AREA):
            raise DegenerateGeometry("The hull of the given points has no area.")
        hull.setflags(write=False)
        polygon.vertices = hull
        polygon._shape = None
        return polygon

    @property
    def is_degenerate(self) -> bool:
        return self.vertices.shape[0] < 3

    @property
    def area(self) -> float:
        if self.is_degenerate:
            return 0.0
        return abs(_signed_area(self.vertices))

    @property
    def shape(self):
        """The shapely geometry: a Polygon, or a LineString / Point when degenerate."""
        if self._shape is None:
            if self.vertices.shape[0] >= 3:
                self._shape = Polygon(self.vertices)
            elif self.vertices.shape[0] == 2:
                self._shape = LineString(self.vertices)
            else:
                self._shape = Point(self.vertices[0])
            shapely.prepare(self._shape)
        return self._shape

    @property
    def circumradius(self) -> float:
        """The largest distance from the reference point (local origin) to a vertex."""
        return float(np.max(np.hypot(self.vertices[:, 0], self.vertices[:, 1])))

    @property
    def diameter(self) -> float:
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.hypot(diff[..., 0], diff[..., 1])))

    def translated(self, offset) -> "ConvexPolygon":
        offset = np.asarray(tuple(offset), dtype=np.float64)
        return ConvexPolygon.hull_of(self.vertices + offset)

    def reflected(self) -> "ConvexPolygon":
        """Reflect about the local origin, i.e. -O."""
        return ConvexPolygon.hull_of(-self.vertices)

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(np.all(self.vertices == other.vertices))

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()})"


def _polygonal_parts(geometry) -> List[Polygon]:
    if geometry is None or geometry.is_empty:
        return []
    if isinstance(geometry, Polygon):
        return [geometry]
    if isinstance(geometry, MultiPolygon):
        return list(geometry.geoms)
    if hasattr(geometry, "geoms"):
        parts = []
        for item in geometry.geoms:
            parts.extend(_polygonal_parts(item))
        return parts
    return []


class Region:
    """
    A planar region: outer loops (CCW) with holes (CW).

    Construct from loops with ``Region(outer_loops, hole_loops)``; every hole must lie
    inside exactly one outer loop. Results of boolean operations are created through
    :meth:`from_geometry`, which drops loops below ``EPS_AREA``.
    """

    __slots__ = ("geometry", "dropped_loops")

    def __init__(self, outer_loops: Sequence = (), hole_loops: Sequence = ()):
        shells = [np.asarray(loop, dtype=np.float64).reshape((-1, 2)) for loop in outer_loops]
        holes = [np.asarray(loop, dtype=np.float64).reshape((-1, 2)) for loop in hole_loops]
        for loop in shells + holes:
            if loop.shape[0] < 3 or not np.all(np.isfinite(loop)):
                raise ValueError("Every loop needs at least 3 finite vertices.")

        shell_polygons = [Polygon(loop) for loop in shells]
        shell_holes = [[] for _ in shells]
        for hole_idx, hole in enumerate(holes):
            hole_polygon = Polygon(hole)
            owners = [i for i, shell in enumerate(shell_polygons) if shell.contains(hole_polygon)]
            if len(owners) != 1:
                raise ValueError(f"Hole {hole_idx} must lie inside exactly one outer loop, found {len(owners)}.")
            shell_holes[owners[0]].append(hole)

        polygons = []
        for shell, shell_hole_list in zip(shells, shell_holes):
            polygon = orient(Polygon(shell, shell_hole_list), 1.0)
            if not polygon.is_valid:
                raise ValueError("Region loops must be simple and non-crossing.")
            polygons.append(polygon)
        for i in range(len(polygons)):
            for j in range(i + 1, len(polygons)):
                if polygons[i].intersection(polygons[j]).area > EPS_AREA:
                    raise ValueError("Outer loops of a region must not overlap.")

        self.geometry = _make_geometry(polygons)
        self.dropped_loops = 0
        shapely.prepare(self.geometry)

    @classmethod
    def empty(cls) -> "Region":
        return cls()

    @classmethod
    def from_geometry(cls, geometry) -> "Region":
        """Wrap a shapely geometry, keeping polygonal parts and dropping loops below EPS_AREA."""
        polygons, dropped = [], 0
        for polygon in _polygonal_parts(geometry):
            if Polygon(polygon.exterior).area <= EPS_AREA:
                dropped += 1 + len(polygon.interiors)
                continue
            interiors = []
            for ring in polygon.interiors:
                if Polygon(ring).area <= EPS_AREA:
                    dropped += 1
                else:
                    interiors.append(ring)
            polygons.append(orient(Polygon(polygon.exterior, interiors), 1.0))

        region = cls.__new__(cls)
        region.geometry = _make_geometry(polygons)
        region.dropped_loops = dropped
        shapely.prepare(region.geometry)
        if dropped:
            logger.debug("Dropped %d degenerate loop(s) below %g m^2.", dropped, EPS_AREA)
            warnings.warn(DegenerateGeometry(f"{dropped} loop(s) collapsed below {EPS_AREA} m^2 and were dropped."), stacklevel=3)
        return region

    @classmethod
    def from_convex(cls, polygon: ConvexPolygon) -> "Region":
        if polygon.is_degenerate:
            return cls.empty()
        return cls([polygon.vertices])

    @classmethod
    def rectangle(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> "Region":
        return cls([[(x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)]])

    @property
    def polygons(self) -> List[Polygon]:
        return _polygonal_parts(self.geometry)

    @property
    def outer_loops(self) -> List[np.ndarray]:
        return [np.asarray(p.exterior.coords, dtype=np.float64)[:-1] for p in self.polygons]

    @property
    def hole_loops(self) -> List[np.ndarray]:
        return [np.asarray(ring.coords, dtype=np.float64)[:-1] for p in self.polygons for ring in p.interiors]

    @property
    def area(self) -> float:
        return float(self.geometry.area)

    @property
    def is_empty(self) -> bool:
        return self.geometry.is_empty or self.area <= EPS_AREA

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return tuple(float(v) for v in self.geometry.bounds)

    def components(self) -> List["Region"]:
        return [Region.from_geometry(p) for p in self.polygons]

    def translated(self, offset) -> "Region":
        dx, dy = tuple(offset)
        return Region.from_geometry(shapely.transform(self.geometry, lambda xy: xy + np.array([dx, dy])))

    def boundary_distance(self, point) -> float:
        x, y = tuple(point)
        if self.geometry.is_empty:
            return math.inf
        return float(shapely.distance(self.geometry.boundary, Point(x, y)))

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        if self.geometry.is_empty and other.geometry.is_empty:
            return True
        return bool(shapely.normalize(self.geometry).equals_exact(shapely.normalize(other.geometry), 0.0))

    def __repr__(self):
        return f"Region(components={len(self.polygons)}, area={self.area:.6g})"


def _make_geometry(polygons: List[Polygon]):
    if not polygons:
        return Polygon()
    if len(polygons) == 1:
        return polygons[0]
    return MultiPolygon(polygons)


def area(region: Region) -> float:
    """Shoelace area of the outer loops minus the holes."""
    return region.area


def boolean(op: str, a: Region, b: Region) -> Region:
    """
    Evaluate ``union``, ``intersection`` or ``difference`` of two regions with snap rounding.

    :param op:  One of "union", "intersection", "difference".
    :return:    The resulting region. Loops collapsing below EPS_AREA are dropped and a
                :class:`DegenerateGeometry` warning is recorded.
    """
    if op == "union":
        result = shapely.union(a.geometry, b.geometry, grid_size=EPS_SNAP)
    elif op == "intersection":
        result = shapely.intersection(a.geometry, b.geometry, grid_size=EPS_SNAP)
    elif op == "difference":
        result = shapely.difference(a.geometry, b.geometry, grid_size=EPS_SNAP)
    else:
        raise ValueError(f"Unknown boolean operation: {op}")
    return Region.from_geometry(result)


def union_all(regions: Iterable[Region]) -> Region:
    geometries = [r.geometry for r in regions if not r.geometry.is_empty]
    if not geometries:
        return Region.empty()
    return Region.from_geometry(shapely.union_all(geometries, grid_size=EPS_SNAP))


ConvexLike = Union[ConvexPolygon, Point2, np.ndarray, Sequence]


def minkowski_sum_convex(a: ConvexLike, b: ConvexLike) -> ConvexPolygon:
    """
    Minkowski sum of two convex sets, computed as the hull of all pairwise vertex sums.

    Either operand may be a single point, which reduces the sum to a translation.
    """
    points_a = _as_points(a)
    points_b = _as_points(b)
    sums = (points_a[:, None, :] + points_b[None, :, :]).reshape((-1, 2))
    return ConvexPolygon.hull_of(sums)


def swept_hull(shape: ConvexLike, from_point, to_point) -> ConvexPolygon:
    """
    The region swept by a translating convex shape between two placements.

    For pure translation of a convex shape this hull is the exact swept volume.
    """
    vertices = _as_points(shape)
    start = np.asarray(tuple(from_point), dtype=np.float64)
    end = np.asarray(tuple(to_point), dtype=np.float64)
    return ConvexPolygon.hull_of(np.vstack((vertices + start, vertices + end)))


def swept_hulls(shape: ConvexLike, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Vectorized :func:`swept_hull` returning an array of shapely geometries."""
    vertices = _as_points(shape)
    starts = np.asarray(starts, dtype=np.float64).reshape((-1, 2))
    ends = np.asarray(ends, dtype=np.float64).reshape((-1, 2))
    if starts.shape[0] == 0:
        return np.empty(0, dtype=object)
    coords = np.concatenate((vertices[None, :, :] + starts[:, None, :], vertices[None, :, :] + ends[:, None, :]), axis=1)
    return shapely.convex_hull(shapely.multipoints(coords))


def placed_shapes(shape: ConvexLike, positions: np.ndarray) -> np.ndarray:
    """Vectorized placement of a convex shape at many reference positions."""
    vertices = _as_points(shape)
    positions = np.asarray(positions, dtype=np.float64).reshape((-1, 2))
    if positions.shape[0] == 0:
        return np.empty(0, dtype=object)
    coords = vertices[None, :, :] + positions[:, None, :]
    if vertices.shape[0] >= 3:
        return shapely.polygons(coords)
    return shapely.convex_hull(shapely.multipoints(coords))


def minkowski_sum_region(region: Region, convex: ConvexLike) -> Region:
    """
    Minkowski sum of an arbitrary region with a convex set.

    The result is the region translated by any vertex of the convex set, united with the
    convex set swept along every boundary edge (outer loops and holes alike).
    """
    if region.geometry.is_empty:
        return Region.empty()
    vertices = _as_points(convex)
    pieces = [shapely.transform(region.geometry, lambda xy: xy + vertices[0])]
    for loop in region.outer_loops + region.hole_loops:
        hulls = swept_hulls(vertices, loop, np.roll(loop, -1, axis=0))
        pieces.extend(h for h in hulls if isinstance(h, Polygon))
    return Region.from_geometry(shapely.union_all(pieces, grid_size=EPS_SNAP))


def contains(region: Region, point) -> bool:
    """
    Even-odd containment test.

    :raises BoundaryAmbiguous: if the point lies within EPS_SNAP of the region boundary.
    """
    x, y = tuple(point)
    if region.geometry.is_empty:
        return False
    if region.boundary_distance((x, y)) <= EPS_SNAP:
        raise BoundaryAmbiguous(f"Point ({x}, {y}) lies within {EPS_SNAP} m of the region boundary.")
    return bool(shapely.contains_xy(region.geometry, x, y))


def intersects(region: Region, shape: ConvexPolygon) -> bool:
    """True iff the convex shape and the closed region share at least one point."""
    if region.geometry.is_empty:
        return False
    return bool(shapely.intersects(region.geometry, shape.shape))
