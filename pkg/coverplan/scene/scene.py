#!/usr/bin/env python3
"""
Scene model: static obstacles, movable obstacles with their configuration regions,
the robot footprint, start and goal configurations.

The robot translates in the plane, so a configuration is the position of the robot's
reference point and a roadmap edge sweeps the convex hull of its two placements.
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Tuple

import numpy as np
import shapely

from ..errors import EmptyConfigRegion, OutOfRegion, ValidationError
from ..geometry import EPS_AREA, ConvexPolygon, Point2, Region, boolean, intersects, placed_shapes, swept_hull, swept_hulls

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=True)
class MovableObstacleSpec:
    """
    A movable obstacle and the configuration region its reference point may occupy.

    ``effective_region`` is ``config_region`` minus ``exclusions``; it is computed once at
    construction and is the only region the rest of the package looks at.
    """

    id: str
    footprint: ConvexPolygon
    config_region: Region
    exclusions: Region = field(default_factory=Region.empty)
    effective_region: Region = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("movables.id", "the obstacle id must be a non-empty string")
        if self.footprint.is_degenerate:
            raise ValidationError(f"movables[{self.id}].footprint", "the footprint must have a positive area")
        if self.exclusions.is_empty:
            effective = self.config_region
        else:
            effective = boolean("difference", self.config_region, self.exclusions)
        if effective.area <= EPS_AREA:
            raise EmptyConfigRegion(f"movables[{self.id}].config_region", "the configuration region minus the exclusions is empty")
        object.__setattr__(self, "effective_region", effective)

    @property
    def reflected_footprint(self) -> ConvexPolygon:
        """-O, the footprint reflected about its reference point."""
        return self.footprint.reflected()

    def with_footprint(self, footprint: ConvexPolygon) -> "MovableObstacleSpec":
        return dataclasses.replace(self, footprint=footprint)


@dataclass(frozen=True)
class Arrangement:
    """One placement m_i of every movable obstacle, keyed by obstacle id."""

    positions: Mapping[str, Point2]

    @classmethod
    def from_positions(cls, scene: "Scene", positions: Sequence) -> "Arrangement":
        """Build an arrangement from positions given in the scene's obstacle order."""
        assert len(positions) == len(scene.movables), "One position is needed per movable obstacle."
        return cls({spec.id: p if isinstance(p, Point2) else Point2(*p) for spec, p in zip(scene.movables, positions)})

    def as_array(self, scene: "Scene") -> np.ndarray:
        return np.array([tuple(self.positions[spec.id]) for spec in scene.movables], dtype=np.float64).reshape((-1, 2))


def _as_point(value, field_path: str) -> Point2:
    if isinstance(value, Point2):
        return value
    try:
        x, y = value
        return Point2(float(x), float(y))
    except (TypeError, ValueError) as e:
        raise ValidationError(field_path, f"expected a finite (x, y) pair: {e}") from e


@dataclass(frozen=True)
class Scene:
    """
    The inputs of a semi-static planning problem.

    :param robot:   The robot footprint, with the reference point at the local origin.
                    A single-vertex footprint is a point robot.
    :param static_obstacles:    O_f, the union of all static obstacles.
    :param movables:    The movable obstacle specifications, ids unique.
    :param starts:  The start configurations.
    :param goals:   The finite set of goal configurations.
    :param workspace_bounds:    (x_min, y_min, x_max, y_max).
    """

    robot: ConvexPolygon
    static_obstacles: Region
    movables: Tuple[MovableObstacleSpec, ...]
    starts: Tuple[Point2, ...]
    goals: Tuple[Point2, ...]
    workspace_bounds: Tuple[float, float, float, float]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "movables", tuple(self.movables))
        object.__setattr__(self, "starts", tuple(_as_point(p, f"starts[{i}]") for i, p in enumerate(self.starts)))
        object.__setattr__(self, "goals", tuple(_as_point(p, f"goals[{i}]") for i, p in enumerate(self.goals)))
        object.__setattr__(self, "workspace_bounds", tuple(float(v) for v in self.workspace_bounds))

        x_min, y_min, x_max, y_max = self.workspace_bounds
        if not (x_min < x_max and y_min < y_max):
            raise ValidationError("workspace_bounds", "expected x_min < x_max and y_min < y_max")
        if not self.starts:
            raise ValidationError("starts", "at least one start configuration is required")
        if not self.goals:
            raise ValidationError("goals", "at least one goal configuration is required")

        for name, points in (("starts", self.starts), ("goals", self.goals)):
            for i, point in enumerate(points):
                if not (x_min <= point.x <= x_max and y_min <= point.y <= y_max):
                    raise ValidationError(f"{name}[{i}]", "outside the workspace bounds")
                if intersects(self.static_obstacles, self.robot.translated(point)):
                    raise ValidationError(f"{name}[{i}]", "the robot collides with a static obstacle")

        ids = [spec.id for spec in self.movables]
        for i, obstacle_id in enumerate(ids):
            if obstacle_id in ids[:i]:
                raise ValidationError(f"movables[{i}].id", f"duplicate obstacle id {obstacle_id!r}")

    @property
    def n_movables(self) -> int:
        return len(self.movables)

    @property
    def movable_ids(self) -> Tuple[str, ...]:
        return tuple(spec.id for spec in self.movables)

    @property
    def terminals(self) -> Tuple[Point2, ...]:
        return self.starts + self.goals

    def movable(self, obstacle_id: str) -> MovableObstacleSpec:
        for spec in self.movables:
            if spec.id == obstacle_id:
                return spec
        raise KeyError(obstacle_id)

    def with_footprints(self, footprints: Mapping[str, ConvexPolygon]) -> "Scene":
        """Return a copy of the scene with some movable footprints replaced."""
        unknown = set(footprints) - set(self.movable_ids)
        if unknown:
            raise ValidationError("footprints", f"unknown obstacle id(s): {sorted(unknown)}")
        movables = tuple(spec.with_footprint(footprints[spec.id]) if spec.id in footprints else spec for spec in self.movables)
        return dataclasses.replace(self, movables=movables)

    def in_bounds(self, point) -> bool:
        x, y = tuple(point)
        x_min, y_min, x_max, y_max = self.workspace_bounds
        return x_min <= x <= x_max and y_min <= y <= y_max

    def edge_is_free(self, a, b) -> bool:
        """True iff the robot sweeping from a to b avoids the static obstacles."""
        return not intersects(self.static_obstacles, swept_hull(self.robot, a, b))

    def check_arrangement(self, arrangement: Arrangement):
        """
        Validate an arrangement against the effective configuration regions.

        :raises ValidationError:    if obstacle ids are missing or unknown.
        :raises OutOfRegion:        if a position lies outside its effective configuration region.
        """
        unknown = set(arrangement.positions) - set(self.movable_ids)
        if unknown:
            raise ValidationError("arrangement", f"unknown obstacle id(s): {sorted(unknown)}")
        for spec in self.movables:
            if spec.id not in arrangement.positions:
                raise ValidationError(f"arrangement.{spec.id}", "missing position")
            x, y = tuple(arrangement.positions[spec.id])
            if not shapely.intersects_xy(spec.effective_region.geometry, x, y):
                raise OutOfRegion(f"Position ({x}, {y}) of obstacle {spec.id!r} lies outside its configuration region.")


def collides(scene: Scene, robot_at, arrangement: Arrangement) -> bool:
    """
    Exact collision predicate: the robot placed at ``robot_at`` against the static obstacles
    and every movable footprint placed per the arrangement.
    """
    return bool(collides_many(scene, np.asarray([tuple(robot_at)], dtype=np.float64), arrangement)[0])


def collides_many(scene: Scene, robot_positions: np.ndarray, arrangement: Arrangement) -> np.ndarray:
    """Vectorized :func:`collides` over an array of robot positions with shape (K, 2)."""
    robot_positions = np.asarray(robot_positions, dtype=np.float64).reshape((-1, 2))
    robots = placed_shapes(scene.robot, robot_positions)
    if robots.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    hit = np.zeros(robots.shape[0], dtype=bool)
    if not scene.static_obstacles.geometry.is_empty:
        hit |= shapely.intersects(robots, scene.static_obstacles.geometry)
    for spec in scene.movables:
        footprint = spec.footprint.translated(arrangement.positions[spec.id]).shape
        hit |= shapely.intersects(robots, footprint)
    return hit


def sweep_collides(scene: Scene, a, b, arrangement: Arrangement) -> bool:
    """Exact swept test of one straight motion against the static world and a placed arrangement."""
    hull = swept_hulls(scene.robot, [tuple(a)], [tuple(b)])[0]
    if not scene.static_obstacles.geometry.is_empty and shapely.intersects(hull, scene.static_obstacles.geometry):
        return True
    return any(bool(shapely.intersects(hull, spec.footprint.translated(arrangement.positions[spec.id]).shape)) for spec in scene.movables)
