#!/usr/bin/env python3
"""
Desk-scale scenes shipped with the package.

``table_pick``, ``shelf_high`` and ``shelf_low`` are planar analogues of a tabletop pick
and two shelf compartments. The remaining scenes have hand-computable answers and are
used by the tests:

    analytic_strip      A point robot crossing the region [0, 5]^2 along y = 2.5 with a
                        unit square movable. The direct edge blocks [0, 5] x [2, 3], so
                        the roadmap made of that edge alone covers exactly 0.8.
    single_corridor     One corridor. Placements in the corridor part of the region seal it.
    two_corridor        Two corridors. The movable can only seal the lower one.
    open_field          No movables.
    two_edge_overlap    Two edges whose envelopes overlap inside the region, giving four leaves.
"""
import logging
from typing import Callable, Dict, Sequence

from ..errors import ValidationError
from ..geometry import ConvexPolygon, Region, regular_polygon, square
from .scene import MovableObstacleSpec, Scene

logger = logging.getLogger(__name__)

# Interior waypoint of the two-edge roadmap used with two_edge_overlap.
TWO_EDGE_APEX = (2.0, 1.5)


def point_robot() -> ConvexPolygon:
    return ConvexPolygon([(0.0, 0.0)], allow_degenerate=True)


def analytic_strip() -> Scene:
    return Scene(
        robot=point_robot(),
        static_obstacles=Region.empty(),
        movables=(MovableObstacleSpec("obs1", square(1.0), Region.rectangle(0.0, 0.0, 5.0, 5.0)),),
        starts=((-1.0, 2.5),),
        goals=((6.0, 2.5),),
        workspace_bounds=(-2.0, -1.0, 7.0, 6.0),
        name="analytic_strip",
    )


def open_field() -> Scene:
    return Scene(
        robot=square(0.1),
        static_obstacles=Region.rectangle(0.9, 0.0, 1.1, 0.2),
        movables=(),
        starts=((0.2, 0.5),),
        goals=((1.8, 0.5),),
        workspace_bounds=(0.0, 0.0, 2.0, 1.0),
        name="open_field",
    )


def single_corridor() -> Scene:
    walls = Region([[(1.0, 0.0), (2.0, 0.0), (2.0, 0.35), (1.0, 0.35)], [(1.0, 0.65), (2.0, 0.65), (2.0, 1.0), (1.0, 1.0)]])
    door_region = Region(
        [
            [(1.3, 0.45), (1.7, 0.45), (1.7, 0.55), (1.3, 0.55)],
            [(0.4, 0.05), (0.8, 0.05), (0.8, 0.2), (0.4, 0.2)],
        ]
    )
    return Scene(
        robot=square(0.1),
        static_obstacles=walls,
        movables=(MovableObstacleSpec("door", square(0.4), door_region),),
        starts=((0.3, 0.5),),
        goals=((2.7, 0.5),),
        workspace_bounds=(0.0, 0.0, 3.0, 1.0),
        name="single_corridor",
    )


def two_corridor() -> Scene:
    walls = Region(
        [
            [(1.0, 0.0), (2.0, 0.0), (2.0, 0.4), (1.0, 0.4)],
            [(1.0, 0.7), (2.0, 0.7), (2.0, 1.3), (1.0, 1.3)],
            [(1.0, 1.6), (2.0, 1.6), (2.0, 2.0), (1.0, 2.0)],
        ]
    )
    return Scene(
        robot=square(0.1),
        static_obstacles=walls,
        movables=(MovableObstacleSpec("door", square(0.4), Region.rectangle(1.4, 0.5, 1.6, 0.6)),),
        starts=((0.3, 0.55),),
        goals=((2.7, 0.55),),
        workspace_bounds=(0.0, 0.0, 3.0, 2.0),
        name="two_corridor",
    )


def two_edge_overlap() -> Scene:
    """A point robot and one movable. Add the path start, TWO_EDGE_APEX, goal to get two overlapping envelopes."""
    return Scene(
        robot=point_robot(),
        static_obstacles=Region.empty(),
        movables=(MovableObstacleSpec("obs1", square(0.5), Region.rectangle(0.0, 0.5, 4.0, 2.5)),),
        starts=((0.0, 0.0),),
        goals=((4.0, 0.0),),
        workspace_bounds=(-1.0, -1.0, 5.0, 3.0),
        name="two_edge_overlap",
    )


def table_pick() -> Scene:
    target = Region.rectangle(0.77, 0.27, 0.83, 0.33)
    tabletop = Region.rectangle(0.15, 0.05, 0.85, 0.55)
    exclusion = Region.rectangle(0.65, 0.15, 0.95, 0.45)
    return Scene(
        robot=regular_polygon(0.04),
        static_obstacles=target,
        movables=(
            MovableObstacleSpec("box", square(0.2), tabletop, exclusion),
            MovableObstacleSpec("can", square(0.05), tabletop, exclusion),
        ),
        starts=((0.1, 0.3),),
        goals=((0.7, 0.3),),
        workspace_bounds=(0.0, 0.0, 1.0, 0.6),
        name="table_pick",
    )


def shelf_high() -> Scene:
    compartment = Region([[(0.0, 0.0), (0.8, 0.0), (0.8, 0.05), (0.05, 0.05), (0.05, 0.35), (0.8, 0.35), (0.8, 0.4), (0.0, 0.4)]])
    return Scene(
        robot=regular_polygon(0.03),
        static_obstacles=compartment,
        movables=(
            MovableObstacleSpec("jar", square(0.1), Region.rectangle(0.25, 0.1, 0.65, 0.3), Region.rectangle(0.2, 0.15, 0.3, 0.25)),
            MovableObstacleSpec("bottle", square(0.08), Region.rectangle(0.25, 0.1, 0.65, 0.3)),
        ),
        starts=((0.85, 0.2),),
        goals=((0.15, 0.2),),
        workspace_bounds=(0.0, 0.0, 0.9, 0.4),
        name="shelf_high",
    )


def shelf_low() -> Scene:
    shelf = Region(
        [[(0.0, 0.0), (0.8, 0.0), (0.8, 0.05), (0.05, 0.05), (0.05, 0.55), (0.75, 0.55), (0.75, 0.2), (0.8, 0.2), (0.8, 0.6), (0.0, 0.6)]]
    )
    return Scene(
        robot=regular_polygon(0.03),
        static_obstacles=shelf,
        movables=(
            MovableObstacleSpec("box", square(0.12), Region.rectangle(0.3, 0.08, 0.65, 0.3)),
            MovableObstacleSpec("cup", square(0.06), Region.rectangle(0.2, 0.3, 0.6, 0.5)),
        ),
        starts=((0.85, 0.12),),
        goals=((0.2, 0.45),),
        workspace_bounds=(0.0, 0.0, 0.9, 0.6),
        name="shelf_low",
    )


BUNDLED_SCENES: Dict[str, Callable[[], Scene]] = {
    "analytic_strip": analytic_strip,
    "two_edge_overlap": two_edge_overlap,
    "open_field": open_field,
    "single_corridor": single_corridor,
    "two_corridor": two_corridor,
    "table_pick": table_pick,
    "shelf_high": shelf_high,
    "shelf_low": shelf_low,
}

# The scenes with two movable obstacles.
BENCHMARK_SCENES = ("table_pick", "shelf_high", "shelf_low")


def get_scene(name: str) -> Scene:
    try:
        factory = BUNDLED_SCENES[name]
    except KeyError:
        raise ValidationError("scene", f"unknown bundled scene {name!r}, expected one of {sorted(BUNDLED_SCENES)}") from None
    return factory()


def make_scene_with_footprints(scene: Scene, sizes: Sequence[float]) -> Scene:
    """Return a copy of the scene whose movables have square footprints with the given side lengths, in obstacle order."""
    assert len(sizes) == scene.n_movables, "One size is needed per movable obstacle."
    return scene.with_footprints({spec.id: square(size) for spec, size in zip(scene.movables, sizes)})
