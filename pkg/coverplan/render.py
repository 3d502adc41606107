#!/usr/bin/env python3
"""
SVG rendering of scenes, roadmaps, decomposition trees and coverage heatmaps.

Geometry is drawn in world coordinates inside a group that maps the workspace bounds onto
the picture, so every ``d`` attribute can be parsed back into world polygons. Leaves carry
``class="leaf"`` and heatmap cells ``class="covered"``, ``"uncovered"`` or ``"infeasible"``.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Optional

import drawsvg as draw
import numpy as np

from .coverage import STATUS_COVERED, STATUS_INFEASIBLE, STATUS_NAMES, STATUS_UNCOVERED
from .errors import UnknownTarget
from .geometry import Region
from .scene import Scene

logger = logging.getLogger(__name__)

TARGET_SCENE = "scene"
TARGET_ROADMAP = "roadmap"
TARGET_TREE = "tree"
TARGET_HEATMAP = "coverage-heatmap"

LEGEND_LINE_HEIGHT = 16
STATIC_FILL = "#4d4d4d"
REGION_STROKE = "#1f77b4"
EDGE_STROKE = "#7f7f7f"
PATH_STROKE = "#d62728"
HEATMAP_FILL = {"covered": "#2ca02c", "uncovered": "#d62728", "infeasible": "#9e9e9e"}


@dataclass
class RenderSpec:
    """
    :param target:  "scene", "roadmap", "tree:<obstacle id>", or "coverage-heatmap" with an
                    optional ":<obstacle id>" (default: the first obstacle).
    :param output:  The SVG file to write, or None.
    :param width:   The picture width in pixels.
    :param layers:  Toggles: "regions", "roadmap", "paths", "envelopes", "legend".
    """

    target: str = TARGET_SCENE
    output: Optional[str] = None
    width: int = 800
    layers: dict = field(default_factory=lambda: {"regions": True, "roadmap": True, "paths": True, "envelopes": False, "legend": True})

    def parse_target(self):
        kind, _, obstacle_id = self.target.partition(":")
        if kind not in (TARGET_SCENE, TARGET_ROADMAP, TARGET_TREE, TARGET_HEATMAP):
            raise UnknownTarget(f"Unknown render target {self.target!r}.")
        if kind == TARGET_TREE and not obstacle_id:
            raise UnknownTarget("The tree target needs an obstacle id, e.g. tree:obs1.")
        return kind, obstacle_id

    def layer(self, name: str) -> bool:
        return bool(self.layers.get(name, False))


def signature_color(signature: np.ndarray) -> str:
    """A stable color for a packed signature."""
    digest = hashlib.sha256(np.asarray(signature, dtype=np.uint8).tobytes()).digest()
    return "#" + "".join(f"{80 + b % 176:02x}" for b in digest[:3])


def region_path(region: Region, **kwargs) -> draw.Path:
    """One even-odd path for every loop of a region."""
    path = draw.Path(fill_rule="evenodd", **kwargs)
    for loop in region.outer_loops + region.hole_loops:
        path.M(*loop[0])
        for point in loop[1:]:
            path.L(*point)
        path.Z()
    return path


def render(artifact=None, spec: Optional[RenderSpec] = None, scene: Optional[Scene] = None) -> str:
    """
    Render an artifact, or a bare scene, to an SVG document.

    :param artifact:    The CoverageArtifact. Only the scene target works without one.
    :param spec:    What to draw.
    :param scene:   The scene to draw when no artifact is given.
    :raises UnknownTarget:  if the target or its obstacle id does not exist.
    """
    spec = spec or RenderSpec()
    kind, obstacle_id = spec.parse_target()
    if artifact is None and kind != TARGET_SCENE:
        raise UnknownTarget(f"The {kind!r} target needs an artifact.")
    scene = artifact.evaluated_scene if artifact is not None else scene
    assert scene is not None, "A scene or an artifact is needed."

    obstacle = None
    if kind in (TARGET_TREE, TARGET_HEATMAP) and scene.n_movables:
        obstacle_id = obstacle_id or scene.movable_ids[0]
        if obstacle_id not in scene.movable_ids:
            raise UnknownTarget(f"Unknown obstacle id {obstacle_id!r}.")
        obstacle = scene.movable_ids.index(obstacle_id)
    elif kind in (TARGET_TREE, TARGET_HEATMAP) and obstacle_id:
        raise UnknownTarget(f"Unknown obstacle id {obstacle_id!r}.")

    ############## Step 1: The canvas. ##############
    min_x, min_y, max_x, max_y = scene.workspace_bounds
    scale = spec.width / (max_x - min_x)
    map_height = (max_y - min_y) * scale
    legend = _legend_lines(artifact, kind, obstacle) if spec.layer("legend") else []
    drawing = draw.Drawing(spec.width, map_height + LEGEND_LINE_HEIGHT * (len(legend) + bool(legend)))
    drawing.append(draw.Rectangle(0, 0, spec.width, map_height, fill="white", stroke="black"))
    world = draw.Group(transform=f"matrix({scale} 0 0 {-scale} {-min_x * scale} {max_y * scale})")
    thin = {"vector_effect": "non-scaling-stroke", "stroke_width": 1}

    ############## Step 2: Leaves or heatmap cells. ##############
    if kind == TARGET_TREE and obstacle is not None:
        _draw_tree(world, artifact, obstacle, spec, thin)
    elif kind == TARGET_HEATMAP and obstacle is not None:
        _draw_heatmap(world, artifact, obstacle, thin)

    ############## Step 3: The scene. ##############
    if not scene.static_obstacles.is_empty:
        world.append(region_path(scene.static_obstacles, fill=STATIC_FILL, **{"class": "static"}))
    if spec.layer("regions"):
        for movable in scene.movables:
            world.append(region_path(movable.effective_region, fill="none", stroke=REGION_STROKE, stroke_dasharray="4,3", **thin, **{"class": "region", "data-obstacle": movable.id}))

    ############## Step 4: The roadmap and its paths. ##############
    if artifact is not None and kind != TARGET_SCENE:
        roadmap = artifact.roadmap
        if spec.layer("roadmap"):
            for u, v in roadmap.edges:
                (x1, y1), (x2, y2) = roadmap.vertex_xy[u], roadmap.vertex_xy[v]
                world.append(draw.Line(x1, y1, x2, y2, stroke=EDGE_STROKE, **thin, **{"class": "edge"}))
        if spec.layer("paths"):
            for path in artifact.path_set.paths:
                world.append(draw.Lines(*roadmap.vertex_xy[list(path)].ravel(), close=False, fill="none", stroke=PATH_STROKE, stroke_opacity=0.5, **thin, **{"class": "path"}))

    radius = max(scene.robot.circumradius, 0.004 * (max_x - min_x))
    for point in scene.starts:
        world.append(draw.Circle(point.x, point.y, radius, fill="#17becf", **{"class": "start"}))
    for point in scene.goals:
        world.append(draw.Circle(point.x, point.y, radius, fill="#ff7f0e", **{"class": "goal"}))
    drawing.append(world)

    ############## Step 5: The legend. ##############
    for i, line in enumerate(legend):
        drawing.append(draw.Text(line, 12, 4, map_height + LEGEND_LINE_HEIGHT * (i + 1), font_family="monospace", **{"class": "legend"}))

    svg = drawing.as_svg()
    if spec.output:
        with open(spec.output, "w", encoding="utf-8") as fo:
            fo.write(svg)
        logger.info("Wrote %s.", spec.output)
    return svg


def _draw_tree(world, artifact, obstacle, spec, thin):
    tree = artifact.trees[obstacle]
    uncovered_leaves = set(artifact.report.uncovered.leaf_index[:, obstacle].tolist())
    for leaf_idx, leaf in enumerate(tree.leaves):
        if leaf.region.is_empty:
            continue
        color = signature_color(tree.leaf_signatures[leaf_idx])
        world.append(region_path(leaf.region, fill=color, stroke="black", **thin, **{"class": "leaf", "data-leaf": leaf_idx}))
        if leaf_idx in uncovered_leaves:
            _hatch(world, leaf.region, thin)
    if spec.layer("envelopes"):
        for envelope in tree.clipped_envelopes():
            if not envelope.region.is_empty:
                world.append(region_path(envelope.region, fill="none", stroke="black", stroke_dasharray="2,2", **thin, **{"class": "envelope", "data-column": envelope.column_id}))


def _hatch(world, region: Region, thin):
    """Diagonal hatching clipped to a region."""
    clip = draw.ClipPath()
    clip.append(region_path(region))
    min_x, min_y, max_x, max_y = region.bounds
    step = max(max_x - min_x, max_y - min_y) / 12
    hatch = draw.Group(clip_path=clip, **{"class": "hatch"})
    for offset in np.arange(min_x - (max_y - min_y), max_x, step):
        hatch.append(draw.Line(offset, min_y, offset + (max_y - min_y), max_y, stroke="black", **thin))
    world.append(hatch)


def _draw_heatmap(world, artifact, obstacle, thin):
    """Color each leaf by the status of the arrangement sets containing it."""
    tree, sets = artifact.trees[obstacle], artifact.sets
    for leaf_idx, leaf in enumerate(tree.leaves):
        if leaf.region.is_empty:
            continue
        member = sets.leaf_index[:, obstacle] == leaf_idx
        volume = np.sum(sets.volume[member])
        covered = np.sum(sets.volume[member & (sets.status == STATUS_COVERED)])
        if np.all(sets.status[member] == STATUS_INFEASIBLE):
            name = STATUS_NAMES[STATUS_INFEASIBLE]
        elif volume > 0 and covered >= volume * (1 - 1e-12):
            name = STATUS_NAMES[STATUS_COVERED]
        else:
            name = STATUS_NAMES[STATUS_UNCOVERED]
        fraction = covered / volume if volume > 0 else 0.0
        world.append(region_path(leaf.region, fill=HEATMAP_FILL[name], stroke="none", **{"class": name, "data-leaf": leaf_idx, "data-covered-fraction": f"{fraction:.6f}"}))


def _legend_lines(artifact, kind, obstacle):
    if artifact is None:
        return []
    report = artifact.report
    lines = [
        f"raw coverage {report.raw_coverage:.6f}   feasible coverage {report.feasible_coverage:.6f}" + ("   (lower bound)" if report.lower_bound_flag else ""),
        f"paths {artifact.path_set.n_paths}   edges {artifact.roadmap.n_edges}   sets {report.n_sets}   uncovered {len(report.uncovered)}",
    ]
    if kind in (TARGET_TREE, TARGET_HEATMAP) and obstacle is not None:
        tree = artifact.trees[obstacle]
        lines.append(f"{tree.obstacle_id}: {tree.n_leaves} leaves, depth {tree.depth}")
    return lines
