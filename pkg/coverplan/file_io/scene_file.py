#!/usr/bin/env python3
"""
Reader and writer of scene files (schema ``coverplan-scene/1``).

A scene file is UTF-8 JSON, optionally compressed with .gz or .bz2::

    {
        "schema": "coverplan-scene/1",
        "name": "table_pick",
        "workspace_bounds": [x_min, y_min, x_max, y_max],
        "robot": {"vertices": [[x, y], ...]} or {"radius": r, "sides": 16},
        "static_obstacles": {"outer": [[[x, y], ...], ...], "holes": [...]},
        "movables": [
            {"id": "obs1", "footprint": {...}, "config_region": {...}, "exclusions": {...}}
        ],
        "starts": [[x, y], ...],
        "goals": [[x, y], ...]
    }

Lengths are meters. Unknown fields are rejected.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Union

from ..errors import DegenerateGeometry, ParseError, ValidationError
from ..geometry import ConvexPolygon, Region, clean_loop, regular_polygon
from ..scene import MovableObstacleSpec, Scene
from .shared import guess_file_type_from_file_name, smart_open_file

logger = logging.getLogger(__name__)

SCENE_SCHEMA = "coverplan-scene/1"
BUNDLED_PREFIX = "bundled:"

_SCENE_FIELDS = {"schema", "name", "workspace_bounds", "robot", "static_obstacles", "movables", "starts", "goals"}
_SCENE_REQUIRED = {"schema", "workspace_bounds", "robot", "starts", "goals"}
_MOVABLE_FIELDS = {"id", "footprint", "config_region", "exclusions"}
_REGION_FIELDS = {"outer", "holes"}


def load_scene(file_input: Union[str, Path]) -> Scene:
    """
    Read and validate a scene.

    :param file_input:  The scene file path, or ``"bundled:<name>"`` for a bundled scene.
    :return:    The validated Scene, with the effective configuration regions precomputed.
    :raises ParseError:     if the file is not valid JSON.
    :raises ValidationError:    with the offending field path if a value violates an invariant.
    """
    if str(file_input).startswith(BUNDLED_PREFIX):
        from ..scene import bundled_scenes

        return bundled_scenes.get_scene(str(file_input)[len(BUNDLED_PREFIX) :])

    file_type = guess_file_type_from_file_name(file_input)
    if file_type != ".json":
        logger.warning("Scene file %s does not end with .json, reading it as JSON anyway.", file_input)
    try:
        with smart_open_file(file_input) as fi:
            data = json.load(fi)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"Failed to parse scene file {file_input}: {e}") from e
    return scene_from_dict(data)


def save_scene(scene: Scene, file_output: Union[str, Path]):
    with smart_open_file(file_output, "w") as fo:
        json.dump(scene_to_dict(scene), fo, indent=2, sort_keys=True)


def scene_fingerprint(scene: Scene) -> str:
    """The SHA-256 of the canonical JSON form of the scene."""
    canonical = json.dumps(scene_to_dict(scene), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def scene_to_dict(scene: Scene) -> dict:
    return {
        "schema": SCENE_SCHEMA,
        "name": scene.name,
        "workspace_bounds": list(scene.workspace_bounds),
        "robot": _convex_to_dict(scene.robot),
        "static_obstacles": region_to_dict(scene.static_obstacles),
        "movables": [
            {
                "id": spec.id,
                "footprint": _convex_to_dict(spec.footprint),
                "config_region": region_to_dict(spec.config_region),
                "exclusions": region_to_dict(spec.exclusions),
            }
            for spec in scene.movables
        ],
        "starts": [[p.x, p.y] for p in scene.starts],
        "goals": [[p.x, p.y] for p in scene.goals],
    }


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict):
        raise ValidationError("$", "the scene must be a JSON object")
    _check_fields(data, _SCENE_FIELDS, _SCENE_REQUIRED, "")
    if data["schema"] != SCENE_SCHEMA:
        raise ValidationError("schema", f"expected {SCENE_SCHEMA!r}, got {data['schema']!r}")

    bounds = data["workspace_bounds"]
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise ValidationError("workspace_bounds", "expected [x_min, y_min, x_max, y_max]")

    movables = []
    for i, item in enumerate(data.get("movables", [])):
        path = f"movables[{i}]"
        if not isinstance(item, dict):
            raise ValidationError(path, "expected an object")
        _check_fields(item, _MOVABLE_FIELDS, {"id", "footprint", "config_region"}, path)
        footprint = _convex_from_dict(item["footprint"], f"{path}.footprint", allow_degenerate=False)
        config_region = region_from_dict(item["config_region"], f"{path}.config_region")
        exclusions = region_from_dict(item.get("exclusions", {}), f"{path}.exclusions")
        try:
            movables.append(MovableObstacleSpec(str(item["id"]), footprint, config_region, exclusions))
        except ValidationError as e:
            suffix = e.field_path.split(".", 1)[1] if "." in e.field_path else ""
            raise type(e)(f"{path}.{suffix}" if suffix else path, e.message) from e

    return Scene(
        robot=_convex_from_dict(data["robot"], "robot", allow_degenerate=True),
        static_obstacles=region_from_dict(data.get("static_obstacles", {}), "static_obstacles"),
        movables=tuple(movables),
        starts=tuple(_points(data["starts"], "starts")),
        goals=tuple(_points(data["goals"], "goals")),
        workspace_bounds=tuple(_number(v, f"workspace_bounds[{i}]") for i, v in enumerate(bounds)),
        name=str(data.get("name", "")),
    )


def region_to_dict(region: Region) -> dict:
    return {
        "outer": [clean_loop(loop, ccw=True).tolist() for loop in region.outer_loops],
        "holes": [clean_loop(loop, ccw=False).tolist() for loop in region.hole_loops],
    }


def region_from_dict(data: dict, field_path: str) -> Region:
    if not isinstance(data, dict):
        raise ValidationError(field_path, "expected {outer: [...], holes: [...]}")
    _check_fields(data, _REGION_FIELDS, set(), field_path)
    try:
        outer = [_clean(loop, f"{field_path}.outer[{i}]", ccw=True) for i, loop in enumerate(data.get("outer", []))]
        holes = [_clean(loop, f"{field_path}.holes[{i}]", ccw=False) for i, loop in enumerate(data.get("holes", []))]
        return Region(outer, holes)
    except (ValueError, TypeError) as e:
        raise ValidationError(field_path, str(e)) from e


def _convex_to_dict(polygon: ConvexPolygon) -> dict:
    return {"vertices": polygon.vertices.tolist()}


def _convex_from_dict(data: dict, field_path: str, allow_degenerate: bool) -> ConvexPolygon:
    if not isinstance(data, dict):
        raise ValidationError(field_path, "expected {vertices: [...]} or {radius: r, sides: k}")
    try:
        if "vertices" in data:
            _check_fields(data, {"vertices"}, {"vertices"}, field_path)
            return ConvexPolygon(data["vertices"], allow_degenerate=allow_degenerate)
        _check_fields(data, {"radius", "sides"}, {"radius"}, field_path)
        return regular_polygon(float(data["radius"]), int(data.get("sides", 16)))
    except ValidationError:
        raise
    except (ValueError, TypeError, AssertionError, DegenerateGeometry) as e:
        raise ValidationError(field_path, str(e)) from e


def _check_fields(data: dict, allowed: set, required: set, field_path: str):
    prefix = f"{field_path}." if field_path else ""
    for key in sorted(set(data) - allowed):
        raise ValidationError(f"{prefix}{key}", "unknown field")
    for key in sorted(required - set(data)):
        raise ValidationError(f"{prefix}{key}", "missing field")


def _number(value, field_path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(field_path, "expected a number")
    return float(value)


def _points(values, field_path: str):
    if not isinstance(values, list):
        raise ValidationError(field_path, "expected a list of [x, y] pairs")
    points = []
    for i, value in enumerate(values):
        if not isinstance(value, list) or len(value) != 2:
            raise ValidationError(f"{field_path}[{i}]", "expected an [x, y] pair")
        points.append((_number(value[0], f"{field_path}[{i}]"), _number(value[1], f"{field_path}[{i}]")))
    return points


def _clean(loop, field_path: str, ccw: bool):
    cleaned = clean_loop(_points(loop, field_path), ccw=ccw)
    if len(cleaned) == 0:
        raise ValidationError(field_path, "the loop has no area")
    return cleaned
