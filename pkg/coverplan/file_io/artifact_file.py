#!/usr/bin/env python3
"""
Single-file coverage artifacts.

An artifact is a msgpack map compressed with lz4 block compression. The outer document
holds the schema, the uncompressed size and the compressed payload. Numpy arrays are stored
as ``{"dtype", "shape", "data"}`` maps and every map is written with sorted keys, so two
identical builds give byte-identical files.
"""
import hashlib
import logging
from pathlib import Path
from typing import Optional, Union

import lz4.block
import msgpack
import numpy as np
import shapely

from ..coverage import ArrangementSets, CoverageReport, DecompositionTree, Leaf, STATUS_UNCOVERED, column_envelopes
from ..errors import ArtifactMismatch, ParseError
from ..geometry import ConvexPolygon, Region
from ..roadmap import PathSet, Roadmap
from ..scene import Scene
from .scene_file import scene_fingerprint, scene_from_dict, scene_to_dict

logger = logging.getLogger(__name__)

ARTIFACT_SCHEMA = "coverplan-artifact/1"


def write_artifact(artifact, file_output: Union[str, Path]) -> str:
    """
    Write a coverage artifact.

    :param artifact:    The CoverageArtifact to write.
    :param file_output: The file path.
    :return:    The sha256 of the written bytes.
    """
    payload = msgpack.packb(_canonical(artifact_to_dict(artifact)), use_bin_type=True)
    document = {
        "schema": ARTIFACT_SCHEMA,
        "size": len(payload),
        "data": lz4.block.compress(payload, store_size=False),
    }
    buffer = msgpack.packb(_canonical(document), use_bin_type=True)
    with open(file_output, "wb") as fo:
        fo.write(buffer)
    return hashlib.sha256(buffer).hexdigest()


def read_artifact(file_input: Union[str, Path], scene: Optional[Scene] = None):
    """
    Read a coverage artifact.

    :param file_input:  The file path.
    :param scene:   When given, the artifact must have been built for this scene.
    :raises ParseError:     if the file is not a coverplan artifact.
    :raises ArtifactMismatch:   if the scene fingerprint differs.
    """
    with open(file_input, "rb") as fi:
        buffer = fi.read()
    try:
        document = msgpack.unpackb(buffer, raw=False)
        if not isinstance(document, dict) or document.get("schema") != ARTIFACT_SCHEMA:
            raise ParseError(f"{file_input} is not a {ARTIFACT_SCHEMA} file.")
        payload = lz4.block.decompress(document["data"], uncompressed_size=document["size"])
        data = msgpack.unpackb(payload, raw=False, strict_map_key=False)
    except ParseError:
        raise
    except (msgpack.UnpackException, ValueError, KeyError, TypeError, lz4.block.LZ4BlockError) as e:
        raise ParseError(f"Failed to read the artifact {file_input}: {e}") from e

    if scene is not None and scene_fingerprint(scene) != data["fingerprint"]:
        raise ArtifactMismatch(f"{file_input} was built for scene {data['fingerprint'][:12]}, not {scene_fingerprint(scene)[:12]}.")
    return artifact_from_dict(data)


def artifact_to_dict(artifact) -> dict:
    return {
        "fingerprint": artifact.fingerprint,
        "scene": scene_to_dict(artifact.scene),
        "params": artifact.params.to_dict(),
        "footprints": {k: v.vertices for k, v in artifact.footprints.items()},
        "roadmap": artifact.roadmap.to_dict(),
        "path_set": {
            "paths": [list(p) for p in artifact.path_set.paths],
            "incidence": artifact.path_set.incidence,
            "n_columns": artifact.path_set.n_columns,
            "n_terminals": artifact.path_set.n_terminals,
            "n_starts": artifact.path_set.n_starts,
            "truncated": artifact.path_set.truncated,
            "path_cap": artifact.path_set.path_cap,
        },
        "trees": [_tree_to_dict(tree) for tree in artifact.trees],
        "sets": {
            "leaf_index": artifact.sets.leaf_index,
            "signature": artifact.sets.signature,
            "volume": artifact.sets.volume,
            "status": artifact.sets.status,
            "n_columns": artifact.sets.n_columns,
            "n_terminals": artifact.sets.n_terminals,
            "n_starts": artifact.sets.n_starts,
        },
        "report": _report_to_dict(artifact.report),
        "build_log": list(artifact.build_log),
        "timed_out": bool(artifact.timed_out),
    }


def artifact_from_dict(data: dict):
    from ..cover_search.cover_builder import BuildParams, CoverageArtifact

    scene = scene_from_dict(data["scene"])
    footprints = {k: ConvexPolygon(_array(v), allow_degenerate=True) for k, v in data["footprints"].items()}
    evaluated_scene = scene.with_footprints(footprints) if footprints else scene
    roadmap = Roadmap.from_dict(scene, {k: _array(v) if isinstance(v, dict) else v for k, v in data["roadmap"].items()})

    raw_paths = data["path_set"]
    path_set = PathSet(
        paths=[tuple(int(v) for v in p) for p in raw_paths["paths"]],
        incidence=_array(raw_paths["incidence"]),
        n_columns=raw_paths["n_columns"],
        n_terminals=raw_paths["n_terminals"],
        n_starts=raw_paths["n_starts"],
        truncated=raw_paths["truncated"],
        path_cap=raw_paths["path_cap"],
    )
    trees = [_tree_from_dict(evaluated_scene, roadmap, raw) for raw in data["trees"]]

    raw_sets = data["sets"]
    sets = ArrangementSets(
        _array(raw_sets["leaf_index"]),
        _array(raw_sets["signature"]),
        _array(raw_sets["volume"]),
        raw_sets["n_columns"],
        raw_sets["n_terminals"],
        raw_sets["n_starts"],
        status=_array(raw_sets["status"]),
    )
    raw_report = dict(data["report"])
    report = CoverageReport(uncovered=sets.subset(sets.status == STATUS_UNCOVERED), **raw_report)

    artifact = CoverageArtifact(
        scene=scene,
        fingerprint=data["fingerprint"],
        params=BuildParams.from_dict(data["params"]),
        roadmap=roadmap,
        path_set=path_set,
        trees=trees,
        sets=sets,
        report=report,
        build_log=list(data["build_log"]),
        timed_out=data["timed_out"],
        footprints=footprints,
    )
    artifact.check_consistency()
    return artifact


def _report_to_dict(report: CoverageReport) -> dict:
    return {
        "raw_coverage": report.raw_coverage,
        "feasible_coverage": report.feasible_coverage,
        "vol_cov": report.vol_cov,
        "vol_uncov": report.vol_uncov,
        "vol_infeasible": report.vol_infeasible,
        "total_volume": report.total_volume,
        "lower_bound_flag": report.lower_bound_flag,
        "n_sets": report.n_sets,
        "n_paths": report.n_paths,
        "n_columns": report.n_columns,
        "obstacle_overlap_included": report.obstacle_overlap_included,
        "warnings": list(report.warnings),
    }


def _tree_to_dict(tree: DecompositionTree) -> dict:
    return {
        "obstacle_id": tree.obstacle_id,
        "n_columns": tree.n_columns,
        "n_terminals": tree.n_terminals,
        "n_starts": tree.n_starts,
        "root": tree.root,
        "node_column": tree.node_column,
        "node_left": tree.node_left,
        "node_right": tree.node_right,
        # Leaf regions are stored as WKB to keep every coordinate bit-exact.
        "leaves": [{"region": shapely.to_wkb(leaf.region.geometry), "signature": leaf.signature, "area": leaf.area} for leaf in tree.leaves],
        "lineage": tree.lineage,
        "warnings": tree.warnings,
    }


def _tree_from_dict(scene: Scene, roadmap: Roadmap, data: dict) -> DecompositionTree:
    tree = DecompositionTree(scene.movable(data["obstacle_id"]))
    tree.n_columns = data["n_columns"]
    tree.n_terminals = data["n_terminals"]
    tree.n_starts = data["n_starts"]
    tree.root = data["root"]
    tree.node_column = _array(data["node_column"])
    tree.node_left = _array(data["node_left"])
    tree.node_right = _array(data["node_right"])
    tree.leaves = [Leaf(Region.from_geometry(shapely.from_wkb(x["region"])), _array(x["signature"]), x["area"]) for x in data["leaves"]]
    tree.lineage = [list(x) for x in data["lineage"]]
    tree.warnings = list(data["warnings"])
    tree.envelopes = column_envelopes(roadmap, tree.spec) if tree.n_columns else []
    assert len(tree.envelopes) == tree.n_columns, "The roadmap and the tree have different columns."
    return tree


def _canonical(value):
    """Convert a value to msgpack-ready data with sorted map keys."""
    if isinstance(value, dict):
        return {str(k): _canonical(value[k]) for k in sorted(value, key=str)}
    if isinstance(value, (list, tuple)):
        return [_canonical(x) for x in value]
    if isinstance(value, np.ndarray):
        array = np.ascontiguousarray(value)
        return {"dtype": array.dtype.str, "shape": list(array.shape), "data": array.tobytes()}
    if isinstance(value, np.generic):
        return value.item()
    return value


def _array(value) -> np.ndarray:
    if isinstance(value, dict) and set(value) == {"dtype", "shape", "data"}:
        return np.frombuffer(value["data"], dtype=np.dtype(value["dtype"])).reshape(value["shape"]).copy()
    return np.asarray(value)
