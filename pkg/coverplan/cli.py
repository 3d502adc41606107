#!/usr/bin/env python3
"""
Command line interface.

    coverplan build --scene bundled:table_pick --seed 7 --out table.cpa
    coverplan coverage --artifact table.cpa
    coverplan query --artifact table.cpa --arrangement "0.3,0.2;0.5,0.4"
    coverplan verify --artifact table.cpa --samples 10000 --seed 1
    coverplan render --artifact table.cpa --target tree:box --out box.svg
    coverplan bench --artifact table.cpa --queries 1000 --seed 1
    coverplan experiment --scene bundled:table_pick --seed 1 --trials 5 --out sizes.json

Exit codes: 0 on success, 1 on user errors, 2 when verification fails.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .cover_search import MODE_APP_BASELINE, MODE_COVER, PLANNER_PRM, PLANNER_RRT, WARM_START_DISJOINT, WARM_START_NONE, BuildParams, CoverQuery, build, check_fingerprint
from .coverage import evaluate_coverage
from .errors import CoverplanError, ParseError
from .file_io import load_scene, read_artifact, write_artifact, write_report
from .geometry import square
from .render import RenderSpec, render
from .scene import Arrangement
from .verify import DEFAULT_TRIALS, bench_query, compare_with_classification, default_size_pairs, flip_signature_bit, footprint_experiment, grid_oracle, monte_carlo_verify
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_VERIFY_FAILED = 2


class UsageError(CoverplanError):
    """Invalid command line."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="coverplan", description="Coverage-certified roadmaps for semi-static motion planning.")
    parser.add_argument("--version", action="version", version=f"coverplan {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug messages.")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("build", help="Build a coverage artifact.")
    p.add_argument("--scene", required=True, help="A scene file, or bundled:<name>.")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, help="The artifact file to write.")
    p.add_argument("--report", help="The coverage report to write. Defaults to <out>.report.json.")
    p.add_argument("--planner", choices=(PLANNER_PRM, PLANNER_RRT), default=PLANNER_PRM)
    p.add_argument("--planner-samples", type=int, default=500)
    p.add_argument("--planner-timeout", type=float, default=10.0)
    p.add_argument("--path-cap", type=int, default=512)
    p.add_argument("--combo-cap", type=int, default=10**6)
    p.add_argument("--warm-start", choices=(WARM_START_NONE, WARM_START_DISJOINT), default=WARM_START_NONE)
    p.add_argument("--mode", choices=(MODE_COVER, MODE_APP_BASELINE), default=MODE_COVER)
    p.add_argument("--max-total-time", type=float, default=120.0)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--connect-radius", type=float)
    p.add_argument("--k-neighbors", type=int, default=10)
    p.add_argument("--goal-bias", type=float, default=0.1)
    p.add_argument("--polygon-sides", type=int, default=16)

    p = commands.add_parser("coverage", help="Re-evaluate the coverage of a stored roadmap.")
    p.add_argument("--artifact", required=True)
    p.add_argument("--scene", help="Evaluate against this scene. Defaults to the scene stored in the artifact.")
    p.add_argument("--footprints", help="Square footprint side lengths in obstacle order, e.g. 0.05,0.2.")
    p.add_argument("--path-cap", type=int)
    p.add_argument("--combo-cap", type=int)
    p.add_argument("--out", help="The report file to write.")

    p = commands.add_parser("query", help="Answer one arrangement query.")
    p.add_argument("--artifact", required=True)
    p.add_argument("--arrangement", required=True, help='Inline "x,y;x,y" in obstacle order, or a JSON file {"id": [x, y]}.')
    p.add_argument("--scene", help="Check the artifact fingerprint against this scene.")
    p.add_argument("--out", help="The result file to write.")

    p = commands.add_parser("verify", help="Verify soundness and coverage by sampling.")
    p.add_argument("--artifact", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--scene", help="The scene with the true footprints. Defaults to the scene stored in the artifact.")
    p.add_argument("--grid-resolution", type=int, help="Also compare with the grid oracle at this many cells per axis.")
    p.add_argument("--flip-bit", action="store_true", help="Corrupt one signature bit first, as a negative control.")
    p.add_argument("--out", help="The report file to write.")

    p = commands.add_parser("render", help="Render an SVG picture.")
    p.add_argument("--artifact")
    p.add_argument("--scene")
    p.add_argument("--target", default="scene", help="scene, roadmap, tree:<obstacle id> or coverage-heatmap[:<obstacle id>].")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--envelopes", action="store_true", help="Outline the envelopes of a tree.")
    p.add_argument("--no-roadmap", action="store_true")
    p.add_argument("--no-paths", action="store_true")
    p.add_argument("--no-regions", action="store_true")
    p.add_argument("--no-legend", action="store_true")

    p = commands.add_parser("bench", help="Time random queries.")
    p.add_argument("--artifact", required=True)
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", help="The result file to write.")

    p = commands.add_parser("experiment", help="Compare cover and app_baseline builds over footprint sizes.")
    p.add_argument("--scene", required=True, help="A scene file, or bundled:<name>.")
    p.add_argument("--seed", required=True, type=int, help="The seed of the first trial. Trial k uses seed + k.")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--size-pairs", help='Square side lengths per row, e.g. "0.025,0.1;0.1,0.1". Defaults to the largest footprint with the first obstacle scaled.')
    p.add_argument("--planner", choices=(PLANNER_PRM, PLANNER_RRT), default=PLANNER_PRM)
    p.add_argument("--planner-samples", type=int, default=500)
    p.add_argument("--max-total-time", type=float, default=120.0)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--out", help="The result file to write.")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    :return:    0 on success, 1 on a user error, 2 when verification fails.
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USER_ERROR

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    handler = {
        "build": _build,
        "coverage": _coverage,
        "query": _query,
        "verify": _verify,
        "render": _render,
        "bench": _bench,
        "experiment": _experiment,
    }[args.command]
    try:
        return handler(args)
    except CoverplanError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER_ERROR


def main():
    sys.exit(run())


def _emit(data: dict, out: Optional[str]):
    if out:
        write_report(data, out)
    else:
        print(json.dumps(data, indent=2, sort_keys=True))


def _build(args) -> int:
    scene = load_scene(args.scene)
    params = BuildParams(
        seed=args.seed,
        planner=args.planner,
        planner_samples=args.planner_samples,
        planner_timeout=args.planner_timeout,
        path_cap=args.path_cap,
        combo_cap=args.combo_cap,
        warm_start=args.warm_start,
        mode=args.mode,
        max_total_time=args.max_total_time,
        max_iterations=args.max_iterations,
        connect_radius=args.connect_radius,
        k_neighbors=args.k_neighbors,
        goal_bias=args.goal_bias,
        polygon_sides=args.polygon_sides,
    )
    artifact = build(scene, params)
    write_artifact(artifact, args.out)
    report = artifact.report.to_dict()
    report["timed_out"] = artifact.timed_out
    write_report(report, args.report or f"{args.out}.report.json")
    logger.info("Wrote %s: raw coverage %.6f.", args.out, artifact.report.raw_coverage)
    return EXIT_OK


def _coverage(args) -> int:
    artifact = read_artifact(args.artifact)
    scene = load_scene(args.scene) if args.scene else artifact.scene
    if args.footprints:
        sizes = _floats(args.footprints, "--footprints")
        if len(sizes) != scene.n_movables:
            raise UsageError(f"--footprints needs {scene.n_movables} side length(s).")
        scene = scene.with_footprints({spec.id: square(size) for spec, size in zip(scene.movables, sizes)})
    evaluation = evaluate_coverage(
        scene,
        artifact.roadmap,
        path_cap=args.path_cap or artifact.params.path_cap,
        combo_cap=args.combo_cap or artifact.params.combo_cap,
    )
    report = evaluation.report.to_dict()
    report["mode"] = artifact.params.mode
    _emit(report, args.out)
    return EXIT_OK


def _query(args) -> int:
    artifact = read_artifact(args.artifact)
    if args.scene:
        check_fingerprint(artifact, load_scene(args.scene))
    engine = CoverQuery(artifact)
    result = engine.query(_read_arrangement(args.arrangement, artifact.scene))
    _emit(dict(result.to_dict(), schema="coverplan-query/1"), args.out)
    return EXIT_OK


def _verify(args) -> int:
    artifact = read_artifact(args.artifact)
    scene = load_scene(args.scene) if args.scene else artifact.scene
    if args.flip_bit:
        artifact = flip_signature_bit(artifact)
    report = monte_carlo_verify(artifact, scene, args.samples, args.seed)
    data = report.to_dict()
    if args.grid_resolution:
        oracle = grid_oracle(artifact.evaluated_scene, artifact.roadmap, args.grid_resolution, path_cap=artifact.params.path_cap)
        comparison = compare_with_classification(oracle, artifact)
        report.grid_mismatches = comparison.mismatches
        data = report.to_dict()
        data["grid"] = {"compared": comparison.compared, "boundary_skipped": comparison.boundary_skipped, "agreement": comparison.agreement}
    _emit(data, args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _render(args) -> int:
    if not args.artifact and not args.scene:
        raise UsageError("render needs --artifact or --scene.")
    artifact = read_artifact(args.artifact) if args.artifact else None
    scene = load_scene(args.scene) if args.scene and artifact is None else None
    layers = {
        "regions": not args.no_regions,
        "roadmap": not args.no_roadmap,
        "paths": not args.no_paths,
        "envelopes": args.envelopes,
        "legend": not args.no_legend,
    }
    render(artifact, RenderSpec(args.target, args.out, args.width, layers), scene=scene)
    return EXIT_OK


def _bench(args) -> int:
    artifact = read_artifact(args.artifact)
    result = bench_query(artifact, args.queries, args.seed)
    _emit(result.to_dict(), args.out)
    return EXIT_OK


def _experiment(args) -> int:
    scene = load_scene(args.scene)
    if scene.n_movables == 0:
        raise UsageError("experiment needs a scene with movable obstacles.")
    if args.trials < 1:
        raise UsageError("--trials must be positive.")
    if args.size_pairs:
        size_pairs = [_floats(row, "--size-pairs") for row in args.size_pairs.split(";") if row.strip()]
        if any(len(sizes) != scene.n_movables for sizes in size_pairs):
            raise UsageError(f"--size-pairs needs {scene.n_movables} side length(s) per row.")
    else:
        size_pairs = default_size_pairs(scene)
    params = BuildParams(
        seed=args.seed,
        planner=args.planner,
        planner_samples=args.planner_samples,
        max_total_time=args.max_total_time,
        max_iterations=args.max_iterations,
    )
    _emit(footprint_experiment(scene, size_pairs, params, args.trials), args.out)
    return EXIT_OK


def _floats(text: str, flag: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"{flag}: {e}") from e


def _read_arrangement(text: str, scene) -> Arrangement:
    """Parse an inline "x,y;x,y" arrangement or a JSON file."""
    if Path(text).is_file():
        try:
            with open(text, "r", encoding="utf-8") as fi:
                data = json.load(fi)
        except ValueError as e:
            raise ParseError(f"Failed to read the arrangement {text}: {e}") from e
        if isinstance(data, dict):
            return Arrangement({k: tuple(v) for k, v in data.items()})
        positions = np.asarray(data, dtype=np.float64)
    else:
        positions = np.asarray([_floats(pair, "--arrangement") for pair in text.split(";") if pair.strip()], dtype=np.float64)
    if positions.size != 2 * scene.n_movables:
        raise UsageError(f"--arrangement needs {scene.n_movables} position(s).")
    return Arrangement.from_positions(scene, positions.reshape((-1, 2)))
