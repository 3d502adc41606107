#!/usr/bin/env python3
"""
Monte Carlo verification of a coverage artifact.

Arrangements are sampled uniformly over the arrangement space, queried, and every returned
path is audited against the exactly placed obstacles. Collision truth comes from
``scene.collides_many`` only.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional

import numpy as np
import shapely

from ..cover_search import OUTCOME_INFEASIBLE, OUTCOME_PATH, CoverageArtifact, CoverQuery, check_fingerprint
from ..coverage import Leaf
from ..geometry import EPS_SNAP
from ..parallel import parallel_map
from ..roadmap import pack_bits
from ..scene import Arrangement, Scene, collides_many

logger = logging.getLogger(__name__)

VERIFY_SCHEMA = "coverplan-verify/1"
DEFAULT_POSES_PER_SEGMENT = 200
SAMPLES_PER_CHUNK = 1000


@dataclass
class VerifyReport:
    """
    Tallies of a verification run.

    ``sound_violations`` counts returned paths that collide with the sampled arrangement.
    ``empirical_coverage`` is the fraction of judged samples answered with a path, where
    judged samples are neither infeasible nor boundary samples. It estimates the feasible
    coverage, reported as ``computed_coverage``.
    """

    samples: int = 0
    sound_violations: int = 0
    empirical_coverage: float = 0.0
    computed_coverage: float = 0.0
    three_sigma: float = 0.0
    boundary_skipped: int = 0
    grid_mismatches: int = 0
    judged: int = 0
    paths_returned: int = 0
    infeasible_samples: int = 0
    infeasible_mismatches: int = 0
    empirical_raw_coverage: float = 0.0
    computed_raw_coverage: float = 0.0
    seed: Optional[int] = None
    violation_examples: List[dict] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return abs(self.empirical_coverage - self.computed_coverage) <= self.three_sigma + 1e-12

    @property
    def passed(self) -> bool:
        return self.sound_violations == 0 and self.grid_mismatches == 0

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["schema"] = VERIFY_SCHEMA
        data["within_bound"] = self.within_bound
        data["passed"] = self.passed
        return data


def sample_positions(region, n: int, rng: np.random.Generator, batch: int = 256) -> np.ndarray:
    """Rejection-sample n positions uniformly inside a region."""
    assert not region.is_empty, "Cannot sample an empty region."
    min_x, min_y, max_x, max_y = region.bounds
    collected, count = [], 0
    while count < n:
        points = rng.uniform((min_x, min_y), (max_x, max_y), size=(max(batch, 2 * (n - count)), 2))
        points = points[shapely.intersects_xy(region.geometry, points[:, 0], points[:, 1])]
        collected.append(points)
        count += len(points)
    return np.concatenate(collected)[:n] if collected else np.zeros((0, 2))


def sample_arrangements(scene: Scene, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples over the product of the effective regions, shape (n, n_movables, 2)."""
    if scene.n_movables == 0:
        return np.zeros((n, 0, 2), dtype=np.float64)
    return np.stack([sample_positions(spec.effective_region, n, rng) for spec in scene.movables], axis=1)


def interpolate_path(waypoints: np.ndarray, poses_per_segment: int = DEFAULT_POSES_PER_SEGMENT) -> np.ndarray:
    """Robot positions along a path, ``poses_per_segment`` per segment with both ends included."""
    waypoints = np.asarray(waypoints, dtype=np.float64).reshape((-1, 2))
    if len(waypoints) < 2:
        return waypoints
    t = np.linspace(0.0, 1.0, poses_per_segment)[None, :, None]
    a, b = waypoints[:-1, None, :], waypoints[1:, None, :]
    return (a + t * (b - a)).reshape((-1, 2))


def is_boundary_sample(scene: Scene, positions: np.ndarray, eps: float = EPS_SNAP) -> bool:
    """Whether some position lies within eps of its region boundary."""
    for spec, (x, y) in zip(scene.movables, positions):
        if shapely.distance(spec.effective_region.geometry.boundary, shapely.points(x, y)) <= eps:
            return True
    return False


def monte_carlo_verify(
    artifact: CoverageArtifact,
    scene: Scene,
    n_samples: int,
    seed: int,
    poses_per_segment: int = DEFAULT_POSES_PER_SEGMENT,
    threads: Optional[int] = None,
) -> VerifyReport:
    """
    Verify soundness and coverage of an artifact by sampling.

    :param artifact:    The artifact to verify.
    :param scene:   The scene with the true footprints. Returned paths are audited against it.
    :param n_samples:   The number of sampled arrangements.
    :param seed:    The seed. Chunk k of the sample stream uses the generator seeded with (seed, k),
                    so the report does not depend on the worker count.
    :param poses_per_segment:   Robot poses checked per path segment.
    :raises ArtifactMismatch:   if the artifact was built for another scene.
    """
    check_fingerprint(artifact, scene)
    chunks = [(k, min(SAMPLES_PER_CHUNK, n_samples - k * SAMPLES_PER_CHUNK)) for k in range(math.ceil(n_samples / SAMPLES_PER_CHUNK))]
    results = parallel_map(partial(_verify_chunk, artifact, scene, seed, poses_per_segment), chunks, threads=threads)

    report = VerifyReport(seed=seed)
    for part in results:
        for name in ("samples", "sound_violations", "boundary_skipped", "judged", "paths_returned", "infeasible_samples", "infeasible_mismatches"):
            setattr(report, name, getattr(report, name) + getattr(part, name))
        report.violation_examples.extend(part.violation_examples)
        report.empirical_raw_coverage += part.empirical_raw_coverage
    report.violation_examples = report.violation_examples[:10]

    not_boundary = report.samples - report.boundary_skipped
    report.empirical_raw_coverage = report.empirical_raw_coverage / not_boundary if not_boundary else 0.0
    report.empirical_coverage = report.paths_returned / report.judged if report.judged else 0.0
    report.computed_coverage = float(artifact.report.feasible_coverage)
    report.computed_raw_coverage = float(artifact.report.raw_coverage)
    p = report.computed_coverage
    report.three_sigma = 3.0 * math.sqrt(p * (1.0 - p) / report.judged) if report.judged else 0.0

    log = logger.warning if not report.passed else logger.info
    log(
        "Verified %d sample(s): %d violation(s), empirical %.4f vs computed %.4f (3 sigma %.4f), %d boundary sample(s) skipped.",
        report.samples,
        report.sound_violations,
        report.empirical_coverage,
        report.computed_coverage,
        report.three_sigma,
        report.boundary_skipped,
    )
    return report


def _verify_chunk(artifact, scene, seed, poses_per_segment, chunk) -> VerifyReport:
    chunk_index, n = chunk
    rng = np.random.default_rng([seed, chunk_index])
    engine = CoverQuery(artifact, check_region=False)
    terminals = np.asarray([tuple(p) for p in scene.terminals], dtype=np.float64).reshape((-1, 2))
    n_starts = len(scene.starts)
    part = VerifyReport(samples=n)
    # Summed path answers over non-boundary samples, turned into a ratio by the caller.
    raw_paths = 0

    for positions in sample_arrangements(scene, n, rng):
        result = engine.query(positions)
        if result.boundary_ambiguous or is_boundary_sample(scene, positions):
            part.boundary_skipped += 1
            continue
        arrangement = Arrangement.from_positions(scene, positions)

        ############## Step 1: Decide infeasibility from the terminals. ##############
        blocked = collides_many(scene, terminals, arrangement)
        infeasible = bool(np.all(blocked[:n_starts]) or np.all(blocked[n_starts:]))
        if infeasible != (result.outcome == OUTCOME_INFEASIBLE):
            part.infeasible_mismatches += 1
        if infeasible:
            part.infeasible_samples += 1
            continue

        ############## Step 2: Audit the returned path. ##############
        part.judged += 1
        if result.outcome != OUTCOME_PATH:
            continue
        part.paths_returned += 1
        raw_paths += 1
        if np.any(collides_many(scene, interpolate_path(result.waypoints, poses_per_segment), arrangement)):
            part.sound_violations += 1
            part.violation_examples.append({"positions": positions.tolist(), "path_index": result.path_index})

    part.empirical_raw_coverage = float(raw_paths)
    return part


def flip_signature_bit(artifact: CoverageArtifact, obstacle: int = 0) -> CoverageArtifact:
    """
    Return a copy of the artifact with one leaf signature bit cleared, as a negative control.

    The cleared bit is an edge column of path 0 within the largest leaf blocking one, so
    queries in that leaf return a colliding path.
    """
    assert artifact.path_set.n_paths > 0, "The artifact has no path to corrupt."
    tree = artifact.trees[obstacle]
    path_columns = artifact.path_set.incidence_bits()[0].copy()
    path_columns[: tree.n_terminals] = False

    for leaf_idx in np.argsort(-tree.leaf_areas, kind="stable"):
        bits = tree.signature_bits(int(leaf_idx))
        hits = np.flatnonzero(bits & path_columns)
        if len(hits):
            break
    else:
        raise AssertionError("No leaf blocks an edge of path 0.")
    leaf_idx, column = int(leaf_idx), int(hits[0])

    bits[column] = False
    corrupted_tree = tree.copy()
    old_leaf = tree.leaves[leaf_idx]
    corrupted_tree.leaves[leaf_idx] = Leaf(old_leaf.region, pack_bits(bits), old_leaf.area)
    trees = list(artifact.trees)
    trees[obstacle] = corrupted_tree
    logger.info("Cleared column %d of leaf %d of obstacle %r.", column, leaf_idx, tree.obstacle_id)
    return dataclasses.replace(artifact, trees=trees)
