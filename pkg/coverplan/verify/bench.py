#!/usr/bin/env python3
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..cover_search import MODE_APP_BASELINE, MODE_COVER, OUTCOME_PATH, WARM_START_DISJOINT, BuildParams, CoverageArtifact, CoverQuery, build
from ..coverage import DEFAULT_COMBO_CAP, evaluate_coverage
from ..roadmap import DEFAULT_PATH_CAP, Roadmap
from ..scene import Scene, make_scene_with_footprints
from .monte_carlo import sample_arrangements

logger = logging.getLogger(__name__)

BENCH_SCHEMA = "coverplan-bench/1"
EXPERIMENT_SCHEMA = "coverplan-experiment/1"
DEFAULT_TRIALS = 5
SIZE_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


@dataclass
class BenchResult:
    """Query latencies in seconds and the work counters of every query."""

    latencies: np.ndarray
    tree_steps: List[int] = field(default_factory=list)
    matvec_bit_ops: List[int] = field(default_factory=list)
    geometric_checks: List[int] = field(default_factory=list)

    @property
    def n_queries(self) -> int:
        return len(self.latencies)

    @property
    def work_is_constant(self) -> bool:
        return all(len(set(x)) <= 1 for x in (self.tree_steps, self.matvec_bit_ops, self.geometric_checks))

    def percentile(self, q: float) -> Optional[float]:
        return float(np.percentile(self.latencies, q)) if self.n_queries else None

    def to_dict(self) -> dict:
        return {
            "schema": BENCH_SCHEMA,
            "n_queries": self.n_queries,
            "min": float(np.min(self.latencies)) if self.n_queries else None,
            "median": self.percentile(50),
            "p95": self.percentile(95),
            "max": float(np.max(self.latencies)) if self.n_queries else None,
            "work_is_constant": self.work_is_constant,
            "tree_steps": self.tree_steps[0] if self.tree_steps else None,
            "matvec_bit_ops": self.matvec_bit_ops[0] if self.matvec_bit_ops else None,
            "geometric_checks": max(self.geometric_checks, default=0),
        }


def bench_query(artifact: CoverageArtifact, n_queries: int, seed: int, warmup: int = 10) -> BenchResult:
    """
    Time seeded random queries against an artifact.

    :param n_queries:   The number of timed queries.
    :param seed:    The seed of the sampled arrangements.
    :param warmup:  Untimed queries run first.
    """
    engine = CoverQuery(artifact, check_region=False)
    rng = np.random.default_rng(seed)
    samples = sample_arrangements(artifact.scene, n_queries + warmup, rng)
    for positions in samples[:warmup]:
        engine.query(positions)

    latencies = np.zeros(n_queries, dtype=np.float64)
    result = BenchResult(latencies)
    for i, positions in enumerate(samples[warmup:]):
        started = time.perf_counter()
        answer = engine.query(positions)
        latencies[i] = time.perf_counter() - started
        result.tree_steps.append(answer.stats.tree_steps)
        result.matvec_bit_ops.append(answer.stats.matvec_bit_ops)
        result.geometric_checks.append(answer.stats.geometric_checks)
    if n_queries:
        logger.info("Query latency over %d quer(ies): median %.3g s, p95 %.3g s.", n_queries, result.percentile(50), result.percentile(95))
    return result


def footprint_sweep(
    scene: Scene,
    roadmap: Roadmap,
    size_pairs: Sequence[Sequence[float]],
    path_cap: int = DEFAULT_PATH_CAP,
    combo_cap: int = DEFAULT_COMBO_CAP,
) -> List[dict]:
    """
    Re-evaluate a fixed roadmap with square footprints of the given side lengths.

    :param size_pairs:  One tuple of side lengths per row, in the scene's obstacle order.
    :return:    One row per tuple with the raw and feasible coverage.
    """
    rows = []
    for sizes in size_pairs:
        sized_scene = make_scene_with_footprints(scene, sizes)
        report = evaluate_coverage(sized_scene, roadmap, path_cap=path_cap, combo_cap=combo_cap).report
        rows.append({"sizes": [float(s) for s in sizes], "raw_coverage": report.raw_coverage, "feasible_coverage": report.feasible_coverage})
        logger.info("Footprints %s: raw coverage %.6f.", tuple(sizes), report.raw_coverage)
    return rows


def query_success_rate(artifacts: Mapping[str, CoverageArtifact], scene: Scene, n_samples: int, seed: int) -> Dict[str, float]:
    """
    The fraction of uniformly sampled arrangements answered with a path, per artifact.
    Every artifact sees the same samples.
    """
    samples = sample_arrangements(scene, n_samples, np.random.default_rng(seed))
    rates = {}
    for name, artifact in artifacts.items():
        engine = CoverQuery(artifact, check_region=False)
        answered = sum(engine.query(positions).outcome == OUTCOME_PATH for positions in samples)
        rates[name] = answered / n_samples if n_samples else 0.0
    return rates


def default_size_pairs(scene: Scene) -> List[List[float]]:
    """
    Square side lengths in obstacle order: every obstacle but the first keeps the side of the
    largest footprint, the first grows through SIZE_FRACTIONS of it.
    """
    assert scene.n_movables > 0, "The scene has no movable obstacle."
    largest = max(float(np.max(np.ptp(spec.footprint.vertices, axis=0))) for spec in scene.movables)
    return [[fraction * largest] + [largest] * (scene.n_movables - 1) for fraction in SIZE_FRACTIONS]


def _median(values: Sequence[Optional[float]]) -> Optional[float]:
    values = [v for v in values if v is not None]
    return float(np.median(values)) if values else None


def _relative(value: float, reference: float) -> Optional[float]:
    return value / reference if reference > 0 else None


def footprint_experiment(
    scene: Scene,
    size_pairs: Sequence[Sequence[float]],
    params: BuildParams,
    n_trials: int = DEFAULT_TRIALS,
) -> dict:
    """
    Compare the cover build with the disjoint-paths baseline over footprint sizes.

    Every size tuple is built ``n_trials`` times with seeds ``params.seed + trial``. Each trial
    runs a cover build warm-started from the disjoint paths and the app_baseline build from the
    same paths. The coverage of the disjoint paths alone is the first entry of the cover build
    log. Coverage relative to the disjoint paths is the ratio to that entry.

    :param size_pairs:  One tuple of square side lengths per row, in obstacle order.
    :param params:  The build parameters. ``warm_start`` and ``mode`` are set per build.
    :return:    A report with one row per size tuple holding the medians over trials and the
                per-trial values.
    """
    assert n_trials > 0, "At least one trial is needed."
    rows = []
    for sizes in size_pairs:
        sized_scene = make_scene_with_footprints(scene, sizes)
        trials = []
        for trial in range(n_trials):
            seed = params.seed + trial
            cover = build(sized_scene, dataclasses.replace(params, seed=seed, warm_start=WARM_START_DISJOINT, mode=MODE_COVER))
            baseline = build(sized_scene, dataclasses.replace(params, seed=seed, mode=MODE_APP_BASELINE))
            disjoint = float(cover.build_log[0]["raw_coverage"])
            report = cover.report
            trials.append(
                {
                    "seed": int(seed),
                    "disjoint": disjoint,
                    "cover": float(report.raw_coverage),
                    "app_baseline": float(baseline.report.raw_coverage),
                    "max_feasible": 1.0 - float(report.vol_infeasible / report.total_volume) if report.total_volume > 0 else 1.0,
                    "cover_relative": _relative(float(report.raw_coverage), disjoint),
                    "app_baseline_relative": _relative(float(baseline.report.raw_coverage), disjoint),
                    "timed_out": bool(cover.timed_out),
                }
            )
        row = {"sizes": [float(s) for s in sizes], "trials": trials}
        for key in ("disjoint", "cover", "app_baseline", "max_feasible", "cover_relative", "app_baseline_relative"):
            row[key] = _median([t[key] for t in trials])
        rows.append(row)
        logger.info(
            "Footprints %s: median coverage cover %.4f, app_baseline %.4f, disjoint paths %.4f.",
            tuple(sizes),
            row["cover"],
            row["app_baseline"],
            row["disjoint"],
        )
    return {"schema": EXPERIMENT_SCHEMA, "scene": scene.name, "n_trials": int(n_trials), "params": params.to_dict(), "rows": rows}
