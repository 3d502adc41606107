import unittest
import warnings

import numpy as np

from coverplan.cover_search import BuildParams, CoverageArtifact, build
from coverplan.coverage import STATUS_COVERED, STATUS_INFEASIBLE, STATUS_UNCOVERED, evaluate_coverage
from coverplan.errors import ArtifactMismatch, ResolutionTooCoarse, ValidationError
from coverplan.file_io import scene_fingerprint
from coverplan.geometry import Region, square
from coverplan.roadmap import Roadmap
from coverplan.scene import BENCHMARK_SCENES, MovableObstacleSpec, Scene, get_scene
from coverplan.scene.bundled_scenes import point_robot
from coverplan.verify import (
    BENCH_SCHEMA,
    EXPERIMENT_SCHEMA,
    VERIFY_SCHEMA,
    bench_query,
    compare_with_classification,
    default_size_pairs,
    flip_signature_bit,
    footprint_experiment,
    footprint_sweep,
    grid_oracle,
    interpolate_path,
    monte_carlo_verify,
    query_success_rate,
    sample_arrangements,
)

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


def make_artifact(scene, roadmap):
    path_set, trees, sets, report = evaluate_coverage(scene, roadmap)
    return CoverageArtifact(scene, scene_fingerprint(scene), BuildParams(seed=0), roadmap, path_set, trees, sets, report)


class TestMonteCarlo(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("analytic_strip")
        self.artifact = make_artifact(self.scene, Roadmap(self.scene).add_path([START, GOAL]))

    def test_sound_and_within_bound(self):
        report = monte_carlo_verify(self.artifact, self.scene, n_samples=2000, seed=7, poses_per_segment=50, threads=1)
        self.assertEqual(report.samples, 2000)
        self.assertEqual(report.sound_violations, 0)
        self.assertAlmostEqual(report.computed_coverage, 0.8, delta=1e-9)
        self.assertAlmostEqual(report.empirical_coverage, 0.8, delta=0.05)
        self.assertTrue(report.passed)
        data = report.to_dict()
        self.assertEqual(data["schema"], VERIFY_SCHEMA)
        self.assertTrue(data["passed"])

    def test_same_seed_same_report(self):
        first = monte_carlo_verify(self.artifact, self.scene, n_samples=300, seed=3, poses_per_segment=20, threads=1)
        second = monte_carlo_verify(self.artifact, self.scene, n_samples=300, seed=3, poses_per_segment=20, threads=1)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_flipped_bit_is_caught(self):
        corrupted = flip_signature_bit(self.artifact)
        self.assertEqual(self.artifact.trees[0].signature_bits(0).tolist(), [False, False, True])
        self.assertEqual(corrupted.trees[0].signature_bits(0).tolist(), [False, False, False])
        report = monte_carlo_verify(corrupted, self.scene, n_samples=500, seed=7, poses_per_segment=50, threads=1)
        self.assertGreater(report.sound_violations, 0)
        self.assertFalse(report.passed)
        self.assertGreater(len(report.violation_examples), 0)

    def test_wrong_scene(self):
        with self.assertRaises(ArtifactMismatch):
            monte_carlo_verify(self.artifact, get_scene("two_edge_overlap"), n_samples=10, seed=0)

    def test_sampling(self):
        samples = sample_arrangements(get_scene("table_pick"), 100, np.random.default_rng(0))
        self.assertEqual(samples.shape, (100, 2, 2))
        self.assertEqual(sample_arrangements(get_scene("open_field"), 5, np.random.default_rng(0)).shape, (5, 0, 2))

    def test_interpolate_path(self):
        poses = interpolate_path(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]), poses_per_segment=3)
        np.testing.assert_almost_equal(poses, [[0, 0], [0.5, 0], [1, 0], [1, 0], [1, 0.5], [1, 1]])


class TestGridOracle(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("analytic_strip")
        self.roadmap = Roadmap(self.scene).add_path([START, GOAL])
        self.artifact = make_artifact(self.scene, self.roadmap)

    def test_strip_agrees(self):
        oracle = grid_oracle(self.scene, self.roadmap, resolution=50, threads=1)
        self.assertEqual(oracle.n_cells, 2500)
        self.assertEqual(oracle.count(STATUS_UNCOVERED), 500)
        self.assertEqual(oracle.count(STATUS_COVERED), 2000)
        comparison = compare_with_classification(oracle, self.artifact)
        self.assertEqual(comparison.compared, 2500)
        self.assertEqual(comparison.mismatches, 0)
        self.assertEqual(comparison.agreement, 1.0)

    def test_coarse_grid_warns(self):
        oracle = grid_oracle(self.scene, self.roadmap, resolution=1)
        with self.assertWarns(ResolutionTooCoarse):
            compare_with_classification(oracle, self.artifact)

    def test_invalid_resolution(self):
        with self.assertRaises(ValidationError):
            grid_oracle(self.scene, self.roadmap, resolution=0)

    def test_infeasible_cells(self):
        scene = Scene(
            robot=point_robot(),
            static_obstacles=Region.empty(),
            movables=(MovableObstacleSpec("obs1", square(1.0), Region.rectangle(0.0, 0.0, 5.0, 5.0)),),
            starts=((-0.3, 2.5),),
            goals=((6.0, 2.5),),
            workspace_bounds=(-2.0, -1.0, 7.0, 6.0),
        )
        roadmap = Roadmap(scene).add_path([(-0.3, 2.5), (6.0, 2.5)])
        oracle = grid_oracle(scene, roadmap, resolution=50)
        # Centers at x = 0.05 and 0.15 with 2 < y < 3.
        self.assertEqual(oracle.count(STATUS_INFEASIBLE), 20)
        self.assertEqual(compare_with_classification(oracle, make_artifact(scene, roadmap)).mismatches, 0)

    def test_two_obstacles(self):
        scene = get_scene("table_pick")
        roadmap = Roadmap(scene).add_path([(0.1, 0.3), (0.7, 0.3)])
        oracle = grid_oracle(scene, roadmap, resolution=6, threads=1)
        self.assertEqual(oracle.status.shape, (36, 36))
        self.assertGreater(oracle.count(STATUS_COVERED), 0)
        self.assertGreater(oracle.count(STATUS_UNCOVERED), 0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResolutionTooCoarse)
            self.assertEqual(compare_with_classification(oracle, make_artifact(scene, roadmap)).mismatches, 0)


class TestBuiltScenes(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        params = BuildParams(seed=1, max_iterations=2, planner_samples=300)
        cls.artifacts = {name: build(get_scene(name), params) for name in BENCHMARK_SCENES}

    def test_oracle_agrees_with_classification(self):
        for name, artifact in self.artifacts.items():
            with self.subTest(scene=name):
                self.assertEqual(artifact.scene.n_movables, 2)
                oracle = grid_oracle(artifact.evaluated_scene, artifact.roadmap, resolution=12, path_cap=artifact.params.path_cap, threads=1)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ResolutionTooCoarse)
                    comparison = compare_with_classification(oracle, artifact)
                self.assertGreater(comparison.compared, 0)
                self.assertEqual(comparison.mismatches, 0)

    def test_returned_paths_are_collision_free(self):
        for name, artifact in self.artifacts.items():
            with self.subTest(scene=name):
                report = monte_carlo_verify(artifact, artifact.scene, n_samples=500, seed=5, poses_per_segment=20, threads=1)
                self.assertEqual(report.samples, 500)
                self.assertEqual(report.sound_violations, 0)
                self.assertEqual(report.infeasible_mismatches, 0)


class TestBench(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("analytic_strip")
        self.roadmap = Roadmap(self.scene).add_path([START, GOAL])
        self.artifact = make_artifact(self.scene, self.roadmap)

    def test_bench_query(self):
        result = bench_query(self.artifact, n_queries=50, seed=0, warmup=5)
        self.assertEqual(result.n_queries, 50)
        self.assertTrue(result.work_is_constant)
        self.assertTrue(np.all(result.latencies >= 0.0))
        data = result.to_dict()
        self.assertEqual(data["schema"], BENCH_SCHEMA)
        self.assertEqual(data["tree_steps"], 1)
        self.assertEqual(data["matvec_bit_ops"], 3)
        self.assertEqual(data["geometric_checks"], 0)
        self.assertLessEqual(data["median"], data["p95"])

    def test_latency_spread(self):
        result = bench_query(self.artifact, n_queries=1000, seed=2, warmup=100)
        self.assertTrue(result.work_is_constant)
        self.assertLessEqual(result.percentile(95), 2.0 * result.percentile(50))

    def test_no_queries(self):
        result = bench_query(self.artifact, n_queries=0, seed=0)
        self.assertIsNone(result.percentile(50))
        self.assertTrue(result.work_is_constant)

    def test_footprint_sweep(self):
        rows = footprint_sweep(self.scene, self.roadmap, [[1.0], [2.0]])
        self.assertEqual([row["sizes"] for row in rows], [[1.0], [2.0]])
        self.assertAlmostEqual(rows[0]["raw_coverage"], 0.8, delta=1e-9)
        self.assertAlmostEqual(rows[1]["raw_coverage"], 0.6, delta=1e-9)

    def test_query_success_rate(self):
        empty = make_artifact(self.scene, Roadmap(self.scene))
        rates = query_success_rate({"direct": self.artifact, "empty": empty}, self.scene, n_samples=1000, seed=1)
        self.assertAlmostEqual(rates["direct"], 0.8, delta=0.06)
        self.assertEqual(rates["empty"], 0.0)


class TestFootprintExperiment(unittest.TestCase):
    def test_default_size_pairs(self):
        np.testing.assert_almost_equal(default_size_pairs(get_scene("table_pick")), [[0.05, 0.2], [0.1, 0.2], [0.15, 0.2], [0.2, 0.2]])
        np.testing.assert_almost_equal(default_size_pairs(get_scene("analytic_strip")), [[0.25], [0.5], [0.75], [1.0]])

    def test_medians_over_trials(self):
        params = BuildParams(seed=3, max_iterations=1, planner_samples=200)
        result = footprint_experiment(get_scene("analytic_strip"), [[0.5], [1.0]], params, n_trials=3)
        self.assertEqual(result["schema"], EXPERIMENT_SCHEMA)
        self.assertEqual(result["n_trials"], 3)
        self.assertEqual([row["sizes"] for row in result["rows"]], [[0.5], [1.0]])
        for row in result["rows"]:
            self.assertEqual([t["seed"] for t in row["trials"]], [3, 4, 5])
            for trial in row["trials"]:
                self.assertGreaterEqual(trial["cover"], trial["disjoint"] - 1e-9)
                self.assertGreaterEqual(trial["cover"], trial["app_baseline"] - 1e-9)
                self.assertGreaterEqual(trial["cover_relative"], 1.0 - 1e-9)
                self.assertEqual(trial["max_feasible"], 1.0)
            self.assertAlmostEqual(row["cover"], float(np.median([t["cover"] for t in row["trials"]])))
            self.assertAlmostEqual(row["disjoint"], float(np.median([t["disjoint"] for t in row["trials"]])))
        # The direct path alone already covers everything but the blocked strip.
        self.assertGreaterEqual(result["rows"][1]["disjoint"], 0.8 - 1e-9)


if __name__ == "__main__":
    unittest.main()
