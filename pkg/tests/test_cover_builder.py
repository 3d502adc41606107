import dataclasses
import os
import tempfile
import unittest

import numpy as np

from coverplan.cover_search import (
    MODE_APP_BASELINE,
    WARM_START_DISJOINT,
    BuildParams,
    PlanningWorld,
    baseline_footprint,
    build,
    composite_occupancy,
    plan,
    repair,
    warm_start_disjoint,
)
from coverplan.cover_search.cover_builder import _BuildState, _check_resolved
from coverplan.coverage import evaluate_coverage
from coverplan.errors import PlannerFailure, ValidationError
from coverplan.file_io import scene_fingerprint, write_artifact
from coverplan.geometry import Region
from coverplan.roadmap import Roadmap, unpack_bits
from coverplan.scene import get_scene
from coverplan.verify import footprint_sweep

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


class TestPlanner(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("open_field")
        self.starts = np.array([[0.2, 0.5]])
        self.goals = np.array([[1.8, 0.5]])

    def test_direct_path(self):
        for planner in ("prm", "rrt"):
            waypoints = plan(planner, PlanningWorld(self.scene), self.starts, self.goals, np.random.default_rng(1))
            np.testing.assert_almost_equal(waypoints, [[0.2, 0.5], [1.8, 0.5]])

    def test_detour(self):
        world = PlanningWorld(self.scene, [Region.rectangle(0.9, 0.2, 1.1, 0.6)])
        for planner in ("prm", "rrt"):
            waypoints = plan(planner, world, self.starts, self.goals, np.random.default_rng(1), n_samples=2000)
            np.testing.assert_almost_equal(waypoints[0], [0.2, 0.5])
            np.testing.assert_almost_equal(waypoints[-1], [1.8, 0.5])
            self.assertGreater(len(waypoints), 2)
            self.assertTrue(world.path_free(waypoints))

    def test_failure(self):
        wall = PlanningWorld(self.scene, [Region.rectangle(0.9, 0.0, 1.1, 1.0)])
        with self.assertRaises(PlannerFailure):
            plan("prm", wall, self.starts, self.goals, np.random.default_rng(1), n_samples=100)
        with self.assertRaises(PlannerFailure):
            plan("rrt", wall, self.starts, self.goals, np.random.default_rng(1), n_samples=100)
        covered_start = PlanningWorld(self.scene, [Region.rectangle(0.1, 0.4, 0.3, 0.6)])
        with self.assertRaises(PlannerFailure):
            plan("prm", covered_start, self.starts, self.goals, np.random.default_rng(1))


class TestBuildParams(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ValidationError):
            BuildParams(seed=None)
        with self.assertRaises(ValidationError):
            BuildParams(seed=True)
        with self.assertRaises(ValidationError):
            BuildParams(seed=1, planner="astar")
        with self.assertRaises(ValidationError):
            BuildParams(seed=1, path_cap=0)
        with self.assertRaises(ValidationError):
            BuildParams(seed=1, goal_bias=1.5)
        with self.assertRaises(ValidationError):
            BuildParams.from_dict({"seed": 1, "colour": "red"})

    def test_dict(self):
        params = BuildParams(seed=5, planner="rrt", max_iterations=3)
        self.assertEqual(BuildParams.from_dict(params.to_dict()), params)


class TestRepair(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("analytic_strip")
        self.roadmap = Roadmap(self.scene).add_path([START, GOAL])
        _, self.trees, self.sets, _ = evaluate_coverage(self.scene, self.roadmap)

    def test_composite_occupancy(self):
        occupancy = composite_occupancy(self.sets[0], self.trees)
        self.assertEqual(len(occupancy), 1)
        self.assertAlmostEqual(occupancy[0].area, 12.0)
        np.testing.assert_almost_equal(occupancy[0].bounds, (-0.5, 1.5, 5.5, 3.5))

    def test_repair_avoids_the_whole_leaf(self):
        arrangement_set = self.sets[0]
        blocked = unpack_bits(arrangement_set.composite_signature, self.roadmap.n_columns)
        view = self.roadmap.remove_invalid_edges(blocked)
        self.assertEqual(view.edge_ids, [])
        occupancy = composite_occupancy(arrangement_set, self.trees)
        waypoints = repair(view, occupancy, self.scene, BuildParams(seed=1), np.random.default_rng(1))
        self.assertTrue(PlanningWorld(self.scene, occupancy).path_free(waypoints))

        self.roadmap.add_path(waypoints)
        report = evaluate_coverage(self.scene, self.roadmap).report
        self.assertGreater(report.raw_coverage, 0.8)

    def test_warm_start_disjoint(self):
        paths = warm_start_disjoint(self.scene, 1, BuildParams(seed=2))
        self.assertGreaterEqual(len(paths), 1)
        self.assertLessEqual(len(paths), 2)
        for waypoints in paths:
            np.testing.assert_almost_equal(waypoints[0], START)
            np.testing.assert_almost_equal(waypoints[-1], GOAL)

    def test_baseline_footprint(self):
        self.assertAlmostEqual(baseline_footprint(get_scene("table_pick")).area, 0.04)
        self.assertAlmostEqual(baseline_footprint(get_scene("shelf_high")).area, 0.01)


class TestBuild(unittest.TestCase):
    def test_two_corridor_is_fully_covered(self):
        artifact = build(get_scene("two_corridor"), BuildParams(seed=1, planner_samples=2000))
        artifact.check_consistency()
        self.assertAlmostEqual(artifact.report.raw_coverage, 1.0, delta=1e-9)
        self.assertEqual(len(artifact.report.uncovered), 0)
        self.assertEqual(artifact.build_log[0]["outcome"], "initial")
        self.assertAlmostEqual(artifact.build_log[0]["raw_coverage"], 0.0, delta=1e-9)
        self.assertFalse(artifact.timed_out)

    def test_coverage_never_decreases(self):
        artifact = build(get_scene("analytic_strip"), BuildParams(seed=3, max_iterations=4, planner_samples=300))
        artifact.check_consistency()
        coverage = [entry["raw_coverage"] for entry in artifact.build_log]
        self.assertAlmostEqual(coverage[0], 0.8, delta=1e-9)
        self.assertTrue(all(b >= a - 1e-12 for a, b in zip(coverage[:-1], coverage[1:])))
        self.assertAlmostEqual(artifact.report.raw_coverage, coverage[-1])

    def test_same_seed_same_roadmap(self):
        params = BuildParams(seed=11, max_iterations=2, planner_samples=200)
        first = build(get_scene("single_corridor"), params)
        second = build(get_scene("single_corridor"), params)
        np.testing.assert_array_equal(first.roadmap.vertex_xy, second.roadmap.vertex_xy)
        self.assertEqual(first.roadmap.edges, second.roadmap.edges)
        self.assertEqual(first.report.raw_coverage, second.report.raw_coverage)

        path_test = tempfile.mkdtemp()
        file_first, file_second = os.path.join(path_test, "first.cpa"), os.path.join(path_test, "second.cpa")
        self.assertEqual(write_artifact(first, file_first), write_artifact(second, file_second))
        with open(file_first, "rb") as f1, open(file_second, "rb") as f2:
            self.assertEqual(f1.read(), f2.read())
        self.assertEqual(first.report.to_dict(), second.report.to_dict())

    def test_same_seed_same_bytes_with_two_obstacles(self):
        params = BuildParams(seed=4, max_iterations=2, planner_samples=300)
        path_test = tempfile.mkdtemp()
        digests = [write_artifact(build(get_scene("table_pick"), params), os.path.join(path_test, f"table_{i}.cpa")) for i in range(2)]
        self.assertEqual(digests[0], digests[1])

    def test_timeout_returns_the_roadmap_so_far(self):
        artifact = build(get_scene("analytic_strip"), BuildParams(seed=1, max_total_time=1e-9))
        self.assertTrue(artifact.timed_out)
        self.assertEqual(len(artifact.build_log), 1)
        self.assertAlmostEqual(artifact.report.raw_coverage, 0.8, delta=1e-9)

    def test_no_movables(self):
        artifact = build(get_scene("open_field"), BuildParams(seed=1))
        self.assertEqual(artifact.report.raw_coverage, 1.0)
        self.assertEqual(artifact.trees, [])

    def test_app_baseline(self):
        scene = get_scene("table_pick")
        artifact = build(scene, BuildParams(seed=1, mode=MODE_APP_BASELINE, planner_samples=300))
        artifact.check_consistency()
        self.assertEqual(sorted(artifact.footprints), ["box", "can"])
        for spec in artifact.evaluated_scene.movables:
            self.assertAlmostEqual(spec.footprint.area, 0.04)
        self.assertLessEqual(artifact.path_set.n_paths, 3 ** 3)
        self.assertEqual(len(artifact.build_log), 1)

    def test_repaired_set_must_be_covered(self):
        scene = get_scene("analytic_strip")
        state = _BuildState(scene, BuildParams(seed=1), scene_fingerprint(scene))
        state.evaluate()
        whole_region = state.sets[0]
        state.roadmap.add_path([START, GOAL])
        state.evaluate()
        # The direct edge leaves the [0, 5] x [2, 3] strip of the old leaf uncovered.
        with self.assertRaises(AssertionError):
            _check_resolved(state, whole_region)

        strip = state.sets[state.uncovered_queue()[0]]
        blocked = unpack_bits(strip.composite_signature, state.roadmap.n_columns)
        occupancy = composite_occupancy(strip, state.trees)
        waypoints = repair(state.roadmap.remove_invalid_edges(blocked), occupancy, scene, state.params, np.random.default_rng(1))
        state.roadmap.add_path(waypoints)
        state.evaluate()
        _check_resolved(state, strip)


class TestCoverageOrderings(unittest.TestCase):
    def setUp(self):
        self.params = BuildParams(seed=2, max_iterations=2, planner_samples=300)

    def test_warm_start_cover_beats_disjoint_paths_and_baseline(self):
        for name in ("table_pick", "shelf_high"):
            with self.subTest(scene=name):
                scene = get_scene(name)
                roadmap = Roadmap(scene)
                for waypoints in warm_start_disjoint(scene, scene.n_movables, self.params):
                    roadmap.add_path(waypoints)
                disjoint = evaluate_coverage(scene, roadmap).report.raw_coverage

                cover = build(scene, dataclasses.replace(self.params, warm_start=WARM_START_DISJOINT))
                baseline = build(scene, dataclasses.replace(self.params, mode=MODE_APP_BASELINE))
                self.assertAlmostEqual(cover.build_log[0]["raw_coverage"], disjoint, delta=1e-9)
                self.assertGreaterEqual(cover.report.raw_coverage, disjoint - 1e-9)
                self.assertGreaterEqual(cover.report.raw_coverage, baseline.report.raw_coverage - 1e-9)

    def test_shrinking_a_footprint_never_lowers_coverage(self):
        for name in ("table_pick", "shelf_high"):
            with self.subTest(scene=name):
                scene = get_scene(name)
                artifact = build(scene, self.params)
                sides = [float(np.max(np.ptp(spec.footprint.vertices, axis=0))) for spec in scene.movables]
                size_pairs = [[fraction * sides[0]] + sides[1:] for fraction in (1.0, 0.75, 0.5, 0.25)]
                coverage = [row["raw_coverage"] for row in footprint_sweep(scene, artifact.roadmap, size_pairs)]
                self.assertAlmostEqual(coverage[0], artifact.report.raw_coverage, delta=1e-9)
                for larger, smaller in zip(coverage[:-1], coverage[1:]):
                    self.assertGreaterEqual(smaller, larger - 1e-9)


if __name__ == "__main__":
    unittest.main()
