import unittest

import numpy as np

from coverplan.coverage import (
    REPORT_SCHEMA,
    STATUS_COVERED,
    STATUS_INFEASIBLE,
    STATUS_UNCOVERED,
    all_combinations,
    arrangement_volume,
    classify,
    coverage_ratio,
    evaluate_coverage,
    partition_all,
)
from coverplan.errors import CombinationExplosion
from coverplan.geometry import Region, square
from coverplan.roadmap import Roadmap, enumerate_paths
from coverplan.scene import MovableObstacleSpec, Scene, get_scene
from coverplan.scene.bundled_scenes import point_robot

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


class TestAnalyticStrip(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("analytic_strip")
        self.roadmap = Roadmap(self.scene).add_path([START, GOAL])
        self.path_set, self.trees, self.sets, self.report = evaluate_coverage(self.scene, self.roadmap)

    def test_coverage(self):
        self.assertAlmostEqual(self.report.raw_coverage, 0.8, delta=1e-9)
        self.assertAlmostEqual(self.report.feasible_coverage, 0.8, delta=1e-9)
        self.assertAlmostEqual(self.report.vol_cov, 20.0)
        self.assertAlmostEqual(self.report.vol_uncov, 5.0)
        self.assertAlmostEqual(self.report.vol_infeasible, 0.0)
        self.assertAlmostEqual(self.report.total_volume, 25.0)
        self.assertFalse(self.report.lower_bound_flag)

    def test_sets(self):
        self.assertEqual(len(self.sets), 2)
        np.testing.assert_array_equal(self.sets.status, [STATUS_UNCOVERED, STATUS_COVERED])
        self.assertEqual(self.sets[0].status, "uncovered")
        self.assertEqual(self.sets[0].leaf_refs, (0,))
        self.assertEqual(len(self.report.uncovered), 1)
        self.assertEqual(self.sets.find([1]), 1)
        self.assertEqual(self.sets.find([5]), -1)

    def test_report_dict(self):
        data = self.report.to_dict()
        self.assertEqual(data["schema"], REPORT_SCHEMA)
        self.assertEqual(data["n_uncovered"], 1)
        self.assertEqual(data["uncovered"][0]["leaf_refs"], [0])
        self.assertAlmostEqual(data["uncovered"][0]["volume"], 5.0)
        self.assertTrue(data["obstacle_overlap_included"])

    def test_footprint_override(self):
        report = evaluate_coverage(self.scene, self.roadmap, footprints={"obs1": square(2.0)}).report
        self.assertAlmostEqual(report.raw_coverage, 0.6, delta=1e-9)

    def test_no_path(self):
        report = evaluate_coverage(self.scene, Roadmap(self.scene)).report
        self.assertEqual(report.raw_coverage, 0.0)
        self.assertAlmostEqual(report.vol_uncov, 25.0)

    def test_truncated_paths_flag_a_lower_bound(self):
        self.roadmap.add_path([START, (2.5, 5.5), GOAL])
        report = evaluate_coverage(self.scene, self.roadmap, path_cap=1).report
        self.assertTrue(report.lower_bound_flag)
        self.assertAlmostEqual(report.raw_coverage, 0.8, delta=1e-9)


class TestInfeasibleSets(unittest.TestCase):
    def setUp(self):
        self.scene = Scene(
            robot=point_robot(),
            static_obstacles=Region.empty(),
            movables=(MovableObstacleSpec("obs1", square(1.0), Region.rectangle(0.0, 0.0, 5.0, 5.0)),),
            starts=((-0.3, 2.5),),
            goals=((6.0, 2.5),),
            workspace_bounds=(-2.0, -1.0, 7.0, 6.0),
        )
        self.roadmap = Roadmap(self.scene).add_path([(-0.3, 2.5), (6.0, 2.5)])

    def test_terminal_columns_decide_infeasibility(self):
        _, trees, sets, report = evaluate_coverage(self.scene, self.roadmap)
        np.testing.assert_almost_equal(trees[0].leaf_areas, [0.2, 4.8, 20.0])
        np.testing.assert_array_equal(sets.status, [STATUS_INFEASIBLE, STATUS_UNCOVERED, STATUS_COVERED])
        self.assertAlmostEqual(report.vol_infeasible, 0.2)
        self.assertAlmostEqual(report.raw_coverage, 0.8, delta=1e-9)
        self.assertAlmostEqual(report.feasible_coverage, 20.0 / 24.8, delta=1e-9)

    def test_infeasible_even_without_paths(self):
        _, _, sets, report = evaluate_coverage(self.scene, Roadmap(self.scene))
        self.assertEqual(sets.status[0], STATUS_INFEASIBLE)
        self.assertAlmostEqual(report.vol_infeasible, 0.2)
        self.assertEqual(report.raw_coverage, 0.0)


class TestCombinations(unittest.TestCase):
    def setUp(self):
        self.scene = get_scene("table_pick")
        self.roadmap = Roadmap(self.scene).add_path([(0.1, 0.3), (0.7, 0.3)])
        self.trees = partition_all(self.roadmap, self.scene.movables)

    def test_cartesian_product(self):
        sets = all_combinations(self.trees)
        self.assertEqual(len(sets), self.trees[0].n_leaves * self.trees[1].n_leaves)
        self.assertAlmostEqual(float(np.sum(sets.volume)), arrangement_volume(self.scene))
        np.testing.assert_array_equal(sets.leaf_index[1], [0, 1])
        combined = sets.signature[1]
        expected = self.trees[0].leaf_signatures[0] | self.trees[1].leaf_signatures[1]
        np.testing.assert_array_equal(combined, expected)

    def test_combination_cap(self):
        with self.assertRaises(CombinationExplosion):
            all_combinations(self.trees, combo_cap=1)

    def test_classification_matches_the_paths(self):
        path_set = enumerate_paths(self.roadmap)
        sets = classify(path_set, all_combinations(self.trees), threads=1)
        for i in range(len(sets)):
            if sets.status[i] == STATUS_INFEASIBLE:
                continue
            expected = STATUS_COVERED if path_set.first_free_path(sets.signature[i]) >= 0 else STATUS_UNCOVERED
            self.assertEqual(sets.status[i], expected)
        report = coverage_ratio(sets, total_volume=arrangement_volume(self.scene))
        self.assertGreater(report.raw_coverage, 0.0)
        self.assertLess(report.raw_coverage, 1.0)


class TestNoMovables(unittest.TestCase):
    def test_open_field(self):
        scene = get_scene("open_field")
        roadmap = Roadmap(scene).add_path([(0.2, 0.5), (1.8, 0.5)])
        path_set, trees, sets, report = evaluate_coverage(scene, roadmap)
        self.assertEqual(trees, [])
        self.assertEqual(len(sets), 1)
        self.assertEqual(report.raw_coverage, 1.0)
        self.assertEqual(evaluate_coverage(scene, Roadmap(scene)).report.raw_coverage, 0.0)


if __name__ == "__main__":
    unittest.main()
