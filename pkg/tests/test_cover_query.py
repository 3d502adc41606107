import os
import tempfile
import unittest

import numpy as np

from coverplan.cover_search import (
    OUTCOME_INFEASIBLE,
    OUTCOME_PATH,
    OUTCOME_UNCOVERED,
    BuildParams,
    CoverageArtifact,
    CoverQuery,
    CoverQueryCore,
    batch_query,
    query,
)
from coverplan.coverage import evaluate_coverage
from coverplan.errors import ArtifactMismatch, OutOfRegion, ParseError
from coverplan.file_io import read_artifact, save_scene, scene_fingerprint, write_artifact
from coverplan.geometry import Region, square
from coverplan.roadmap import Roadmap
from coverplan.scene import Arrangement, MovableObstacleSpec, Scene, get_scene, make_scene_with_footprints
from coverplan.scene.bundled_scenes import point_robot

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


def make_artifact(scene, *paths):
    roadmap = Roadmap(scene)
    for waypoints in paths:
        roadmap.add_path(waypoints)
    path_set, trees, sets, report = evaluate_coverage(scene, roadmap)
    return CoverageArtifact(scene, scene_fingerprint(scene), BuildParams(seed=0), roadmap, path_set, trees, sets, report)


class TestCoverQuery(unittest.TestCase):
    def setUp(self):
        self.artifact = make_artifact(get_scene("analytic_strip"), [START, GOAL])
        self.engine = CoverQuery(self.artifact)

    def test_uncovered(self):
        result = self.engine.query([(2.5, 2.5)])
        self.assertEqual(result.outcome, OUTCOME_UNCOVERED)
        self.assertEqual(result.leaves, (0,))
        self.assertEqual(result.path_index, -1)
        self.assertIsNone(result.waypoints)
        self.assertFalse(result.boundary_ambiguous)

    def test_path(self):
        result = self.engine.query({"obs1": (2.5, 0.5)})
        self.assertEqual(result.outcome, OUTCOME_PATH)
        self.assertEqual(result.path_index, 0)
        np.testing.assert_almost_equal(result.waypoints, [START, GOAL])
        same = self.engine.query(Arrangement.from_positions(self.artifact.scene, [(1.0, 4.5)]))
        self.assertEqual(same.outcome, OUTCOME_PATH)

    def test_work_is_constant(self):
        for position in [(2.5, 2.5), (2.5, 0.5), (0.1, 4.9)]:
            stats = self.engine.query([position]).stats
            self.assertEqual(stats.tree_steps, 1)
            self.assertEqual(stats.matvec_bit_ops, 3)
            self.assertEqual(stats.geometric_checks, 0)
        self.assertEqual(self.engine.work_bound, {"tree_steps": 1, "matvec_bit_ops": 3, "geometric_checks": 0})

    def test_boundary_goes_to_the_blocking_side(self):
        result = self.engine.query([(2.5, 2.0)])
        self.assertTrue(result.boundary_ambiguous)
        self.assertEqual(result.outcome, OUTCOME_UNCOVERED)

    def test_out_of_region(self):
        with self.assertRaises(OutOfRegion):
            self.engine.query([(6.0, 6.0)])

    def test_result_dict(self):
        data = self.engine.query([(2.5, 2.5)]).to_dict()
        self.assertEqual(data["outcome"], "uncovered")
        self.assertEqual(data["signature"], "20")
        self.assertEqual(data["stats"]["tree_steps"], 1)

    def test_shared_memory(self):
        self.engine.save_memory_for_multiprocessing()
        self.assertEqual(self.engine.query([(2.5, 2.5)]).outcome, OUTCOME_UNCOVERED)
        self.assertEqual(self.engine.query([(2.5, 0.5)]).outcome, OUTCOME_PATH)

    def test_read_and_write(self):
        path_test = tempfile.mkdtemp()
        self.engine.write(path_test)
        engine = CoverQuery()
        self.assertTrue(engine.read(path_test))
        self.assertEqual(engine.fingerprint, self.artifact.fingerprint)
        for position in [(2.5, 2.5), (2.5, 0.5), (2.5, 2.0)]:
            a, b = self.engine.query([position]), engine.query([position])
            self.assertEqual(a.outcome, b.outcome)
            self.assertEqual(a.leaves, b.leaves)
            self.assertEqual(a.boundary_ambiguous, b.boundary_ambiguous)

    def test_read_checks_the_scene(self):
        path_test = tempfile.mkdtemp()
        self.engine.write(path_test)
        self.assertTrue(CoverQuery().read(path_test, scene=self.artifact.scene))
        with self.assertRaises(ArtifactMismatch):
            CoverQuery().read(path_test, scene=get_scene("two_edge_overlap"))

        # An index whose stored scene was swapped for another one.
        save_scene(get_scene("two_edge_overlap"), os.path.join(path_test, "scene.json"))
        with self.assertRaises(ArtifactMismatch):
            CoverQuery().read(path_test)

    def test_read_missing_index(self):
        self.assertFalse(CoverQueryCore().read(tempfile.mkdtemp()))

    def test_module_functions(self):
        scene = self.artifact.scene
        self.assertEqual(query(self.artifact, [(2.5, 0.5)], scene=scene).outcome, OUTCOME_PATH)
        results = batch_query(self.artifact, [[(2.5, 0.5)], [(2.5, 2.5)]])
        self.assertEqual([r.outcome for r in results], [OUTCOME_PATH, OUTCOME_UNCOVERED])
        self.assertEqual(batch_query(self.artifact, []), [])
        with self.assertRaises(ArtifactMismatch):
            query(self.artifact, [(2.5, 0.5)], scene=make_scene_with_footprints(scene, [0.5]))


class TestInfeasibleQuery(unittest.TestCase):
    def test_terminal_blocked(self):
        scene = Scene(
            robot=point_robot(),
            static_obstacles=Region.empty(),
            movables=(MovableObstacleSpec("obs1", square(1.0), Region.rectangle(0.0, 0.0, 5.0, 5.0)),),
            starts=((-0.3, 2.5),),
            goals=((6.0, 2.5),),
            workspace_bounds=(-2.0, -1.0, 7.0, 6.0),
        )
        engine = CoverQuery(make_artifact(scene, [(-0.3, 2.5), (6.0, 2.5)]))
        self.assertEqual(engine.query([(0.1, 2.5)]).outcome, OUTCOME_INFEASIBLE)
        self.assertEqual(engine.query([(2.5, 2.5)]).outcome, OUTCOME_UNCOVERED)
        self.assertEqual(engine.query([(2.5, 4.0)]).outcome, OUTCOME_PATH)

    def test_no_movables(self):
        scene = get_scene("open_field")
        engine = CoverQuery(make_artifact(scene, [(0.2, 0.5), (1.8, 0.5)]))
        result = engine.query([])
        self.assertEqual(result.outcome, OUTCOME_PATH)
        self.assertEqual(result.stats.tree_steps, 0)


class TestArtifactFile(unittest.TestCase):
    def setUp(self):
        self.artifact = make_artifact(get_scene("two_edge_overlap"), [(0.0, 0.0), (2.0, 1.5), (4.0, 0.0)])
        self.path_test = tempfile.mkdtemp()

    def test_round_trip(self):
        file_artifact = os.path.join(self.path_test, "two_edges.cpa")
        digest = write_artifact(self.artifact, file_artifact)
        loaded = read_artifact(file_artifact, scene=get_scene("two_edge_overlap"))
        self.assertEqual(loaded.fingerprint, self.artifact.fingerprint)
        self.assertEqual(loaded.path_set.paths, self.artifact.path_set.paths)
        np.testing.assert_array_equal(loaded.trees[0].leaf_signatures, self.artifact.trees[0].leaf_signatures)
        np.testing.assert_array_equal(loaded.sets.status, self.artifact.sets.status)
        self.assertAlmostEqual(loaded.report.raw_coverage, self.artifact.report.raw_coverage)

        original, restored = CoverQuery(self.artifact), CoverQuery(loaded)
        for position in [(0.5, 0.6), (2.0, 1.5), (3.5, 2.4), (1.0, 2.0)]:
            a, b = original.query([position]), restored.query([position])
            self.assertEqual(a.outcome, b.outcome)
            self.assertEqual(a.leaves, b.leaves)

        file_again = os.path.join(self.path_test, "two_edges_again.cpa")
        self.assertEqual(write_artifact(loaded, file_again), digest)

    def test_wrong_scene(self):
        file_artifact = os.path.join(self.path_test, "two_edges.cpa")
        write_artifact(self.artifact, file_artifact)
        with self.assertRaises(ArtifactMismatch):
            read_artifact(file_artifact, scene=get_scene("analytic_strip"))

    def test_not_an_artifact(self):
        file_broken = os.path.join(self.path_test, "broken.cpa")
        with open(file_broken, "wb") as f:
            f.write(b"\x93\x01\x02")
        with self.assertRaises(ParseError):
            read_artifact(file_broken)


if __name__ == "__main__":
    unittest.main()
