import json
import os
import tempfile
import unittest

from coverplan.cli import EXIT_OK, EXIT_USER_ERROR, EXIT_VERIFY_FAILED, run
from coverplan.cover_search import BuildParams, CoverageArtifact
from coverplan.coverage import REPORT_SCHEMA, evaluate_coverage
from coverplan.file_io import read_artifact, read_report, scene_fingerprint, write_artifact
from coverplan.roadmap import Roadmap
from coverplan.scene import get_scene
from coverplan.verify import BENCH_SCHEMA, EXPERIMENT_SCHEMA, VERIFY_SCHEMA

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.path_test = tempfile.mkdtemp()
        scene = get_scene("analytic_strip")
        roadmap = Roadmap(scene).add_path([START, GOAL])
        path_set, trees, sets, report = evaluate_coverage(scene, roadmap)
        artifact = CoverageArtifact(scene, scene_fingerprint(scene), BuildParams(seed=0), roadmap, path_set, trees, sets, report)
        self.file_artifact = os.path.join(self.path_test, "strip.cpa")
        write_artifact(artifact, self.file_artifact)

    def output(self, name):
        return os.path.join(self.path_test, name)

    def test_build(self):
        file_out = self.output("built.cpa")
        code = run(["--quiet", "build", "--scene", "bundled:analytic_strip", "--seed", "3", "--out", file_out, "--max-iterations", "2", "--planner-samples", "300"])
        self.assertEqual(code, EXIT_OK)
        artifact = read_artifact(file_out, scene=get_scene("analytic_strip"))
        self.assertGreaterEqual(artifact.report.raw_coverage, 0.8 - 1e-9)
        report = read_report(f"{file_out}.report.json", REPORT_SCHEMA)
        self.assertIn("timed_out", report)
        self.assertAlmostEqual(report["raw_coverage"], artifact.report.raw_coverage)

    def test_build_twice_same_bytes(self):
        files = [self.output(f"again_{i}.cpa") for i in range(2)]
        for file_out in files:
            code = run(["--quiet", "build", "--scene", "bundled:single_corridor", "--seed", "5", "--out", file_out, "--max-iterations", "2", "--planner-samples", "200"])
            self.assertEqual(code, EXIT_OK)
        for suffix in ("", ".report.json"):
            with open(files[0] + suffix, "rb") as f1, open(files[1] + suffix, "rb") as f2:
                self.assertEqual(f1.read(), f2.read())

    def test_experiment(self):
        file_result = self.output("experiment.json")
        code = run(["--quiet", "experiment", "--scene", "bundled:analytic_strip", "--seed", "1", "--trials", "2", "--size-pairs", "0.5;1.0", "--max-iterations", "1", "--planner-samples", "200", "--out", file_result])
        self.assertEqual(code, EXIT_OK)
        result = read_report(file_result, EXPERIMENT_SCHEMA)
        self.assertEqual([row["sizes"] for row in result["rows"]], [[0.5], [1.0]])
        self.assertEqual(len(result["rows"][0]["trials"]), 2)

        base = ["--quiet", "experiment", "--seed", "1"]
        self.assertEqual(run(base + ["--scene", "bundled:analytic_strip", "--size-pairs", "0.5,1.0"]), EXIT_USER_ERROR)
        self.assertEqual(run(base + ["--scene", "bundled:analytic_strip", "--trials", "0"]), EXIT_USER_ERROR)
        self.assertEqual(run(base + ["--scene", "bundled:open_field"]), EXIT_USER_ERROR)

    def test_coverage(self):
        file_report = self.output("coverage.json")
        self.assertEqual(run(["--quiet", "coverage", "--artifact", self.file_artifact, "--out", file_report]), EXIT_OK)
        self.assertAlmostEqual(read_report(file_report, REPORT_SCHEMA)["raw_coverage"], 0.8, delta=1e-9)

        self.assertEqual(run(["--quiet", "coverage", "--artifact", self.file_artifact, "--footprints", "2.0", "--out", file_report]), EXIT_OK)
        self.assertAlmostEqual(read_report(file_report, REPORT_SCHEMA)["raw_coverage"], 0.6, delta=1e-9)

        self.assertEqual(run(["--quiet", "coverage", "--artifact", self.file_artifact, "--footprints", "1.0,2.0"]), EXIT_USER_ERROR)

    def test_query(self):
        file_result = self.output("query.json")
        self.assertEqual(run(["--quiet", "query", "--artifact", self.file_artifact, "--arrangement", "2.5,0.5", "--out", file_result]), EXIT_OK)
        self.assertEqual(read_report(file_result)["outcome"], "path")

        file_arrangement = self.output("arrangement.json")
        with open(file_arrangement, "w") as f:
            json.dump({"obs1": [2.5, 2.5]}, f)
        self.assertEqual(run(["--quiet", "query", "--artifact", self.file_artifact, "--arrangement", file_arrangement, "--out", file_result]), EXIT_OK)
        self.assertEqual(read_report(file_result)["outcome"], "uncovered")

    def test_query_errors(self):
        base = ["--quiet", "query", "--artifact", self.file_artifact]
        self.assertEqual(run(base + ["--arrangement", "6.0,6.0"]), EXIT_USER_ERROR)
        self.assertEqual(run(base + ["--arrangement", "1,2;3,4"]), EXIT_USER_ERROR)
        self.assertEqual(run(base + ["--arrangement", "2.5,0.5", "--scene", "bundled:two_edge_overlap"]), EXIT_USER_ERROR)
        self.assertEqual(run(["--quiet", "query", "--artifact", self.output("missing.cpa"), "--arrangement", "2.5,0.5"]), EXIT_USER_ERROR)

    def test_verify(self):
        file_report = self.output("verify.json")
        code = run(["--quiet", "verify", "--artifact", self.file_artifact, "--samples", "300", "--seed", "1", "--grid-resolution", "20", "--out", file_report])
        self.assertEqual(code, EXIT_OK)
        report = read_report(file_report, VERIFY_SCHEMA)
        self.assertEqual(report["sound_violations"], 0)
        self.assertEqual(report["grid_mismatches"], 0)
        self.assertEqual(report["grid"]["agreement"], 1.0)

    def test_verify_flipped_bit_fails(self):
        code = run(["--quiet", "verify", "--artifact", self.file_artifact, "--samples", "300", "--seed", "1", "--flip-bit", "--out", self.output("flip.json")])
        self.assertEqual(code, EXIT_VERIFY_FAILED)
        self.assertGreater(read_report(self.output("flip.json"), VERIFY_SCHEMA)["sound_violations"], 0)

    def test_render(self):
        file_svg = self.output("tree.svg")
        self.assertEqual(run(["--quiet", "render", "--artifact", self.file_artifact, "--target", "tree:obs1", "--out", file_svg]), EXIT_OK)
        with open(file_svg, "r", encoding="utf-8") as f:
            self.assertIn('class="leaf"', f.read())
        self.assertEqual(run(["--quiet", "render", "--scene", "bundled:table_pick", "--out", self.output("scene.svg")]), EXIT_OK)
        self.assertTrue(os.path.exists(self.output("scene.svg")))
        self.assertEqual(run(["--quiet", "render", "--artifact", self.file_artifact, "--target", "bogus", "--out", file_svg]), EXIT_USER_ERROR)
        self.assertEqual(run(["--quiet", "render", "--out", file_svg]), EXIT_USER_ERROR)

    def test_bench(self):
        file_result = self.output("bench.json")
        self.assertEqual(run(["--quiet", "bench", "--artifact", self.file_artifact, "--queries", "20", "--seed", "1", "--out", file_result]), EXIT_OK)
        result = read_report(file_result, BENCH_SCHEMA)
        self.assertEqual(result["n_queries"], 20)
        self.assertTrue(result["work_is_constant"])

    def test_bad_arguments(self):
        self.assertEqual(run([]), EXIT_USER_ERROR)
        self.assertEqual(run(["frobnicate"]), EXIT_USER_ERROR)
        self.assertEqual(run(["build", "--scene", "bundled:analytic_strip"]), EXIT_USER_ERROR)
        self.assertEqual(run(["--quiet", "build", "--scene", "bundled:nowhere", "--seed", "1", "--out", self.output("x.cpa")]), EXIT_USER_ERROR)


if __name__ == "__main__":
    unittest.main()
