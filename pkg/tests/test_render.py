import os
import tempfile
import unittest

from coverplan.cover_search import BuildParams, CoverageArtifact
from coverplan.coverage import evaluate_coverage
from coverplan.errors import UnknownTarget
from coverplan.file_io import scene_fingerprint
from coverplan.render import RenderSpec, render, signature_color
from coverplan.roadmap import Roadmap
from coverplan.scene import get_scene

START, GOAL = (-1.0, 2.5), (6.0, 2.5)


class TestRender(unittest.TestCase):
    def setUp(self):
        scene = get_scene("analytic_strip")
        roadmap = Roadmap(scene).add_path([START, GOAL])
        path_set, trees, sets, report = evaluate_coverage(scene, roadmap)
        self.artifact = CoverageArtifact(scene, scene_fingerprint(scene), BuildParams(seed=0), roadmap, path_set, trees, sets, report)

    def test_tree(self):
        svg = render(self.artifact, RenderSpec("tree:obs1"))
        self.assertTrue(svg.startswith("<?xml") or svg.startswith("<svg"))
        self.assertEqual(svg.count('class="leaf"'), 2)
        self.assertIn('class="hatch"', svg)
        self.assertIn('class="edge"', svg)
        self.assertIn("raw coverage 0.800000", svg)

    def test_envelopes(self):
        layers = {"regions": True, "roadmap": True, "paths": True, "envelopes": True, "legend": False}
        svg = render(self.artifact, RenderSpec("tree:obs1", layers=layers))
        self.assertEqual(svg.count('class="envelope"'), 1)
        self.assertNotIn('class="legend"', svg)

    def test_heatmap(self):
        svg = render(self.artifact, RenderSpec("coverage-heatmap"))
        self.assertEqual(svg.count('class="covered"'), 1)
        self.assertEqual(svg.count('class="uncovered"'), 1)
        self.assertNotIn('class="infeasible"', svg)

    def test_unknown_targets(self):
        for target in ("bogus", "tree", "tree:nope", "coverage-heatmap:nope"):
            with self.assertRaises(UnknownTarget):
                render(self.artifact, RenderSpec(target))
        with self.assertRaises(UnknownTarget):
            render(None, RenderSpec("roadmap"), scene=get_scene("analytic_strip"))

    def test_scene_only(self):
        svg = render(scene=get_scene("single_corridor"))
        self.assertIn('class="static"', svg)
        self.assertIn('class="region"', svg)
        self.assertNotIn('class="edge"', svg)

    def test_write_file(self):
        file_svg = os.path.join(tempfile.mkdtemp(), "roadmap.svg")
        svg = render(self.artifact, RenderSpec("roadmap", output=file_svg, width=400))
        with open(file_svg, "r", encoding="utf-8") as f:
            self.assertEqual(f.read(), svg)
        self.assertIn('class="path"', svg)

    def test_signature_color(self):
        signatures = self.artifact.trees[0].leaf_signatures
        self.assertEqual(signature_color(signatures[0]), signature_color(signatures[0].copy()))
        self.assertNotEqual(signature_color(signatures[0]), signature_color(signatures[1]))


if __name__ == "__main__":
    unittest.main()
