from .scene import MovableObstacleSpec, Scene, Arrangement, collides, collides_many, sweep_collides
from .bundled_scenes import BUNDLED_SCENES, BENCHMARK_SCENES, get_scene, make_scene_with_footprints
