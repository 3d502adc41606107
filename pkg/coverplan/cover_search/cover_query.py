#!/usr/bin/env python3
import logging
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Union

import numpy as np

from ..errors import ArtifactMismatch
from ..file_io.scene_file import load_scene, save_scene, scene_fingerprint
from ..scene import Arrangement, Scene
from .cover_builder import CoverageArtifact
from .cover_query_core import CoverQueryCore, QueryResult

logger = logging.getLogger(__name__)

ArrangementLike = Union[Arrangement, Mapping, Sequence, np.ndarray]


class CoverQuery:
    def __init__(self, artifact: Optional[CoverageArtifact] = None, path_data=None, check_region: bool = True):
        """
        Answer arrangement queries against a coverage artifact.

        :param artifact:    The artifact to index. When None, call read() or build_index() later.
        :param path_data:   The directory used by read() and write() when they get no path.
        :param check_region:    Validate that every position lies in its configuration region
                                before locating it. The check is input validation; the query
                                itself performs no collision test.
        """
        self.core = CoverQueryCore(path_data=path_data)
        self.check_region = check_region
        self.scene: Optional[Scene] = None
        self.fingerprint = ""
        if artifact is not None:
            self.build_index(artifact)

    def build_index(self, artifact: CoverageArtifact):
        artifact.check_consistency()
        self.scene = artifact.scene
        self.fingerprint = artifact.fingerprint
        self.core.build_index(artifact.trees, artifact.path_set, artifact.roadmap)
        logger.debug("Indexed %d tree(s), %d path(s) and %d column(s).", self.core.n_obstacles, self.core.n_paths, self.core.n_columns)

    @property
    def work_bound(self) -> dict:
        """The work every query of this index performs."""
        return {
            "tree_steps": int(np.sum(self.core.index[1])) if self.core.index else 0,
            "matvec_bit_ops": self.core.n_paths * self.core.n_columns,
            "geometric_checks": 0,
        }

    def positions_of(self, arrangement: ArrangementLike) -> np.ndarray:
        """Positions in obstacle order, shape (n_obstacles, 2)."""
        if isinstance(arrangement, Mapping):
            arrangement = Arrangement(dict(arrangement))
        if isinstance(arrangement, Arrangement):
            if self.check_region:
                self.scene.check_arrangement(arrangement)
            return arrangement.as_array(self.scene)

        positions = np.asarray(arrangement, dtype=np.float64).reshape((-1, 2))
        if self.check_region:
            self.scene.check_arrangement(Arrangement.from_positions(self.scene, positions))
        return positions

    def query(self, arrangement: ArrangementLike) -> QueryResult:
        """
        Answer one query.

        :param arrangement: An Arrangement, a mapping from obstacle id to position, or the
                            positions in the scene's obstacle order.
        :raises OutOfRegion:    if a position lies outside its configuration region.
        """
        return self.core.search(self.positions_of(arrangement))

    def batch_query(self, arrangements: Sequence[ArrangementLike]) -> List[QueryResult]:
        return [self.query(arrangement) for arrangement in arrangements]

    def write(self, path_data=None):
        """
        Write the index and its scene to a directory.

        :param path_data:   The directory to write.
        """
        if path_data is None:
            path_data = self.core.path_data
        path_data = Path(path_data)
        path_data.mkdir(parents=True, exist_ok=True)
        save_scene(self.scene, path_data / "scene.json")
        (path_data / "fingerprint").write_text(self.fingerprint, encoding="utf-8")
        self.core.write(path_data)

    def read(self, path_data=None, scene: Optional[Scene] = None):
        """
        Read the index and its scene from a directory.

        :param path_data:   The directory to read.
        :param scene:   When given, the index must have been built for this scene.
        :return:    True if the index was read.
        :raises ArtifactMismatch:   if the stored scene differs from the indexed one, or from ``scene``.
        """
        if path_data is None:
            path_data = self.core.path_data
        path_data = Path(path_data)
        self.scene = load_scene(path_data / "scene.json")
        self.fingerprint = (path_data / "fingerprint").read_text(encoding="utf-8").strip()
        check_fingerprint(self, self.scene)
        check_fingerprint(self, scene)
        return self.core.read(path_data)

    def save_memory_for_multiprocessing(self):
        """
        Move the index to shared memory.

        Not required with one worker. With several workers it avoids one copy of the index per worker.
        """
        self.core.save_memory_for_multiprocessing()


def check_fingerprint(artifact: Union[CoverageArtifact, CoverQuery], scene: Optional[Scene]):
    """
    Compare the scene with the fingerprint of an artifact or a query index.

    :raises ArtifactMismatch:   if the scene differs from the one the artifact was built for.
    """
    if scene is not None and scene_fingerprint(scene) != artifact.fingerprint:
        raise ArtifactMismatch(f"The artifact was built for scene {artifact.fingerprint[:12]}, not {scene_fingerprint(scene)[:12]}.")


def query(artifact: CoverageArtifact, arrangement: ArrangementLike, scene: Optional[Scene] = None) -> QueryResult:
    """
    Answer one arrangement query. For many queries build a CoverQuery once instead.

    :param scene:   When given, the artifact fingerprint is checked against it.
    """
    check_fingerprint(artifact, scene)
    return CoverQuery(artifact).query(arrangement)


def batch_query(artifact: CoverageArtifact, arrangements: Sequence[ArrangementLike], scene: Optional[Scene] = None) -> List[QueryResult]:
    check_fingerprint(artifact, scene)
    if len(arrangements) == 0:
        return []
    return CoverQuery(artifact).batch_query(arrangements)
