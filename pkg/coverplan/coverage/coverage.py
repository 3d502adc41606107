#!/usr/bin/env python3
"""
Arrangement sets, their classification against the path set and the coverage ratio.

An arrangement set picks one leaf per obstacle tree. Its composite signature is the OR of
the leaf signatures and its volume the product of the leaf areas. ANDing it with every row of
the path-column incidence matrix counts the blocked columns of each path: the set is covered
when some path has none.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from ..errors import CombinationExplosion
from ..parallel import parallel_map
from ..roadmap import DEFAULT_PATH_CAP, PathSet, Roadmap, enumerate_paths, resize_packed, unpack_bits
from ..scene import Scene
from .decomposition import DecompositionTree, partition_all

logger = logging.getLogger(__name__)

DEFAULT_COMBO_CAP = 10**6
REPORT_SCHEMA = "coverplan-report/1"

STATUS_UNCLASSIFIED = -1
STATUS_COVERED = 0
STATUS_UNCOVERED = 1
STATUS_INFEASIBLE = 2
STATUS_NAMES = {STATUS_UNCLASSIFIED: "unclassified", STATUS_COVERED: "covered", STATUS_UNCOVERED: "uncovered", STATUS_INFEASIBLE: "infeasible"}

# Upper bound of bytes materialized per classification chunk.
_CHUNK_BYTES = 1 << 24


@dataclass(frozen=True)
class ArrangementSet:
    leaf_refs: tuple
    composite_signature: np.ndarray
    volume: float
    status: str

    def signature_bits(self, n_columns: int) -> np.ndarray:
        return unpack_bits(self.composite_signature, n_columns)


class ArrangementSets:
    """
    All arrangement sets of one tree generation, stored as parallel arrays.

    Indexing returns an :class:`ArrangementSet`; ``len()`` and iteration work as for a list.
    """

    def __init__(self, leaf_index: np.ndarray, signature: np.ndarray, volume: np.ndarray, n_columns: int, n_terminals: int, n_starts: int, status=None):
        self.leaf_index = np.asarray(leaf_index, dtype=np.int64)
        self.signature = np.asarray(signature, dtype=np.uint8)
        self.volume = np.asarray(volume, dtype=np.float64)
        self.n_columns = n_columns
        self.n_terminals = n_terminals
        self.n_starts = n_starts
        if status is None:
            status = np.full(len(self.volume), STATUS_UNCLASSIFIED, dtype=np.int8)
        self.status = np.asarray(status, dtype=np.int8)

    def __len__(self):
        return len(self.volume)

    def __getitem__(self, i) -> ArrangementSet:
        return ArrangementSet(
            leaf_refs=tuple(int(x) for x in self.leaf_index[i]),
            composite_signature=self.signature[i],
            volume=float(self.volume[i]),
            status=STATUS_NAMES[int(self.status[i])],
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def subset(self, mask_or_indices) -> "ArrangementSets":
        return ArrangementSets(
            self.leaf_index[mask_or_indices],
            self.signature[mask_or_indices],
            self.volume[mask_or_indices],
            self.n_columns,
            self.n_terminals,
            self.n_starts,
            self.status[mask_or_indices],
        )

    def find(self, leaf_refs) -> int:
        """Index of the set with the given leaf per obstacle, or -1."""
        hit = np.flatnonzero(np.all(self.leaf_index == np.asarray(leaf_refs, dtype=np.int64)[None, :], axis=1))
        return int(hit[0]) if len(hit) else -1

    def status_of(self, status: int) -> np.ndarray:
        return np.flatnonzero(self.status == status)


def all_combinations(trees: Sequence[DecompositionTree], combo_cap: int = DEFAULT_COMBO_CAP, roadmap: Optional[Roadmap] = None) -> ArrangementSets:
    """
    The Cartesian product of the leaves of every tree.

    :param trees:   One tree per movable obstacle, all built for the same columns.
    :param combo_cap:   The maximum number of sets.
    :param roadmap: Required when there are no trees, to size the (all-zero) signature.
    :return:    The sets in row-major order of the leaf indices (the last obstacle varies fastest).
    :raises CombinationExplosion:   if the number of sets exceeds combo_cap.
    """
    if trees:
        n_columns = trees[0].n_columns
        assert all(t.n_columns == n_columns for t in trees), "All trees must be built for the same columns."
        n_terminals, n_starts = trees[0].n_terminals, trees[0].n_starts
    else:
        assert roadmap is not None, "A roadmap is needed to size the signatures when there are no obstacles."
        n_columns, n_terminals, n_starts = roadmap.n_columns, roadmap.n_terminals, roadmap.n_starts
    n_bytes = (n_columns + 7) // 8

    if not trees:
        return ArrangementSets(np.zeros((1, 0), dtype=np.int64), np.zeros((1, n_bytes), dtype=np.uint8), np.ones(1), n_columns, n_terminals, n_starts)

    total = 1
    for tree in trees:
        total *= tree.n_leaves
    if total > combo_cap:
        raise CombinationExplosion(
            f"{total} arrangement sets exceed the cap of {combo_cap}. Reduce the number of movable obstacles, "
            f"the size of their configuration regions or the roadmap size, or raise combo_cap."
        )

    grids = np.meshgrid(*[np.arange(tree.n_leaves, dtype=np.int64) for tree in trees], indexing="ij")
    leaf_index = np.stack([g.reshape(-1) for g in grids], axis=1)

    signature = np.zeros((total, n_bytes), dtype=np.uint8)
    volume = np.ones(total, dtype=np.float64)
    for i, tree in enumerate(trees):
        signature |= tree.leaf_signatures[leaf_index[:, i]]
        volume *= tree.leaf_areas[leaf_index[:, i]]
    return ArrangementSets(leaf_index, signature, volume, n_columns, n_terminals, n_starts)


def classify(path_set: PathSet, sets: ArrangementSets, threads: Optional[int] = None) -> ArrangementSets:
    """
    Label every set covered, uncovered or infeasible.

    A set is infeasible when its signature blocks every start column or every goal column.
    Otherwise it is covered when some path has no blocked column (v_j = popcount(P_j & b) = 0)
    and uncovered when every path is blocked.

    :return:    The same sets with ``status`` filled in.
    """
    assert path_set.n_columns == sets.n_columns, "The signature length must equal the column count of P."
    n_sets = len(sets)
    n_bytes = sets.signature.shape[1]
    chunk = max(1, _CHUNK_BYTES // max(1, path_set.n_paths * n_bytes))
    chunks = [(begin, min(begin + chunk, n_sets)) for begin in range(0, n_sets, chunk)]

    incidence = resize_packed(path_set.incidence, sets.n_columns).reshape((path_set.n_paths, n_bytes))
    results = parallel_map(
        partial(_classify_chunk, sets.signature, incidence, sets.n_terminals, sets.n_starts),
        chunks,
        threads=threads if len(chunks) > 1 else 1,
    )
    status = np.concatenate(results) if results else np.zeros(0, dtype=np.int8)
    sets.status = status.astype(np.int8)
    return sets


def _classify_chunk(signature, incidence, n_terminals, n_starts, bounds):
    begin, end = bounds
    sig = signature[begin:end]
    n_terminal_bytes = (n_terminals + 7) // 8
    terminal_bits = unpack_bits(sig[:, :n_terminal_bytes], n_terminals).reshape((-1, n_terminals))
    infeasible = np.all(terminal_bits[:, :n_starts], axis=1) | np.all(terminal_bits[:, n_starts:], axis=1)

    if incidence.shape[0] == 0:
        covered = np.zeros(end - begin, dtype=bool)
    else:
        hit = np.any((sig[:, None, :] & incidence[None, :, :]) != 0, axis=2)
        covered = ~np.all(hit, axis=1)

    status = np.where(covered, STATUS_COVERED, STATUS_UNCOVERED).astype(np.int8)
    status[infeasible] = STATUS_INFEASIBLE
    return status


@dataclass
class CoverageReport:
    """
    Raw and feasible coverage of a classified generation of arrangement sets.

    Volumes are in m^(2n). Arrangements in which movable obstacles overlap each other are
    part of the measure; ``obstacle_overlap_included`` records that choice in the JSON form.
    """

    raw_coverage: float
    feasible_coverage: float
    vol_cov: float
    vol_uncov: float
    vol_infeasible: float
    total_volume: float
    uncovered: ArrangementSets
    lower_bound_flag: bool = False
    n_sets: int = 0
    n_paths: int = 0
    n_columns: int = 0
    obstacle_overlap_included: bool = True
    warnings: List[str] = field(default_factory=list)

    def to_dict(self, max_listed: int = 1000) -> dict:
        order = np.argsort(-self.uncovered.volume, kind="stable")[:max_listed]
        return {
            "schema": REPORT_SCHEMA,
            "raw_coverage": float(self.raw_coverage),
            "feasible_coverage": float(self.feasible_coverage),
            "vol_cov": float(self.vol_cov),
            "vol_uncov": float(self.vol_uncov),
            "vol_infeasible": float(self.vol_infeasible),
            "total_volume": float(self.total_volume),
            "lower_bound": bool(self.lower_bound_flag),
            "obstacle_overlap_included": bool(self.obstacle_overlap_included),
            "n_sets": int(self.n_sets),
            "n_paths": int(self.n_paths),
            "n_columns": int(self.n_columns),
            "n_uncovered": len(self.uncovered),
            "uncovered": [
                {
                    "leaf_refs": [int(x) for x in self.uncovered.leaf_index[i]],
                    "volume": float(self.uncovered.volume[i]),
                    "signature": self.uncovered.signature[i].tobytes().hex(),
                }
                for i in order
            ],
            "warnings": list(self.warnings),
        }


def coverage_ratio(sets: ArrangementSets, truncated: bool = False, total_volume: Optional[float] = None, n_paths: int = 0) -> CoverageReport:
    """
    Compute the covered share of the arrangement volume from classified sets, plus the feasible variant that leaves
    the infeasible volume out of the denominator.

    :param sets:    Classified sets of one tree generation.
    :param truncated:   Whether path enumeration was truncated. The coverage is then a lower bound.
    :param total_volume:    The arrangement volume, the product of the effective region areas. Defaults to the
                            summed set volume.
    """
    assert np.all(sets.status != STATUS_UNCLASSIFIED), "The sets must be classified first."
    vol_cov = float(np.sum(sets.volume[sets.status == STATUS_COVERED]))
    vol_uncov = float(np.sum(sets.volume[sets.status == STATUS_UNCOVERED]))
    vol_infeasible = float(np.sum(sets.volume[sets.status == STATUS_INFEASIBLE]))
    if total_volume is None:
        total_volume = float(np.sum(sets.volume))
    feasible_volume = total_volume - vol_infeasible
    return CoverageReport(
        raw_coverage=vol_cov / total_volume if total_volume > 0 else 0.0,
        feasible_coverage=vol_cov / feasible_volume if feasible_volume > 0 else 0.0,
        vol_cov=vol_cov,
        vol_uncov=vol_uncov,
        vol_infeasible=vol_infeasible,
        total_volume=float(total_volume),
        uncovered=sets.subset(sets.status == STATUS_UNCOVERED),
        lower_bound_flag=bool(truncated),
        n_sets=len(sets),
        n_paths=n_paths,
        n_columns=sets.n_columns,
    )


def arrangement_volume(scene: Scene) -> float:
    """The arrangement volume: the product of the effective configuration region areas (1.0 without movables)."""
    volume = 1.0
    for spec in scene.movables:
        volume *= spec.effective_region.area
    return volume


class CoverageEvaluation(NamedTuple):
    path_set: PathSet
    trees: List[DecompositionTree]
    sets: ArrangementSets
    report: CoverageReport


def evaluate_coverage(
    scene: Scene,
    roadmap: Roadmap,
    path_cap: int = DEFAULT_PATH_CAP,
    combo_cap: int = DEFAULT_COMBO_CAP,
    footprints: Optional[dict] = None,
    threads: Optional[int] = None,
) -> CoverageEvaluation:
    """
    Evaluate the coverage of a fixed roadmap from scratch.

    :param scene:   The scene. Its movables define the trees.
    :param roadmap: The roadmap to evaluate.
    :param footprints:  Optional footprint override per obstacle id, e.g. to evaluate a
                        roadmap against smaller or larger obstacles.
    """
    if footprints:
        scene = scene.with_footprints(footprints)
    path_set = enumerate_paths(roadmap, path_cap)
    trees = partition_all(roadmap, scene.movables, threads=threads)
    sets = classify(path_set, all_combinations(trees, combo_cap, roadmap=roadmap), threads=threads)
    report = coverage_ratio(sets, truncated=path_set.truncated, total_volume=arrangement_volume(scene), n_paths=path_set.n_paths)
    for tree in trees:
        report.warnings.extend(f"{tree.obstacle_id}: {w}" for w in tree.warnings)
    logger.info("Coverage: raw %.6f, feasible %.6f over %d set(s) and %d path(s).", report.raw_coverage, report.feasible_coverage, len(sets), path_set.n_paths)
    return CoverageEvaluation(path_set, trees, sets, report)
