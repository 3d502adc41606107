#!/usr/bin/env python3
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .roadmap import Roadmap

logger = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 512

# Number of set bits of every byte value.
_POPCOUNT_TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean array along its last axis into bytes, big-endian bit order."""
    return np.packbits(np.asarray(bits, dtype=bool), axis=-1)


def unpack_bits(packed: np.ndarray, n_bits: int) -> np.ndarray:
    return np.unpackbits(np.asarray(packed, dtype=np.uint8), axis=-1, count=n_bits).astype(bool)


def popcount(packed: np.ndarray) -> np.ndarray:
    """Number of set bits along the last axis of a packed array."""
    return _POPCOUNT_TABLE[np.asarray(packed, dtype=np.uint8)].sum(axis=-1, dtype=np.int64)


def resize_packed(packed: np.ndarray, n_bits: int) -> np.ndarray:
    """Zero-extend packed rows so they hold n_bits."""
    n_bytes = (n_bits + 7) // 8
    packed = np.asarray(packed, dtype=np.uint8)
    if packed.shape[-1] >= n_bytes:
        return packed[..., :n_bytes]
    pad = [(0, 0)] * (packed.ndim - 1) + [(0, n_bytes - packed.shape[-1])]
    return np.pad(packed, pad)


@dataclass
class PathSet:
    """
    The enumerated start-to-goal paths and their path-column incidence matrix P.

    ``incidence`` holds one packed bit row per path. Column k < n_terminals is terminal
    vertex k (starts, then goals) and column n_terminals + e is edge e.
    """

    paths: List[Tuple[int, ...]]
    incidence: np.ndarray
    n_columns: int
    n_terminals: int
    n_starts: int
    truncated: bool = False
    path_cap: int = DEFAULT_PATH_CAP

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def incidence_bits(self) -> np.ndarray:
        """The unpacked boolean incidence matrix with shape (n_paths, n_columns)."""
        return unpack_bits(self.incidence, self.n_columns).reshape((self.n_paths, self.n_columns))

    @property
    def edge_block(self) -> np.ndarray:
        """The edge columns of P."""
        return self.incidence_bits()[:, self.n_terminals :]

    @property
    def terminal_block(self) -> np.ndarray:
        """The start and goal vertex columns of P."""
        return self.incidence_bits()[:, : self.n_terminals]

    def blocked_paths(self, signature: np.ndarray) -> np.ndarray:
        """
        The number of columns each path shares with a packed signature.
        """
        signature = resize_packed(signature, self.n_columns)
        return popcount(self.incidence & signature[None, :])

    def first_free_path(self, signature: np.ndarray) -> int:
        """The lowest path index with no blocked column, or -1."""
        free = np.flatnonzero(self.blocked_paths(signature) == 0)
        return int(free[0]) if len(free) else -1


def enumerate_paths(roadmap: Roadmap, path_cap: int = DEFAULT_PATH_CAP) -> PathSet:
    """
    Enumerate simple start-to-goal paths by depth-first search.

    Starts are explored in index order and neighbors in increasing vertex index, so the path
    order is lexicographic by vertex index. A path ends at the first goal it reaches and
    never passes through another terminal vertex.

    :param roadmap:     The roadmap.
    :param path_cap:    The maximum number of paths. When more exist, the result is
                        truncated and flagged.
    :return:    The PathSet with its incidence matrix.
    """
    assert path_cap > 0, "The path cap must be positive."
    adjacency = {v: sorted(roadmap.graph.neighbors(v)) for v in roadmap.graph.nodes}
    paths = []
    truncated = False

    for start in roadmap.start_ids:
        on_path = {start}
        path = [start]
        stack = [iter(adjacency[start])]
        while stack:
            next_vertex = next(stack[-1], None)
            if next_vertex is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if next_vertex in on_path:
                continue
            if roadmap.is_goal(next_vertex):
                if len(paths) == path_cap:
                    truncated = True
                    break
                paths.append(tuple(path) + (next_vertex,))
                continue
            if roadmap.is_terminal(next_vertex):
                continue
            path.append(next_vertex)
            on_path.add(next_vertex)
            stack.append(iter(adjacency[next_vertex]))
        if truncated:
            break

    if truncated:
        logger.warning("Path enumeration truncated at %d paths; coverage is reported as a lower bound.", path_cap)

    bits = np.zeros((len(paths), roadmap.n_columns), dtype=bool)
    for j, path in enumerate(paths):
        bits[j, path[0]] = True
        bits[j, path[-1]] = True
        for u, v in zip(path[:-1], path[1:]):
            bits[j, roadmap.edge_column(roadmap.edge_id(u, v))] = True

    return PathSet(
        paths=paths,
        incidence=pack_bits(bits).reshape((len(paths), (roadmap.n_columns + 7) // 8)),
        n_columns=roadmap.n_columns,
        n_terminals=roadmap.n_terminals,
        n_starts=roadmap.n_starts,
        truncated=truncated,
        path_cap=path_cap,
    )
