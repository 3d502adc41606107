from .roadmap import Roadmap, RoadmapView, ROLE_START, ROLE_GOAL, ROLE_INTERIOR
from .path_set import DEFAULT_PATH_CAP, PathSet, enumerate_paths, pack_bits, unpack_bits, popcount, resize_packed
