from .polygon import (
    EPS_SNAP,
    EPS_AREA,
    Point2,
    Segment,
    ConvexPolygon,
    Region,
    area,
    boolean,
    union_all,
    minkowski_sum_convex,
    minkowski_sum_region,
    swept_hull,
    swept_hulls,
    placed_shapes,
    contains,
    intersects,
)
from .tools import DEFAULT_POLYGON_SIDES, regular_polygon, square, rectangle, clean_loop
