#!/usr/bin/env python3
import math

import numpy as np

from .polygon import EPS_AREA, EPS_SNAP, ConvexPolygon

DEFAULT_POLYGON_SIDES = 16


def regular_polygon(radius: float, sides: int = DEFAULT_POLYGON_SIDES, center=(0.0, 0.0)) -> ConvexPolygon:
    """
    A regular k-gon circumscribing the disc of the given radius.

    Curved footprints are only ever represented this way, so the polygon always contains the
    disc it stands in for.

    :param radius:  The radius of the disc, in meters.
    :param sides:   The number of sides, at least 3. Default is 16.
    :param center:  The center of the disc.
    """
    assert sides >= 3, "A regular polygon needs at least 3 sides."
    assert radius > 0, "The radius must be positive."
    vertex_radius = radius / math.cos(math.pi / sides)
    angles = np.arange(sides, dtype=np.float64) * (2 * math.pi / sides)
    vertices = np.column_stack((np.cos(angles), np.sin(angles))) * vertex_radius + np.asarray(center, dtype=np.float64)
    return ConvexPolygon(vertices)


def square(side: float, center=(0.0, 0.0)) -> ConvexPolygon:
    return rectangle(side, side, center)


def rectangle(width: float, height: float, center=(0.0, 0.0)) -> ConvexPolygon:
    cx, cy = center
    hw, hh = width / 2, height / 2
    return ConvexPolygon([(cx - hw, cy - hh), (cx + hw, cy - hh), (cx + hw, cy + hh), (cx - hw, cy + hh)])


def clean_loop(loop, min_edge_length: float = EPS_SNAP, ccw: bool = True) -> np.ndarray:
    """
    Clean a polygon loop with the following steps:

        1. Drop the closing vertex if the loop is given closed.
        2. Merge consecutive vertices closer than min_edge_length.
        3. Remove collinear vertices.
        4. Orient the loop counter-clockwise (or clockwise when ccw is False).

    Parameters
    ----------
    loop : np.ndarray in shape (n, 2) or list[list[float, float]]
        The vertices of the loop.

    min_edge_length : float, optional
        Vertices closer than this are merged. Defaults to EPS_SNAP.

    ccw : bool, optional
        The wanted orientation. Defaults to True.

    Returns
    -------
    np.ndarray in shape (m, 2), dtype=np.float64
        The cleaned loop. It is empty when fewer than 3 vertices survive or the loop has no area.
    """
    loop = np.asarray(loop, dtype=np.float64, order="C")
    if len(loop) == 0:
        return np.zeros((0, 2), dtype=np.float64)
    assert loop.ndim == 2 and loop.shape[1] == 2, "The loop must be a 2D numpy array with shape (n, 2)."

    # Step 1. Drop the closing vertex.
    if len(loop) > 1 and np.all(np.abs(loop[0] - loop[-1]) <= min_edge_length):
        loop = loop[:-1]

    # Step 2. Merge consecutive vertices.
    if len(loop) > 1:
        step = np.hypot(*(loop - np.roll(loop, 1, axis=0)).T)
        keep = step > min_edge_length
        if not np.any(keep):
            return np.zeros((0, 2), dtype=np.float64)
        loop = loop[keep]

    # Step 3. Remove collinear vertices.
    while len(loop) >= 3:
        prev_edge = loop - np.roll(loop, 1, axis=0)
        next_edge = np.roll(loop, -1, axis=0) - loop
        cross = prev_edge[:, 0] * next_edge[:, 1] - prev_edge[:, 1] * next_edge[:, 0]
        collinear = np.abs(cross) <= EPS_AREA
        if not np.any(collinear):
            break
        loop = loop[~collinear]
    if len(loop) < 3:
        return np.zeros((0, 2), dtype=np.float64)

    # Step 4. Orient the loop.
    x, y = loop[:, 0], loop[:, 1]
    signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if abs(signed_area) <= EPS_AREA:
        return np.zeros((0, 2), dtype=np.float64)
    if (signed_area > 0) != ccw:
        loop = loop[::-1]
    return np.ascontiguousarray(loop)
