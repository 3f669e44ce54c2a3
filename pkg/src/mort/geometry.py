"""Planar convex-polygon primitives used for footprints, collision and contact.

All polygons are strictly convex, counter-clockwise, with vertices as
(k, 2) float64 arrays. Object bases are extruded vertically; a pose places
the base at a quantized layer, so all 3D reasoning reduces to 2D footprints
plus integer layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import clip_convex, shoelace_area

AREA_TOL = 1e-9
VERTEX_TOL = 1e-9


class GeometryError(ValueError):
    """Raised for degenerate or invalid polygon input."""


@dataclass(frozen=True)
class Polygon:
    """Strictly convex CCW polygon in workspace units."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("polygon vertices must be a (k, 2) array")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        v = _drop_collinear(v)
        if v.shape[0] < 3:
            raise GeometryError("polygon needs at least 3 non-collinear vertices")
        area = shoelace_area(v)
        if area <= AREA_TOL:
            raise GeometryError(f"polygon must be CCW with positive area, got {area}")
        if not _is_convex(v):
            raise GeometryError("polygon must be convex")
        object.__setattr__(self, "vertices", v)
        self.vertices.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, Polygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and np.allclose(
            self.vertices, other.vertices, atol=VERTEX_TOL
        )

    def __hash__(self):
        return hash(self.vertices.round(9).tobytes())


@dataclass(frozen=True)
class Pose:
    """Upright pose: planar position, quantized layer, yaw about +z."""

    x: float
    y: float
    layer: int
    yaw: float = 0.0

    def __post_init__(self):
        if self.layer < 0 or self.layer != int(self.layer):
            raise GeometryError(f"layer must be a non-negative integer, got {self.layer}")
        object.__setattr__(self, "layer", int(self.layer))
        object.__setattr__(self, "yaw", float(self.yaw) % (2.0 * math.pi))


def _cross2(u: np.ndarray, w: np.ndarray) -> float:
    return float(u[0] * w[1] - u[1] * w[0])


def _drop_collinear(v: np.ndarray) -> np.ndarray:
    # dedupe consecutive vertices, then drop collinear ones
    keep = []
    for i in range(v.shape[0]):
        if keep and np.linalg.norm(v[i] - v[keep[-1]]) <= VERTEX_TOL:
            continue
        keep.append(i)
    if len(keep) >= 2 and np.linalg.norm(v[keep[0]] - v[keep[-1]]) <= VERTEX_TOL:
        keep.pop()
    v = v[keep]
    n = v.shape[0]
    keep = [
        i
        for i in range(n)
        if abs(_cross2(v[i] - v[i - 1], v[(i + 1) % n] - v[i])) > VERTEX_TOL
    ]
    return v[keep]


def _is_convex(v: np.ndarray) -> bool:
    n = v.shape[0]
    for i in range(n):
        if _cross2(v[i] - v[i - 1], v[(i + 1) % n] - v[i]) < -VERTEX_TOL:
            return False
    return True


def polygon_area(p: Polygon) -> float:
    """Enclosed area (always positive for a valid Polygon)."""
    return float(shoelace_area(p.vertices))


def centroid(p: Polygon) -> np.ndarray:
    """Area centroid as a length-2 array."""
    v = p.vertices
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def transform_footprint(base: Polygon, pose: Pose) -> Polygon:
    """Rotate the base by the pose yaw, then translate by (x, y)."""
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    rot = np.array([[c, -s], [s, c]])
    return Polygon(base.vertices @ rot.T + np.array([pose.x, pose.y]))


def intersection_vertices(a: Polygon, b: Polygon) -> np.ndarray:
    """Raw clipped vertex set of a ∩ b (may be degenerate)."""
    return clip_convex(a.vertices, b.vertices)


def polygon_intersection(a: Polygon, b: Polygon) -> Polygon | None:
    """Convex intersection region, or None when the overlap area <= AREA_TOL."""
    v = intersection_vertices(a, b)
    if v.shape[0] < 3 or shoelace_area(v) <= AREA_TOL:
        return None
    return Polygon(v)


def overlap_area(a: Polygon, b: Polygon) -> float:
    """Area of a ∩ b (0.0 when disjoint or degenerate)."""
    v = intersection_vertices(a, b)
    if v.shape[0] < 3:
        return 0.0
    return max(0.0, float(shoelace_area(v)))
