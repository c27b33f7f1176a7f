"""Flat-array packing of part and scene geometry for the simulation kernels.

The moving part is a rigid union of convex polygons given in the body
frame (origin at the center of mass). The scene is a list of static
convex polygons, baked into the world frame once. Kernels consume only
plain float64/int32 arrays so the compiled and pure-Python backends can
share one layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geom2d import ConvexPolygon, Pose2

# Stack buffer sizes in the compiled kernel bound these.
MAX_PART_VERTS = 64
MAX_SCENE_POLY_VERTS = 32


@dataclass(frozen=True)
class PackedShapes:
    """Kernel-ready geometry arrays (all read-only)."""

    part_verts: np.ndarray    # (PV, 2) body frame
    part_normals: np.ndarray  # (PV, 2) body frame, unit outward
    part_offsets: np.ndarray  # (PP + 1,) int32 vertex ranges per part polygon
    part_circles: np.ndarray  # (PP, 3) body-frame centroid x, y, radius
    scene_verts: np.ndarray   # (SV, 2) world frame
    scene_normals: np.ndarray
    scene_offsets: np.ndarray
    scene_circles: np.ndarray


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def pack_shapes(part: list[ConvexPolygon], scene: list[tuple[ConvexPolygon, Pose2]]) -> PackedShapes:
    if not part:
        raise ValueError("part needs at least one convex polygon")
    pv, pn, poffs, pcirc = [], [], [0], []
    for poly in part:
        pv.append(poly.vertices)
        pn.append(poly.normals)
        poffs.append(poffs[-1] + len(poly))
        pcirc.append((poly.centroid[0], poly.centroid[1], poly.radius))
    if poffs[-1] > MAX_PART_VERTS:
        raise ValueError(f"part exceeds {MAX_PART_VERTS} total vertices")
    sv, sn, soffs, scirc = [], [], [0], []
    for poly, pose in scene:
        if len(poly) > MAX_SCENE_POLY_VERTS:
            raise ValueError(f"scene polygon exceeds {MAX_SCENE_POLY_VERTS} vertices")
        wv, wn = poly.transformed(pose)
        sv.append(wv)
        sn.append(wn)
        soffs.append(soffs[-1] + len(poly))
        cx, cy = poly.centroid
        c = math.cos(pose.theta)
        s = math.sin(pose.theta)
        scirc.append((pose.x + c * cx - s * cy, pose.y + s * cx + c * cy, poly.radius))
    empty2 = np.zeros((0, 2))
    return PackedShapes(
        part_verts=_freeze(np.concatenate(pv)),
        part_normals=_freeze(np.concatenate(pn)),
        part_offsets=_freeze(np.array(poffs, dtype=np.int32)),
        part_circles=_freeze(np.array(pcirc, dtype=np.float64).reshape(len(part), 3)),
        scene_verts=_freeze(np.concatenate(sv) if sv else empty2),
        scene_normals=_freeze(np.concatenate(sn) if sn else empty2),
        scene_offsets=_freeze(np.array(soffs, dtype=np.int32)),
        scene_circles=_freeze(np.array(scirc, dtype=np.float64).reshape(len(scene), 3)),
    )
