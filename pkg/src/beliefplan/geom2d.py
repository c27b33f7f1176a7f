"""Planar rigid-body geometry: poses, twists, wrenches, convex polygons,
and contact manifolds.

Conventions used throughout the package:

* World frame is fixed; a pose (x, y, theta) maps body coordinates into
  world coordinates, theta in (-pi, pi].
* Polygons are counter-clockwise, strictly convex, given in body frame.
* Contact normals point from the second body (obstacle) into the first
  (the moving part); pushing the part along the normal separates them.
* A manifold has at most two points, sorted lexicographically by (x, y)
  so downstream iteration order is deterministic.

The contact routine is written flat (scalars, preallocated buffers, no
object churn) because the compiled simulation kernel mirrors it
operation for operation; keep the two in sync when editing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.fmod(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class Pose2:
    """Planar pose (x, y, theta), theta wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Pose2":
        return Pose2(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Twist2:
    """Planar velocity (vx, vy, omega) in the world frame."""

    vx: float
    vy: float
    omega: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Twist2":
        return Twist2(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Wrench2:
    """Planar force and torque (fx, fy, tau) in the world frame."""

    fx: float
    fy: float
    tau: float

    def force_norm(self) -> float:
        return math.sqrt(self.fx * self.fx + self.fy * self.fy)


def compose(a: Pose2, b: Pose2) -> Pose2:
    """Pose composition a * b (apply b in a's frame)."""
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    return Pose2(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        wrap_angle(a.theta + b.theta),
    )


def inverse(a: Pose2) -> Pose2:
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    return Pose2(-(c * a.x + s * a.y), -(-s * a.x + c * a.y), wrap_angle(-a.theta))


def transform_point(pose: Pose2, px: float, py: float) -> tuple[float, float]:
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    return (pose.x + c * px - s * py, pose.y + s * px + c * py)


def pose_error(desired: Pose2, actual: Pose2) -> tuple[float, float, float]:
    """Per-axis world-frame error (dx, dy, dtheta) with the angle wrapped."""
    return (
        desired.x - actual.x,
        desired.y - actual.y,
        wrap_angle(desired.theta - actual.theta),
    )


class ConvexPolygon:
    """Strictly convex CCW polygon in body coordinates.

    Precomputes unit outward edge normals (edge i runs from vertex i to
    vertex i+1), the area centroid, and a bounding radius about the
    centroid for broad-phase culling.
    """

    __slots__ = ("vertices", "normals", "centroid", "radius")

    def __init__(self, vertices) -> None:
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs an (n, 2) array with n >= 3")
        n = v.shape[0]
        cross_total = 0.0
        for i in range(n):
            ax, ay = v[i]
            bx, by = v[(i + 1) % n]
            cx, cy = v[(i + 2) % n]
            cr = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            if cr <= 0.0:
                raise ValueError("polygon must be strictly convex and CCW")
            cross_total += ax * by - bx * ay
        if cross_total <= 0.0:
            raise ValueError("polygon must have positive area")
        normals = np.empty_like(v)
        for i in range(n):
            ex = v[(i + 1) % n, 0] - v[i, 0]
            ey = v[(i + 1) % n, 1] - v[i, 1]
            inv = 1.0 / math.hypot(ex, ey)
            normals[i, 0] = ey * inv
            normals[i, 1] = -ex * inv
        area = 0.5 * cross_total
        cx = cy = 0.0
        for i in range(n):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % n]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        cx /= 6.0 * area
        cy /= 6.0 * area
        radius = 0.0
        for i in range(n):
            radius = max(radius, math.hypot(v[i, 0] - cx, v[i, 1] - cy))
        v.flags.writeable = False
        normals.flags.writeable = False
        self.vertices = v
        self.normals = normals
        self.centroid = (cx, cy)
        self.radius = radius

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def transformed(self, pose: Pose2) -> tuple[np.ndarray, np.ndarray]:
        """World-frame (vertices, normals) under the given pose."""
        c = math.cos(pose.theta)
        s = math.sin(pose.theta)
        v = self.vertices
        n = self.normals
        wv = np.empty_like(v)
        wn = np.empty_like(n)
        for i in range(v.shape[0]):
            wv[i, 0] = pose.x + c * v[i, 0] - s * v[i, 1]
            wv[i, 1] = pose.y + s * v[i, 0] + c * v[i, 1]
            wn[i, 0] = c * n[i, 0] - s * n[i, 1]
            wn[i, 1] = s * n[i, 0] + c * n[i, 1]
        return wv, wn


@dataclass(frozen=True)
class ContactPoint:
    """One manifold point: world position, unit normal into body A, depth >= 0."""

    x: float
    y: float
    nx: float
    ny: float
    depth: float


# Manifold capacity of the flat contact buffers (shared with the kernels).
MAX_CONTACTS = 16


def collide_into(va, na, nva, vb, nb, nvb, cpx, cpy, cnx, cny, cdep, base):
    """Contact manifold of convex polygon A against convex polygon B.

    va/na and vb/nb are (n,2) world vertices and unit outward edge
    normals (edge i from vertex i to i+1), indexed 0..nva/nvb. Appends
    up to two points starting at index ``base`` into the flat contact
    buffers and returns the new count; normals point from B into A and
    a point pair is sorted by (x, y).

    SAT over the edge normals of both polygons picks the reference face
    (least penetration, ties favor A); the most anti-parallel incident
    face is clipped against the reference side planes, and clipped
    points behind the reference face become contacts.

    The compiled simulation kernel mirrors this function operation for
    operation; keep the two in sync when editing.
    """
    # Most-separating face of A against B.
    sep_a = -math.inf
    face_a = 0
    for i in range(nva):
        nx = na[i, 0]
        ny = na[i, 1]
        ax = va[i, 0]
        ay = va[i, 1]
        smin = math.inf
        for j in range(nvb):
            s = nx * (vb[j, 0] - ax) + ny * (vb[j, 1] - ay)
            if s < smin:
                smin = s
        if smin > sep_a:
            sep_a = smin
            face_a = i
        if sep_a > 0.0:
            return base
    # Most-separating face of B against A.
    sep_b = -math.inf
    face_b = 0
    for i in range(nvb):
        nx = nb[i, 0]
        ny = nb[i, 1]
        ax = vb[i, 0]
        ay = vb[i, 1]
        smin = math.inf
        for j in range(nva):
            s = nx * (va[j, 0] - ax) + ny * (va[j, 1] - ay)
            if s < smin:
                smin = s
        if smin > sep_b:
            sep_b = smin
            face_b = i
        if sep_b > 0.0:
            return base
    if sep_b > sep_a:
        rv, rn, nref = vb, nb, nvb
        iv, inorm, ninc = va, na, nva
        ref_face = face_b
        flip = False
    else:
        rv, rn, nref = va, na, nva
        iv, inorm, ninc = vb, nb, nvb
        ref_face = face_a
        flip = True
    nrx = rn[ref_face, 0]
    nry = rn[ref_face, 1]
    # Incident face: most anti-parallel to the reference normal.
    inc_face = 0
    best_dot = math.inf
    for i in range(ninc):
        d = nrx * inorm[i, 0] + nry * inorm[i, 1]
        if d < best_dot:
            best_dot = d
            inc_face = i
    i2 = inc_face + 1
    if i2 == ninc:
        i2 = 0
    px = iv[inc_face, 0]
    py = iv[inc_face, 1]
    qx = iv[i2, 0]
    qy = iv[i2, 1]
    r2 = ref_face + 1
    if r2 == nref:
        r2 = 0
    v1x = rv[ref_face, 0]
    v1y = rv[ref_face, 1]
    v2x = rv[r2, 0]
    v2y = rv[r2, 1]
    tx = v2x - v1x
    ty = v2y - v1y
    # Clip to the side plane at v1 (keep dot(t, p) >= dot(t, v1)).
    off = tx * v1x + ty * v1y
    dp = off - (tx * px + ty * py)
    dq = off - (tx * qx + ty * qy)
    count = 0
    x0 = y0 = x1 = y1 = 0.0
    if dp <= 0.0:
        x0, y0 = px, py
        count = 1
    if dq <= 0.0:
        if count == 0:
            x0, y0 = qx, qy
        else:
            x1, y1 = qx, qy
        count += 1
    if dp * dq < 0.0 and count == 1:
        t = dp / (dp - dq)
        x1 = px + t * (qx - px)
        y1 = py + t * (qy - py)
        count = 2
    if count < 2:
        return base
    px, py, qx, qy = x0, y0, x1, y1
    # Clip to the side plane at v2 (keep dot(t, p) <= dot(t, v2)).
    off = tx * v2x + ty * v2y
    dp = (tx * px + ty * py) - off
    dq = (tx * qx + ty * qy) - off
    count = 0
    if dp <= 0.0:
        x0, y0 = px, py
        count = 1
    if dq <= 0.0:
        if count == 0:
            x0, y0 = qx, qy
        else:
            x1, y1 = qx, qy
        count += 1
    if dp * dq < 0.0 and count == 1:
        t = dp / (dp - dq)
        x1 = px + t * (qx - px)
        y1 = py + t * (qy - py)
        count = 2
    if count < 2:
        return base
    if flip:
        ccnx = -nrx
        ccny = -nry
    else:
        ccnx = nrx
        ccny = nry
    sep0 = nrx * (x0 - v1x) + nry * (y0 - v1y)
    sep1 = nrx * (x1 - v1x) + nry * (y1 - v1y)
    keep0 = sep0 <= 0.0
    keep1 = sep1 <= 0.0
    # Deterministic manifold order: sort the pair by (x, y).
    if keep0 and keep1 and (x1 < x0 or (x1 == x0 and y1 < y0)):
        x0, y0, sep0, x1, y1, sep1 = x1, y1, sep1, x0, y0, sep0
    n = base
    if keep0 and n < MAX_CONTACTS:
        cpx[n] = x0
        cpy[n] = y0
        cnx[n] = ccnx
        cny[n] = ccny
        cdep[n] = -sep0
        n += 1
    if keep1 and n < MAX_CONTACTS:
        cpx[n] = x1
        cpy[n] = y1
        cnx[n] = ccnx
        cny[n] = ccny
        cdep[n] = -sep1
        n += 1
    return n


def collide_convex(va, na, vb, nb):
    """Contact manifold between two world-frame polygons as a list of
    (x, y, nx, ny, depth) tuples (at most two, normals from B into A)."""
    cpx = np.empty(MAX_CONTACTS)
    cpy = np.empty(MAX_CONTACTS)
    cnx = np.empty(MAX_CONTACTS)
    cny = np.empty(MAX_CONTACTS)
    cdep = np.empty(MAX_CONTACTS)
    n = collide_into(
        va, na, va.shape[0], vb, nb, vb.shape[0], cpx, cpy, cnx, cny, cdep, 0
    )
    return [(cpx[i], cpy[i], cnx[i], cny[i], cdep[i]) for i in range(n)]


def contacts(shape_a: ConvexPolygon, pose_a: Pose2, shape_b: ConvexPolygon, pose_b: Pose2):
    """Contact points between two posed polygons (normal from B into A)."""
    # Broad phase: bounding circles about the centroids.
    cax, cay = transform_point(pose_a, *shape_a.centroid)
    cbx, cby = transform_point(pose_b, *shape_b.centroid)
    if math.hypot(cbx - cax, cby - cay) > shape_a.radius + shape_b.radius:
        return ()
    va, na = shape_a.transformed(pose_a)
    vb, nb = shape_b.transformed(pose_b)
    return tuple(ContactPoint(*c) for c in collide_convex(va, na, vb, nb))
