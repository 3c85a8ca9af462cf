"""Vector/rotation algebra, rigid transforms, and proximity queries.

All positions are meters in a right-handed world frame with z up.  Rotations
are unit quaternions stored as ``np.ndarray([w, x, y, z])``.  Everything in
this module is a pure function on immutable values; nothing here keeps state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNIT_NORM_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ZeroVectorError("cannot normalize a zero-length vector")
    return v / n


class ZeroVectorError(ValueError):
    pass


def angle_between(v1: np.ndarray, v2: np.ndarray) -> float:
    """Angle in radians between two vectors, in [0, pi].

    Uses atan2 of the cross/dot pair, which stays accurate for nearly
    parallel or anti-parallel inputs where acos loses precision.
    """
    a = normalized(np.asarray(v1, dtype=float))
    b = normalized(np.asarray(v2, dtype=float))
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b))))


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------

def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float) / np.linalg.norm(q)


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    a = normalized(np.asarray(axis, dtype=float))
    half = 0.5 * angle
    s = math.sin(half)
    return np.array([math.cos(half), a[0] * s, a[1] * s, a[2] * s])


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w = q[0]
    u = q[1:]
    # Rodrigues form: v + 2w (u x v) + 2 (u x (u x v))
    uv = np.cross(u, v)
    return np.asarray(v, dtype=float) + 2.0 * (w * uv + np.cross(u, uv))


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; m must be a proper rotation matrix."""
    t = np.trace(m)
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        return quat_normalize(np.array([
            0.25 * s,
            (m[2, 1] - m[1, 2]) / s,
            (m[0, 2] - m[2, 0]) / s,
            (m[1, 0] - m[0, 1]) / s,
        ]))
    i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
    if i == 0:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s,
             (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif i == 1:
        s = math.sqrt(1.0 - m[0, 0] + m[1, 1] - m[2, 2]) * 2.0
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
             0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = math.sqrt(1.0 - m[0, 0] - m[1, 1] + m[2, 2]) * 2.0
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
             (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    return quat_normalize(np.array(q))


def quat_from_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Intrinsic x-y-z (roll, pitch, yaw) in radians to quaternion."""
    qx = quat_from_axis_angle(vec3(1, 0, 0), roll)
    qy = quat_from_axis_angle(vec3(0, 1, 0), pitch)
    qz = quat_from_axis_angle(vec3(0, 0, 1), yaw)
    return quat_multiply(qz, quat_multiply(qy, qx))


def quat_angle(q: np.ndarray) -> float:
    """Rotation angle of q in [0, pi]."""
    w = min(1.0, abs(float(q[0])))
    return 2.0 * math.acos(w)


def quat_rotation_between(q0: np.ndarray, q1: np.ndarray) -> float:
    """Angle of the relative rotation taking q0 to q1."""
    return quat_angle(quat_multiply(q1, quat_conjugate(q0)))


def slerp(q0: np.ndarray, q1: np.ndarray, u: float) -> np.ndarray:
    """Great-circle interpolation between unit quaternions, shortest arc.

    q1 is negated when dot(q0, q1) < 0 so the interpolation never takes the
    long way around.  u=0 returns q0, u=1 returns (possibly negated) q1.
    """
    q0 = quat_normalize(q0)
    q1 = quat_normalize(q1)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 0.9995:
        # nearly parallel: nlerp is accurate and avoids sin(theta) ~ 0
        return quat_normalize(q0 + u * (q1 - q0))
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    return (math.sin((1.0 - u) * theta) / s) * q0 + (math.sin(u * theta) / s) * q1


# ---------------------------------------------------------------------------
# Poses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """Rigid transform: position in meters plus a unit-quaternion rotation."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=quat_identity)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_xyz_rpy(x: float, y: float, z: float,
                     roll: float = 0.0, pitch: float = 0.0, yaw: float = 0.0) -> "Pose":
        return Pose(vec3(x, y, z), quat_from_rpy(roll, pitch, yaw))


def transform_point(p: Pose, v: np.ndarray) -> np.ndarray:
    return p.position + quat_rotate(p.rotation, v)


def transform_direction(p: Pose, v: np.ndarray) -> np.ndarray:
    return quat_rotate(p.rotation, v)


def compose(p1: Pose, p2: Pose) -> Pose:
    """p1 then p2 applied in p1's frame: (p1*p2)(v) = p1(p2(v))."""
    return Pose(transform_point(p1, p2.position),
                quat_normalize(quat_multiply(p1.rotation, p2.rotation)))


def pose_inverse(p: Pose) -> Pose:
    qi = quat_conjugate(p.rotation)
    return Pose(-quat_rotate(qi, p.position), qi)


def pose_interpolate(p0: Pose, p1: Pose, u: float) -> Pose:
    """Linear position blend with slerp on the rotation."""
    return Pose(p0.position + u * (p1.position - p0.position),
                slerp(p0.rotation, p1.rotation, u))


def pose_z_axis(p: Pose) -> np.ndarray:
    return quat_rotate(p.rotation, vec3(0, 0, 1))


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class Capsule:
    axis: Segment
    radius: float


@dataclass(frozen=True)
class Obb:
    center: Pose
    half_extents: np.ndarray


# ---------------------------------------------------------------------------
# Distance queries
# ---------------------------------------------------------------------------

def closest_point_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Clamped projection of point p onto segment [a, b]; returns (t, point)."""
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom < 1e-18:
        return 0.0, a
    t = float(np.dot(p - a, ab)) / denom
    t = min(1.0, max(0.0, t))
    return t, a + t * ab


def segment_segment_closest(s1: Segment, s2: Segment) -> tuple[np.ndarray, np.ndarray, float]:
    """Closest points between two closed segments and their distance.

    Clamped-parameter formulation after Ericson, "Real-Time Collision
    Detection" 5.1.9; degenerate (point) segments fall out of the clamping
    without special-case branches.
    """
    p1, q1 = s1.a, s1.b
    p2, q2 = s2.a, s2.b
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    eps = 1e-18

    if a < eps and e < eps:
        s = t = 0.0
    elif a < eps:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
    else:
        c = float(np.dot(d1, r))
        if e < eps:
            t = 0.0
            s = min(1.0, max(0.0, -c / a))
        else:
            b = float(np.dot(d1, d2))
            denom = a * e - b * b
            s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom > eps else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(1.0, max(0.0, -c / a))
            elif t > 1.0:
                t = 1.0
                s = min(1.0, max(0.0, (b - c) / a))
    cp1 = p1 + s * d1
    cp2 = p2 + t * d2
    return cp1, cp2, float(np.linalg.norm(cp1 - cp2))


def segment_segment_distance(s1: Segment, s2: Segment) -> float:
    """Minimum Euclidean distance between two closed segments; 0 iff they intersect."""
    return segment_segment_closest(s1, s2)[2]


def segment_capsule_distance(s: Segment, c: Capsule) -> tuple[float, bool]:
    """Distance from a segment to a capsule surface.

    Returns ``(distance, penetrating)``: the axis distance minus the radius
    clamped at zero, and whether the segment is strictly inside the surface.
    """
    axis_dist = segment_segment_distance(s, c.axis)
    d = axis_dist - c.radius
    return max(0.0, d), d < 0.0


def point_obb_distance(p: np.ndarray, box: Obb) -> float:
    """Distance from a point to a box; 0 inside."""
    local = quat_rotate(quat_conjugate(box.center.rotation), p - box.center.position)
    excess = np.abs(local) - box.half_extents
    return float(np.linalg.norm(np.maximum(excess, 0.0)))


def segment_obb_distance(s: Segment, box: Obb) -> float:
    """Distance from a segment to a box; 0 when they touch or overlap.

    Distance from a point moving along the segment to a convex body is convex
    in the segment parameter, so a coarse grid bracket followed by ternary
    refinement converges to the global minimum.
    """
    q_inv = quat_conjugate(box.center.rotation)
    a = quat_rotate(q_inv, s.a - box.center.position)
    b = quat_rotate(q_inv, s.b - box.center.position)
    he = box.half_extents

    def f(t: float) -> float:
        p = a + t * (b - a)
        excess = np.abs(p) - he
        return float(np.linalg.norm(np.maximum(excess, 0.0)))

    ts = np.linspace(0.0, 1.0, 17)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    ds = np.linalg.norm(np.maximum(np.abs(pts) - he[None, :], 0.0), axis=1)
    k = int(np.argmin(ds))
    lo = ts[max(0, k - 1)]
    hi = ts[min(len(ts) - 1, k + 1)]
    for _ in range(48):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return min(f(lo), f(0.5 * (lo + hi)), f(hi))


def capsule_capsule_distance(c1: Capsule, c2: Capsule) -> float:
    return max(0.0, segment_segment_distance(c1.axis, c2.axis) - c1.radius - c2.radius)


def capsule_obb_distance(c: Capsule, box: Obb) -> float:
    return max(0.0, segment_obb_distance(c.axis, box) - c.radius)


def obb_corners(box: Obb) -> np.ndarray:
    """World positions of the 8 box corners, shape (8, 3)."""
    he = box.half_extents
    signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
    local = signs * he[None, :]
    rot = quat_to_matrix(box.center.rotation)
    return box.center.position[None, :] + local @ rot.T


# ---------------------------------------------------------------------------
# Batched queries (hot path of the collision scans)
# ---------------------------------------------------------------------------

def segment_to_segments_distance(s: Segment, a2: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Distances from one segment to N segments given as (N,3) endpoint arrays.

    Vectorized transcription of segment_segment_closest; kept in lockstep with
    the scalar routine (see test_geometry batch-consistency check).
    """
    p1 = np.asarray(s.a, dtype=float)
    d1 = np.asarray(s.b, dtype=float) - p1
    a2 = np.asarray(a2, dtype=float)
    d2 = np.asarray(b2, dtype=float) - a2
    r = p1[None, :] - a2

    a = float(np.dot(d1, d1))
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = d1 @ r.T
    b = d2 @ d1
    eps = 1e-18

    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s_par = np.where(denom > eps, np.clip((b * f - c * e) / np.where(denom > eps, denom, 1.0), 0.0, 1.0), 0.0)
        t_par = np.where(e > eps, (b * s_par + f) / np.where(e > eps, e, 1.0), 0.0)

    if a < eps:
        s_par = np.zeros_like(e)
        t_par = np.where(e > eps, np.clip(f / np.where(e > eps, e, 1.0), 0.0, 1.0), 0.0)
    else:
        low = t_par < 0.0
        high = t_par > 1.0
        s_par = np.where(low, np.clip(-c / a, 0.0, 1.0), s_par)
        s_par = np.where(high, np.clip((b - c) / a, 0.0, 1.0), s_par)
        t_par = np.clip(t_par, 0.0, 1.0)
        degenerate = e < eps
        if degenerate.any():
            s_par = np.where(degenerate, np.clip(-c / a, 0.0, 1.0), s_par)
            t_par = np.where(degenerate, 0.0, t_par)

    cp1 = p1[None, :] + s_par[:, None] * d1[None, :]
    cp2 = a2 + t_par[:, None] * d2
    return np.linalg.norm(cp1 - cp2, axis=1)
