import math

import numpy as np
import pytest

from tetherplan import geometry as geo
from tetherplan.geometry import (
    Capsule,
    Obb,
    Pose,
    Segment,
    angle_between,
    capsule_obb_distance,
    compose,
    point_obb_distance,
    pose_inverse,
    quat_from_axis_angle,
    quat_from_rpy,
    quat_identity,
    quat_rotate,
    segment_capsule_distance,
    segment_obb_distance,
    segment_segment_distance,
    segment_to_segments_distance,
    slerp,
    transform_point,
    vec3,
)


def seg(ax, ay, az, bx, by, bz):
    return Segment(vec3(ax, ay, az), vec3(bx, by, bz))


def sampled_min_distance(s1: Segment, s2: Segment, n: int = 400) -> tuple[float, float]:
    """Brute-force oracle: min distance over an n x n grid of point pairs.

    Returns (min distance, sampling pitch). Stays independent of the analytic
    closest-point routine.
    """
    t = np.linspace(0.0, 1.0, n)
    p = s1.a[None, :] + t[:, None] * (s1.b - s1.a)[None, :]
    q = s2.a[None, :] + t[:, None] * (s2.b - s2.a)[None, :]
    d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    pitch = max(np.linalg.norm(s1.b - s1.a), np.linalg.norm(s2.b - s2.a)) / (n - 1)
    return float(d.min()), float(pitch)


class TestSegmentSegment:
    def test_parallel_unit_offset(self):
        d = segment_segment_distance(seg(0, 0, 0, 1, 0, 0), seg(0, 0, 1, 1, 0, 1))
        assert d == pytest.approx(1.0, abs=1e-12)

    def test_crossing_at_origin(self):
        d = segment_segment_distance(seg(-1, 0, 0, 1, 0, 0), seg(0, -1, 0, 0, 1, 0))
        assert d == pytest.approx(0.0, abs=1e-12)

    def test_skew_closest_at_midpoints(self):
        d = segment_segment_distance(seg(0, 0, 0, 1, 0, 0), seg(0.5, -0.5, 0.3, 0.5, 0.5, 0.3))
        assert d == pytest.approx(0.3, abs=1e-12)

    def test_symmetry_and_nonnegativity(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s1 = Segment(rng.random(3), rng.random(3))
            s2 = Segment(rng.random(3), rng.random(3))
            d12 = segment_segment_distance(s1, s2)
            d21 = segment_segment_distance(s2, s1)
            assert d12 >= 0.0
            assert d12 == pytest.approx(d21, abs=1e-12)

    def test_zero_iff_intersecting_families(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            # intersecting pair: both segments pass through a shared point
            x = rng.random(3)
            u = rng.standard_normal(3)
            v = rng.standard_normal(3)
            s1 = Segment(x - 0.7 * u, x + 0.5 * u)
            s2 = Segment(x - 0.4 * v, x + 0.9 * v)
            assert segment_segment_distance(s1, s2) == pytest.approx(0.0, abs=1e-9)
        for _ in range(50):
            # separated pair: opposite sides of a slab with a gap
            s1 = Segment(rng.random(3), rng.random(3))
            off = vec3(0, 0, 1.5 + rng.random())
            s2 = Segment(rng.random(3) + off, rng.random(3) + off)
            assert segment_segment_distance(s1, s2) > 0.4

    def test_degenerate_point_segments(self):
        p = seg(0.3, 0.3, 0.3, 0.3, 0.3, 0.3)
        assert segment_segment_distance(p, p) == 0.0
        assert segment_segment_distance(p, seg(0, 0, 0, 1, 0, 0)) == pytest.approx(
            math.hypot(0.3, 0.3), abs=1e-12)

    def test_random_pairs_match_sampling_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            s1 = Segment(rng.random(3), rng.random(3))
            s2 = Segment(rng.random(3), rng.random(3))
            analytic = segment_segment_distance(s1, s2)
            sampled, pitch = sampled_min_distance(s1, s2)
            assert analytic <= sampled + 1e-12
            assert sampled - analytic <= 2.0 * pitch

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(5)
        s = Segment(rng.random(3), rng.random(3))
        a2 = rng.random((64, 3))
        b2 = rng.random((64, 3))
        b2[10] = a2[10]  # one degenerate target
        batch = segment_to_segments_distance(s, a2, b2)
        for i in range(64):
            scalar = segment_segment_distance(s, Segment(a2[i], b2[i]))
            assert batch[i] == pytest.approx(scalar, abs=1e-10)

    def test_batch_degenerate_source(self):
        rng = np.random.default_rng(6)
        s = Segment(vec3(0.5, 0.5, 0.5), vec3(0.5, 0.5, 0.5))
        a2 = rng.random((8, 3))
        b2 = rng.random((8, 3))
        batch = segment_to_segments_distance(s, a2, b2)
        for i in range(8):
            scalar = segment_segment_distance(s, Segment(a2[i], b2[i]))
            assert batch[i] == pytest.approx(scalar, abs=1e-10)


class TestSegmentCapsule:
    def test_offset_minus_radius(self):
        c = Capsule(seg(0, 0, 0, 1, 0, 0), radius=0.2)
        d, pen = segment_capsule_distance(seg(0, 1, 0, 1, 1, 0), c)
        assert d == pytest.approx(0.8, abs=1e-12)
        assert not pen

    def test_touching_surface_not_penetrating(self):
        c = Capsule(seg(0, 0, 0, 1, 0, 0), radius=0.2)
        d, pen = segment_capsule_distance(seg(0, 0.2, 0, 1, 0.2, 0), c)
        assert d == pytest.approx(0.0, abs=1e-12)
        assert not pen

    def test_penetrating_flag(self):
        c = Capsule(seg(0, 0, 0, 1, 0, 0), radius=0.2)
        d, pen = segment_capsule_distance(seg(0.5, -0.1, 0, 0.5, 0.1, 0), c)
        assert d == 0.0
        assert pen

    def test_random_pair_matches_dense_sampling(self):
        rng = np.random.default_rng(19)
        s = Segment(rng.random(3), rng.random(3))
        axis = Segment(rng.random(3), rng.random(3))
        c = Capsule(axis, radius=0.15)
        sampled, pitch = sampled_min_distance(s, axis, n=2000)
        d, _ = segment_capsule_distance(s, c)
        expected = max(0.0, sampled - c.radius)
        assert abs(d - expected) <= 2.0 * pitch


class TestSlerp:
    def test_same_quaternion_fixed_point(self):
        q = quat_from_rpy(0.3, -0.2, 1.1)
        out = slerp(q, q, 0.5)
        assert np.allclose(out, q, atol=1e-12)

    def test_halfway_about_z(self):
        q0 = quat_identity()
        q1 = quat_from_axis_angle(vec3(0, 0, 1), math.pi / 2)
        mid = slerp(q0, q1, 0.5)
        expected = quat_from_axis_angle(vec3(0, 0, 1), math.pi / 4)
        assert np.allclose(mid, expected, atol=1e-12)

    def test_endpoints(self):
        rng = np.random.default_rng(2)
        q0 = geo.quat_normalize(rng.standard_normal(4))
        q1 = geo.quat_normalize(rng.standard_normal(4))
        assert np.allclose(slerp(q0, q1, 0.0), q0, atol=1e-9)
        r1 = slerp(q0, q1, 1.0)
        assert np.allclose(r1, q1, atol=1e-9) or np.allclose(r1, -q1, atol=1e-9)

    def test_unit_norm_and_reversal_symmetry(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            q0 = geo.quat_normalize(rng.standard_normal(4))
            q1 = geo.quat_normalize(rng.standard_normal(4))
            u = rng.random()
            a = slerp(q0, q1, u)
            b = slerp(q1, q0, 1.0 - u)
            assert abs(np.linalg.norm(a) - 1.0) < 1e-9
            assert np.allclose(a, b, atol=1e-9) or np.allclose(a, -b, atol=1e-9)

    def test_shortest_arc(self):
        q0 = quat_identity()
        q1 = -quat_from_axis_angle(vec3(0, 0, 1), math.pi / 2)  # flipped sign
        mid = slerp(q0, q1, 0.5)
        assert geo.quat_rotation_between(q0, mid) == pytest.approx(math.pi / 4, abs=1e-9)


class TestPose:
    def test_identity(self):
        v = vec3(0.1, -0.2, 0.3)
        assert np.allclose(transform_point(Pose.identity(), v), v)

    def test_pure_translation(self):
        p = Pose(vec3(1, 2, 3), quat_identity())
        assert np.allclose(transform_point(p, vec3(0, 0, 0)), vec3(1, 2, 3))

    def test_rotation_90_about_z(self):
        p = Pose(vec3(0, 0, 0), quat_from_axis_angle(vec3(0, 0, 1), math.pi / 2))
        assert np.allclose(transform_point(p, vec3(1, 0, 0)), vec3(0, 1, 0), atol=1e-12)

    def test_compose_associativity(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            p1 = Pose(rng.standard_normal(3), geo.quat_normalize(rng.standard_normal(4)))
            p2 = Pose(rng.standard_normal(3), geo.quat_normalize(rng.standard_normal(4)))
            v = rng.standard_normal(3)
            lhs = transform_point(compose(p1, p2), v)
            rhs = transform_point(p1, transform_point(p2, v))
            assert np.allclose(lhs, rhs, atol=1e-9)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(37)
        p = Pose(rng.standard_normal(3), geo.quat_normalize(rng.standard_normal(4)))
        v = rng.standard_normal(3)
        assert np.allclose(transform_point(pose_inverse(p), transform_point(p, v)), v, atol=1e-9)


class TestObb:
    def test_point_outside_face(self):
        box = Obb(Pose.identity(), vec3(1, 1, 1))
        assert point_obb_distance(vec3(3, 0, 0), box) == pytest.approx(2.0)

    def test_point_inside(self):
        box = Obb(Pose.identity(), vec3(1, 1, 1))
        assert point_obb_distance(vec3(0.5, -0.5, 0.2), box) == 0.0

    def test_segment_through_box(self):
        box = Obb(Pose.identity(), vec3(0.5, 0.5, 0.5))
        assert segment_obb_distance(seg(-2, 0, 0, 2, 0, 0), box) == pytest.approx(0.0, abs=1e-9)

    def test_segment_above_box(self):
        box = Obb(Pose.identity(), vec3(0.5, 0.5, 0.5))
        assert segment_obb_distance(seg(-2, 0, 0.8, 2, 0, 0.8), box) == pytest.approx(0.3, abs=1e-9)

    def test_segment_to_rotated_box_matches_sampling(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            box = Obb(Pose(rng.standard_normal(3) * 0.3,
                           geo.quat_normalize(rng.standard_normal(4))),
                      0.1 + rng.random(3) * 0.4)
            s = Segment(rng.standard_normal(3), rng.standard_normal(3))
            analytic = segment_obb_distance(s, box)
            t = np.linspace(0, 1, 2000)
            pts = s.a[None, :] + t[:, None] * (s.b - s.a)[None, :]
            sampled = min(point_obb_distance(p, box) for p in pts)
            assert analytic <= sampled + 1e-9
            assert sampled - analytic <= 2.0 * np.linalg.norm(s.b - s.a) / 1999

    def test_capsule_obb(self):
        box = Obb(Pose.identity(), vec3(0.5, 0.5, 0.5))
        c = Capsule(seg(-1, 0, 1.0, 1, 0, 1.0), radius=0.2)
        assert capsule_obb_distance(c, box) == pytest.approx(0.3, abs=1e-9)


class TestAngles:
    def test_angle_between_orthogonal(self):
        assert angle_between(vec3(1, 0, 0), vec3(0, 1, 0)) == pytest.approx(math.pi / 2)

    def test_angle_between_zero_vector_raises(self):
        with pytest.raises(geo.ZeroVectorError):
            angle_between(vec3(0, 0, 0), vec3(1, 0, 0))

    def test_quat_rotate_matches_matrix(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            q = geo.quat_normalize(rng.standard_normal(4))
            v = rng.standard_normal(3)
            assert np.allclose(quat_rotate(q, v), geo.quat_to_matrix(q) @ v, atol=1e-12)

    def test_quat_matrix_roundtrip(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            q = geo.quat_normalize(rng.standard_normal(4))
            r = geo.quat_from_matrix(geo.quat_to_matrix(q))
            assert np.allclose(r, q, atol=1e-9) or np.allclose(r, -q, atol=1e-9)
