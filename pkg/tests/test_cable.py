import math

import numpy as np
import pytest

from tetherplan.cable import (
    CableAnchors,
    CableState,
    Exclusion,
    GadgetConfig,
    GadgetKind,
    PulleyAction,
    SliderState,
    bend_angle_slider,
    bend_angle_tool,
    cable_collision_events,
    cable_state,
    make_slider_state,
    pulley_adjust,
    required_cable_length,
    segment_slider_source,
    segment_tool_slider,
    slider_frame,
)
from tetherplan.collision import NamedBox, NamedCapsule
from tetherplan.geometry import (
    Capsule,
    Obb,
    Pose,
    Segment,
    ZeroVectorError,
    quat_from_axis_angle,
    quat_identity,
    quat_rotate,
    vec3,
)


class TestSegmentVectors:
    def test_tool_slider_direct_subtraction(self):
        out = segment_tool_slider(vec3(0.2, 0, 0.5), vec3(0.2, 0, 0.2))
        assert np.allclose(out, vec3(0, 0, 0.3), atol=1e-15)

    def test_tool_slider_coincident(self):
        s = vec3(0.4, -0.1, 0.9)
        assert np.allclose(segment_tool_slider(s, s), vec3(0, 0, 0))

    def test_tool_slider_matches_componentwise_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            s = rng.standard_normal(3)
            t = rng.standard_normal(3)
            expected = np.array([s[0] - t[0], s[1] - t[1], s[2] - t[2]])
            assert np.array_equal(segment_tool_slider(s, t), expected)

    def test_slider_source_stacked(self):
        out = segment_slider_source(vec3(0, 0, 1), vec3(0, 0, 0.5), vec3(0, 0, 0.05))
        assert np.allclose(out, vec3(0, 0, 0.55), atol=1e-15)

    def test_slider_source_zero(self):
        h = vec3(0.3, 0.2, 1.5)
        assert np.allclose(segment_slider_source(h, h, vec3(0, 0, 0)), vec3(0, 0, 0))

    def test_identity_mu_sum(self):
        # mu_ts + mu_sp = h + b - t regardless of s, exactly
        rng = np.random.default_rng(21)
        for _ in range(200):
            h, s, b, t = (rng.standard_normal(3) for _ in range(4))
            total = segment_tool_slider(s, t) + segment_slider_source(h, s, b)
            assert np.allclose(total, h + b - t, atol=1e-12)


class TestBendAngles:
    def test_aligned_zero(self):
        assert bend_angle_tool(vec3(0, 0, 0.4), quat_identity()) == pytest.approx(0.0, abs=1e-9)

    def test_orthogonal_ninety(self):
        assert bend_angle_tool(vec3(0.3, 0, 0), quat_identity()) == pytest.approx(90.0, abs=1e-9)

    def test_candidate_construction_sixty(self):
        # a candidate offset sampled at theta=60 bends exactly 60 degrees
        theta = math.radians(60.0)
        gamma = math.radians(240.0)
        v = 0.325 * vec3(math.sin(theta) * math.cos(gamma),
                         math.sin(theta) * math.sin(gamma),
                         math.cos(theta))
        assert bend_angle_tool(v, quat_identity()) == pytest.approx(60.0, abs=1e-9)

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVectorError):
            bend_angle_tool(vec3(0, 0, 0), quat_identity())

    def test_slider_angle_against_rotated_frame(self):
        frame = quat_from_axis_angle(vec3(1, 0, 0), -math.pi / 2)  # frame z -> world y
        assert bend_angle_slider(vec3(0, 1, 0), frame) == pytest.approx(0.0, abs=1e-9)
        assert bend_angle_slider(vec3(0, 0, 1), frame) == pytest.approx(90.0, abs=1e-9)

    def test_matches_acos_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            v = rng.standard_normal(3)
            q = quat_from_axis_angle(rng.standard_normal(3), rng.random() * 3)
            z = quat_rotate(q, vec3(0, 0, 1))
            expected = math.degrees(math.acos(np.clip(
                np.dot(v / np.linalg.norm(v), z), -1.0, 1.0)))
            assert bend_angle_slider(v, q) == pytest.approx(expected, abs=1e-6)

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal(3)
        q = quat_from_axis_angle(vec3(0, 1, 0), 0.7)
        a1 = bend_angle_tool(v, q)
        a2 = bend_angle_tool(7.3 * v, q)
        assert a1 == pytest.approx(a2, abs=1e-9)
        assert 0.0 <= a1 <= 180.0


class TestSliderFrame:
    def test_z_continues_tool_segment(self):
        mu = vec3(0.1, 0.2, 0.3)
        q = slider_frame(mu)
        z = quat_rotate(q, vec3(0, 0, 1))
        assert np.allclose(z, mu / np.linalg.norm(mu), atol=1e-12)

    def test_straight_cable_bends_zero_at_slider(self):
        # slider on the straight line tool->source: mu_sp parallel to frame z
        t = vec3(0, 0, 1)
        s = vec3(0, 0, 1.3)
        h = vec3(0, 0, 2.0)
        st = make_slider_state(s, t, slider_height=0.05)
        state = cable_state(h, st, t)
        assert bend_angle_slider(state.mu_sp, st.frame) == pytest.approx(0.0, abs=1e-9)

    def test_vertical_degenerate_reference(self):
        q = slider_frame(vec3(0, 0, 1))
        x = quat_rotate(q, vec3(1, 0, 0))
        assert abs(np.dot(x, vec3(0, 0, 1))) < 1e-9

    def test_orthonormal(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = slider_frame(rng.standard_normal(3))
            m = np.column_stack([quat_rotate(q, vec3(1, 0, 0)),
                                 quat_rotate(q, vec3(0, 1, 0)),
                                 quat_rotate(q, vec3(0, 0, 1))])
            assert np.allclose(m @ m.T, np.eye(3), atol=1e-9)
            assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-9)


class TestCableLengthAndPulley:
    def test_collinear_sum(self):
        state = CableState(vec3(0, 0, 0.3), vec3(0, 0, 0.55))
        assert required_cable_length(state) == pytest.approx(0.85, abs=1e-12)

    def test_slider_at_tool(self):
        state = CableState(vec3(0, 0, 0), vec3(0.3, 0.4, 0))
        assert required_cable_length(state) == pytest.approx(0.5, abs=1e-12)

    def test_matches_norm_sum_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            a, b = rng.standard_normal(3), rng.standard_normal(3)
            assert required_cable_length(CableState(a, b)) == pytest.approx(
                np.linalg.norm(a) + np.linalg.norm(b), abs=1e-12)

    def test_pulley_within_deadband(self):
        assert pulley_adjust(1.00, 1.03, 0.05) is None

    def test_pulley_extend(self):
        cmd = pulley_adjust(1.00, 1.10, 0.05)
        assert cmd.action is PulleyAction.EXTEND
        assert cmd.delta == pytest.approx(0.10, abs=1e-12)

    def test_pulley_retract(self):
        cmd = pulley_adjust(1.20, 1.00, 0.05)
        assert cmd.action is PulleyAction.RETRACT
        assert cmd.delta == pytest.approx(0.20, abs=1e-12)

    def test_pulley_idempotent(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            length = rng.random() * 2
            required = rng.random() * 2
            cmd = pulley_adjust(length, required, 0.05)
            if cmd is not None:
                assert pulley_adjust(cmd.apply(length), required, 0.05) is None

    def test_gadget_config_validation(self):
        with pytest.raises(ValueError):
            GadgetConfig(GadgetKind.PULLEY, threshold=0.0)
        with pytest.raises(ValueError):
            GadgetConfig(GadgetKind.PULLEY, outside_length=-1.0)


def simple_scene():
    t = vec3(0, 0, 1.0)
    h = vec3(0, -0.5, 2.0)
    slider = make_slider_state(vec3(0, 0, 1.325), t, slider_height=0.05)
    state = cable_state(h, slider, t)
    return state, slider, t, h


class TestCollisionEvents:
    def test_clear_scene_empty(self):
        state, slider, t, h = simple_scene()
        table = NamedBox("env/table", Obb(Pose.from_xyz_rpy(0, 0, 0.3), vec3(0.8, 0.5, 0.02)))
        events = cable_collision_events(state, slider, t, h, [], [table],
                                        cable_radius=0.004, clearance=0.005)
        assert events == []

    def test_segment_through_box(self):
        state, slider, t, h = simple_scene()
        blocker = NamedBox("env/blocker",
                           Obb(Pose.from_xyz_rpy(0, -0.25, 1.6), vec3(0.2, 0.05, 0.05)))
        events = cable_collision_events(state, slider, t, h, [], [blocker],
                                        cable_radius=0.004, clearance=0.005)
        assert len(events) == 1
        assert events[0].body == "env/blocker"
        assert events[0].segment == "slider_source"

    def test_capsule_event_and_exclusion(self):
        state, slider, t, h = simple_scene()
        wrist = NamedCapsule("master/right/hand",
                             Capsule(Segment(vec3(0.02, 0, 1.0), vec3(0.02, -0.2, 1.0)), 0.03))
        events = cable_collision_events(state, slider, t, h, [wrist], [],
                                        cable_radius=0.004, clearance=0.005)
        assert len(events) == 1
        excl = (Exclusion("master/right/", near=t, radius=0.15),)
        events = cable_collision_events(state, slider, t, h, [wrist], [],
                                        cable_radius=0.004, clearance=0.005, exclusions=excl)
        assert events == []

    def test_matches_bruteforce_pairwise_scan(self):
        from tetherplan.geometry import segment_obb_distance, segment_segment_distance

        rng = np.random.default_rng(17)
        for _ in range(20):
            t = rng.random(3)
            h = rng.random(3) + vec3(0, 0, 1)
            s = rng.random(3) + vec3(0, 0, 0.5)
            slider = make_slider_state(s, t, slider_height=0.05)
            state = cable_state(h, slider, t)
            capsules = [NamedCapsule(f"cap{i}", Capsule(Segment(rng.random(3), rng.random(3) + 0.3),
                                                        0.02 + 0.05 * rng.random()))
                        for i in range(6)]
            boxes = [NamedBox(f"box{i}", Obb(Pose(rng.random(3), quat_identity()),
                                             0.05 + 0.1 * rng.random(3)))
                     for i in range(3)]
            cable_radius, clearance = 0.004, 0.01
            events = cable_collision_events(state, slider, t, h, capsules, boxes,
                                            cable_radius, clearance)
            got = {(e.segment, e.body) for e in events}
            expected = set()
            for label, seg in (("tool_slider", Segment(t, slider.s)),
                               ("slider_source", Segment(slider.top, h))):
                for nc in capsules:
                    d = segment_segment_distance(seg, nc.capsule.axis) - nc.capsule.radius - cable_radius
                    if d < clearance:
                        expected.add((label, nc.name))
                for nb in boxes:
                    if segment_obb_distance(seg, nb.box) - cable_radius < clearance:
                        expected.add((label, nb.name))
            assert got == expected

    def test_monotone_in_clearance(self):
        rng = np.random.default_rng(23)
        t = vec3(0, 0, 1)
        h = vec3(0.2, -0.5, 1.8)
        slider = make_slider_state(vec3(0.1, 0.1, 1.3), t, 0.05)
        state = cable_state(h, slider, t)
        capsules = [NamedCapsule(f"c{i}", Capsule(Segment(rng.random(3), rng.random(3) + 0.5), 0.05))
                    for i in range(8)]
        counts = []
        for clearance in (0.001, 0.01, 0.05, 0.2, 0.5):
            events = cable_collision_events(state, slider, t, h, capsules, [],
                                            0.004, clearance)
            counts.append(len(events))
        assert counts == sorted(counts)
