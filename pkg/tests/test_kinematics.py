import math

import numpy as np
import pytest

from tetherplan.geometry import Pose, quat_to_matrix, vec3
from tetherplan.kinematics import (
    ArmModel,
    Joint,
    NoConvergence,
    Unreachable,
    forward_kinematics,
    linear_joint_motion,
    random_joint_vector,
    solve_ik,
)

from conftest import make_six_dof_arm


def single_joint_arm() -> ArmModel:
    joints = (Joint(Pose.identity(), vec3(0, 0, 1), -math.pi, math.pi),)
    return ArmModel(name="one", joints=joints, links=(),
                    flange=Pose.from_xyz_rpy(1.0, 0, 0))


def homogeneous(pose: Pose) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = quat_to_matrix(pose.rotation)
    m[:3, 3] = pose.position
    return m


def axis_angle_matrix(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    m = np.eye(4)
    m[:3, :3] = np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)
    return m


class TestForwardKinematics:
    def test_single_joint_zero(self):
        arm = single_joint_arm()
        fk = forward_kinematics(arm, np.zeros(1))
        assert np.allclose(fk.gripper.position, vec3(1, 0, 0), atol=1e-12)
        assert np.allclose(fk.gripper.rotation, [1, 0, 0, 0], atol=1e-12)

    def test_single_joint_quarter_turn(self):
        arm = single_joint_arm()
        fk = forward_kinematics(arm, np.array([math.pi / 2]))
        assert np.allclose(fk.gripper.position, vec3(0, 1, 0), atol=1e-12)

    def test_deterministic(self, six_dof_arm):
        rng = np.random.default_rng(1)
        q = random_joint_vector(six_dof_arm, rng)
        a = forward_kinematics(six_dof_arm, q)
        b = forward_kinematics(six_dof_arm, q)
        assert np.array_equal(a.gripper.position, b.gripper.position)
        assert np.array_equal(a.gripper.rotation, b.gripper.rotation)

    def test_matches_hand_composed_transform_chain(self, six_dof_arm):
        # independent oracle: 4x4 homogeneous multiplication, no Pose algebra
        rng = np.random.default_rng(9)
        base = Pose.from_xyz_rpy(0.2, -0.1, 0.5, 0.1, 0.0, 0.7)
        for _ in range(25):
            q = random_joint_vector(six_dof_arm, rng)
            m = homogeneous(base)
            for joint, angle in zip(six_dof_arm.joints, q):
                m = m @ homogeneous(joint.origin) @ axis_angle_matrix(joint.axis, angle)
            m = m @ homogeneous(six_dof_arm.flange)
            fk = forward_kinematics(six_dof_arm, q, base)
            assert np.allclose(fk.gripper.position, m[:3, 3], atol=1e-9)
            assert np.allclose(quat_to_matrix(fk.gripper.rotation), m[:3, :3], atol=1e-9)

    def test_length_mismatch_raises(self, six_dof_arm):
        with pytest.raises(ValueError):
            forward_kinematics(six_dof_arm, np.zeros(4))

    def test_link_capsules_move_with_joints(self, six_dof_arm):
        q0 = np.zeros(6)
        q1 = np.array([math.pi / 2, 0, 0, 0, 0, 0])
        c0 = forward_kinematics(six_dof_arm, q0).capsules[0]
        c1 = forward_kinematics(six_dof_arm, q1).capsules[0]
        assert not np.allclose(c0.axis.b, c1.axis.b)
        assert c0.radius == c1.radius


class TestInverseKinematics:
    def test_target_at_seed_returns_immediately(self, six_dof_arm):
        seed = np.array([0.3, -0.5, 0.8, 0.2, 0.4, -0.1])
        target = forward_kinematics(six_dof_arm, seed).gripper
        q = solve_ik(six_dof_arm, target, seed)
        fk = forward_kinematics(six_dof_arm, q)
        assert np.linalg.norm(fk.gripper.position - target.position) <= 1e-3

    def test_unreachable_fast_reject(self, six_dof_arm):
        target = Pose.from_xyz_rpy(5.0, 0, 0)
        with pytest.raises(Unreachable):
            solve_ik(six_dof_arm, target, np.zeros(6))

    def test_random_reachable_targets(self, six_dof_arm):
        rng = np.random.default_rng(17)
        solved = 0
        n = 50
        for _ in range(n):
            q_true = random_joint_vector(six_dof_arm, rng)
            target = forward_kinematics(six_dof_arm, q_true).gripper
            try:
                q = solve_ik(six_dof_arm, target, np.zeros(6), rng=rng)
            except (Unreachable, NoConvergence):
                continue
            solved += 1
            fk = forward_kinematics(six_dof_arm, q)
            err_pos = np.linalg.norm(fk.gripper.position - target.position)
            assert err_pos <= 1e-3
            assert np.all(q >= six_dof_arm.lower_limits - 1e-12)
            assert np.all(q <= six_dof_arm.upper_limits + 1e-12)
        assert solved >= 0.95 * n

    def test_solution_respects_limits_even_for_edge_targets(self, six_dof_arm):
        rng = np.random.default_rng(29)
        lower = six_dof_arm.lower_limits
        upper = six_dof_arm.upper_limits
        for _ in range(10):
            q_true = lower + rng.random(6) * (upper - lower)
            q_true[1] = upper[1] - 0.01  # near a limit
            target = forward_kinematics(six_dof_arm, q_true).gripper
            try:
                q = solve_ik(six_dof_arm, target, q_true + 0.05 * rng.standard_normal(6), rng=rng)
            except NoConvergence:
                continue
            assert np.all(q >= lower - 1e-12) and np.all(q <= upper + 1e-12)

    def test_bad_tolerances_raise(self, six_dof_arm):
        with pytest.raises(ValueError):
            solve_ik(six_dof_arm, Pose.identity(), np.zeros(6), tol_pos=0.0)


class TestLinearJointMotion:
    def test_equal_endpoints(self):
        q = np.array([0.1, 0.2])
        out = linear_joint_motion(q, q, step=0.1)
        assert len(out) == 1
        assert np.array_equal(out[0], q)

    def test_single_joint_ramp(self):
        out = linear_joint_motion(np.array([0.0]), np.array([0.5]), step=0.2)
        values = [float(q[0]) for q in out]
        assert values[0] == 0.0 and values[-1] == pytest.approx(0.5)
        deltas = np.diff(values)
        assert np.all(deltas > 0)
        assert np.all(deltas <= 0.2 + 1e-12)

    def test_random_pairs_stay_within_limits(self, six_dof_arm):
        rng = np.random.default_rng(5)
        lower = six_dof_arm.lower_limits
        upper = six_dof_arm.upper_limits
        for _ in range(20):
            q0 = random_joint_vector(six_dof_arm, rng)
            q1 = random_joint_vector(six_dof_arm, rng)
            path = linear_joint_motion(q0, q1, step=0.05)
            assert len(path) >= 2
            for q in path:
                assert np.all(q >= lower - 1e-12) and np.all(q <= upper + 1e-12)
            for a, b in zip(path, path[1:]):
                assert np.max(np.abs(b - a)) <= 0.05 + 1e-12

    def test_bad_step_raises(self):
        with pytest.raises(ValueError):
            linear_joint_motion(np.zeros(2), np.ones(2), step=0.0)
