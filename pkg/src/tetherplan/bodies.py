"""Assembly of named world collision bodies from robots, tool, and scene."""

from __future__ import annotations

import numpy as np

from .collision import NamedCapsule
from .geometry import Capsule, Pose, Segment, compose, pose_inverse, transform_point
from .kinematics import Hand, RobotModel, link_capsules
from .scenario import Grasp, Tool


def arm_capsule_names(robot: RobotModel, hand: Hand) -> list[str]:
    arm = robot.arm(hand)
    return [f"{robot.name}/{hand.value}/link{i}" for i in range(len(arm.links))]


def hand_capsule_name(robot: RobotModel, hand: Hand) -> str:
    """The distal link capsule, by convention the gripper body."""
    arm = robot.arm(hand)
    return f"{robot.name}/{hand.value}/link{len(arm.links) - 1}"


def arm_capsules(robot: RobotModel, hand: Hand, q: np.ndarray) -> list[NamedCapsule]:
    caps = link_capsules(robot.arm(hand), q, robot.base)
    names = arm_capsule_names(robot, hand)
    return [NamedCapsule(n, c) for n, c in zip(names, caps)]


def torso_capsules(robot: RobotModel) -> list[NamedCapsule]:
    return [NamedCapsule(f"{robot.name}/torso{i}", c)
            for i, c in enumerate(robot.torso_world())]


def robot_capsules(robot: RobotModel, q_left: np.ndarray, q_right: np.ndarray) -> list[NamedCapsule]:
    return (arm_capsules(robot, Hand.LEFT, q_left)
            + arm_capsules(robot, Hand.RIGHT, q_right)
            + torso_capsules(robot))


def tool_capsule(tool: Tool, pose: Pose) -> NamedCapsule:
    body = tool.body_local
    return NamedCapsule("tool", Capsule(
        Segment(transform_point(pose, body.axis.a), transform_point(pose, body.axis.b)),
        body.radius))


def grasp_gripper_pose(tool_pose: Pose, grasp: Grasp) -> Pose:
    """World gripper pose realizing a tool-frame grasp at a tool pose."""
    return compose(tool_pose, grasp.pose)


def tool_pose_from_gripper(gripper: Pose, grasp: Grasp) -> Pose:
    """Tool pose implied by a gripper pose holding with the given grasp."""
    return compose(gripper, pose_inverse(grasp.pose))
