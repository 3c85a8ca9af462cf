import numpy as np
import pytest

from tetherplan.geometry import Pose, vec3
from tetherplan.kinematics import ArmModel, Joint, LinkCapsule


def make_six_dof_arm(name: str = "test") -> ArmModel:
    """Generic elbow manipulator: yaw shoulder, two pitch links, 3-axis wrist."""
    deg = np.pi / 180.0
    joints = (
        Joint(Pose.from_xyz_rpy(0, 0, 0.10), vec3(0, 0, 1), -170 * deg, 170 * deg),
        Joint(Pose.from_xyz_rpy(0, 0, 0.05), vec3(0, 1, 0), -120 * deg, 120 * deg),
        Joint(Pose.from_xyz_rpy(0.40, 0, 0), vec3(0, 1, 0), -150 * deg, 150 * deg),
        Joint(Pose.from_xyz_rpy(0.35, 0, 0), vec3(1, 0, 0), -170 * deg, 170 * deg),
        Joint(Pose.from_xyz_rpy(0.10, 0, 0), vec3(0, 1, 0), -120 * deg, 120 * deg),
        Joint(Pose.from_xyz_rpy(0.05, 0, 0), vec3(1, 0, 0), -170 * deg, 170 * deg),
    )
    links = (
        LinkCapsule(1, vec3(0, 0, 0), vec3(0.40, 0, 0), 0.055),
        LinkCapsule(2, vec3(0, 0, 0), vec3(0.35, 0, 0), 0.045),
        LinkCapsule(4, vec3(0, 0, 0), vec3(0.15, 0, 0), 0.04),
    )
    return ArmModel(name=name, joints=joints, links=links,
                    flange=Pose.from_xyz_rpy(0.10, 0, 0))


@pytest.fixture
def six_dof_arm() -> ArmModel:
    return make_six_dof_arm()
