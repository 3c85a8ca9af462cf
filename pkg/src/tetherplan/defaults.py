"""Shipped default scenario: two 6-DOF-per-arm dual-arm robots at a table.

The master robot stands on the -y side of the table, the assistant opposite.
The cable source hangs high between the master and the table; the unattended
slider rest point dangles below the table top, so an unassisted cable drags
across the table edge whenever the tool is placed.  Goals 4 and 5 sit on the
far left, outside the master's right-arm reach, which forces a hand change
through a handover or an intermediate placement.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .scenario import Scenario, ScenarioSpec, build_scenario

SHOULDER_LATERAL = 0.25
MASTER_SHOULDER_Z = 1.00
ASSISTANT_SHOULDER_Z = 1.05


def _arm(lateral: float, shoulder_z: float) -> dict:
    return {
        "joints": [
            {"origin": {"position": [0.0, lateral, shoulder_z]}, "axis": [0, 0, 1], "limits_deg": [-170, 170]},
            {"origin": {"position": [0.0, 0.0, 0.06]}, "axis": [0, 1, 0], "limits_deg": [-115, 115]},
            {"origin": {"position": [0.42, 0.0, 0.0]}, "axis": [0, 1, 0], "limits_deg": [-150, 150]},
            {"origin": {"position": [0.38, 0.0, 0.0]}, "axis": [1, 0, 0], "limits_deg": [-170, 170]},
            {"origin": {"position": [0.10, 0.0, 0.0]}, "axis": [0, 1, 0], "limits_deg": [-115, 115]},
            {"origin": {"position": [0.06, 0.0, 0.0]}, "axis": [1, 0, 0], "limits_deg": [-170, 170]},
        ],
        "links": [
            {"joint": 1, "a": [0, 0, 0], "b": [0.42, 0, 0], "radius": 0.055},
            {"joint": 2, "a": [0, 0, 0], "b": [0.38, 0, 0], "radius": 0.05},
            {"joint": 3, "a": [0, 0, 0], "b": [0.10, 0, 0], "radius": 0.045},
            {"joint": 5, "a": [0, 0, 0], "b": [0.10, 0, 0], "radius": 0.04},
        ],
        "flange": {"position": [0.10, 0.0, 0.0], "rpy_deg": [0.0, 90.0, 0.0]},
    }


def _robot(base_y: float, yaw_deg: float, shoulder_z: float,
           home_left: list[float], home_right: list[float]) -> dict:
    # world-frame right arm sits on +x for the master, -x for the assistant
    return {
        "base": {"position": [0.0, base_y, 0.0], "rpy_deg": [0.0, 0.0, yaw_deg]},
        "left": _arm(+SHOULDER_LATERAL, shoulder_z),
        "right": _arm(-SHOULDER_LATERAL, shoulder_z),
        "torso": [{"a": [0, 0, 0.15], "b": [0, 0, 0.92], "radius": 0.13}],
        "home_deg": {"left": list(home_left), "right": list(home_right)},
        "aperture": [0.0, 0.09],
    }


# ready poses: grippers parked off the table corners above table height,
# solved once by IK and frozen so transit motions rarely need sampling
MASTER_HOME_RIGHT = [-61.9, -70.6, 135.9, -64.2, -78.7, 22.1]
MASTER_HOME_LEFT = [61.9, -70.6, 135.9, 64.2, -78.7, -22.1]
ASSISTANT_HOME_LEFT = [65.0, -71.4, 137.2, 67.0, -80.0, -22.2]
ASSISTANT_HOME_RIGHT = [-65.0, -71.4, 137.2, -67.0, -80.0, 22.2]


def _tool_grasps() -> list[dict]:
    grasps = []
    for hand in ("right", "left"):
        for height in (-0.06, -0.17):
            for azimuth in (0.0, 90.0, 180.0, 270.0):
                grasps.append({
                    "hand": hand,
                    # gripper z horizontal pointing at `azimuth`, gripper x down the tool
                    "pose": {"position": [0.0, 0.0, height],
                             "rpy_deg": [0.0, 90.0, azimuth]},
                    "aperture": 0.075,
                })
    return grasps


def _slider_grasps() -> list[dict]:
    # assistant-side approach first (z toward -y) so reasonGrasp tries it first
    out = []
    for azimuth in (270.0, 0.0, 180.0, 90.0):
        out.append({"position": [0.0, 0.0, 0.025],
                    "rpy_deg": [0.0, 90.0, azimuth]})
    return out


def default_scenario_dict() -> dict:
    upright = {"rpy_deg": [0.0, 0.0, 0.0]}
    return {
        "name": "dual-arm-table",
        "master": _robot(base_y=-0.72, yaw_deg=90.0, shoulder_z=MASTER_SHOULDER_Z,
                         home_left=MASTER_HOME_LEFT, home_right=MASTER_HOME_RIGHT),
        "assistant": _robot(base_y=0.80, yaw_deg=-90.0, shoulder_z=ASSISTANT_SHOULDER_Z,
                            home_left=ASSISTANT_HOME_LEFT, home_right=ASSISTANT_HOME_RIGHT),
        "environment": [
            {"name": "table", "center": {"position": [0.0, 0.0, 0.72]},
             "half_extents": [0.85, 0.40, 0.03]},
        ],
        "tool": {
            "body": {"a": [0, 0, -0.03], "b": [0, 0, -0.20], "radius": 0.035},
            "grasps": _tool_grasps(),
        },
        "gadget": {
            "kind": "balancer",
            "cable_radius": 0.004,
            "slider_height": 0.05,
            "threshold": 0.05,
            "slider_grasps": _slider_grasps(),
        },
        "anchors": {
            "h": [0.0, -0.55, 2.05],
            "tool_attach_local": [0.0, 0.0, 0.0],
            "tool_attach_normal_local": [0.0, 0.0, 1.0],
            "slider_rest": [0.0, -0.55, 0.50],
        },
        "start_pose": {"position": [0.62, 0.02, 1.0], **upright},
        "goals": [
            {"id": 1, "pose": {"position": [0.45, 0.22, 1.0], **upright}},
            {"id": 2, "pose": {"position": [0.18, 0.26, 1.0], **upright}},
            {"id": 3, "pose": {"position": [0.35, -0.03, 1.0], **upright}},
            {"id": 4, "pose": {"position": [-0.62, 0.12, 1.0], **upright}},
            {"id": 5, "pose": {"position": [-0.46, 0.24, 1.0], **upright}},
        ],
        "placements": [
            {"position": [0.10, 0.02, 1.0], **upright},
            {"position": [-0.12, 0.16, 1.0], **upright},
        ],
        "handover_pose": {"position": [0.0, -0.24, 1.03], **upright},
        "benchmarks": [
            {"id": "i", "goals": [1, 4, 3]},
            {"id": "ii", "goals": [3, 2, 5]},
            {"id": "iii", "goals": [2, 1, 3]},
            {"id": "iv", "goals": [4, 2, 1]},
            {"id": "v", "goals": [5, 1, 2]},
        ],
        "planner": {
            "slider_hand": "right",
            "sampling": {"omega": 0.325,
                         "theta_deg": [30.0, 60.0],
                         "gamma_deg": [0.0, 60.0, 120.0, 180.0, 240.0, 300.0],
                         "include_base": True},
            "budget_s": 120.0,
            "seed": 0,
        },
    }


def pulley_scenario_dict() -> dict:
    data = copy.deepcopy(default_scenario_dict())
    data["name"] = "dual-arm-table-pulley"
    data["gadget"]["kind"] = "pulley"
    # initial outside length: roughly the straight start-pose cable length
    data["gadget"]["outside_length"] = 1.60
    return data


def default_scenario() -> Scenario:
    return build_scenario(ScenarioSpec.model_validate(default_scenario_dict()))


def pulley_scenario() -> Scenario:
    return build_scenario(ScenarioSpec.model_validate(pulley_scenario_dict()))


def write_scenario_files(directory: str | Path) -> list[Path]:
    """Regenerate the shipped scenario JSON files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, data in (("default.json", default_scenario_dict()),
                       ("pulley.json", pulley_scenario_dict())):
        path = directory / name
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        out.append(path)
    return out
