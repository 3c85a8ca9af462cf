"""Scenario schema (JSON, pydantic-validated) and the runtime world build.

Config files carry angles in degrees (fields suffixed ``_deg``) and lengths
in meters; runtime structures are radians and numpy throughout.  The original
validated spec rides along on the runtime Scenario so exports can embed a
byte-faithful copy of their input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .cable import CableAnchors, GadgetConfig, GadgetKind
from .collision import NamedBox
from .geometry import Capsule, Obb, Pose, Segment, quat_from_rpy, vec3
from .kinematics import ArmModel, Hand, Joint, LinkCapsule, RobotModel

Vec3List = tuple[float, float, float]


class ScenarioError(Exception):
    pass


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        path, msg = errors[0]
        super().__init__(f"{path}: {msg}" if path else msg)

    @property
    def first_path(self) -> str:
        return self.errors[0][0]


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------

class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PoseSpec(StrictModel):
    position: Vec3List = (0.0, 0.0, 0.0)
    rpy_deg: Vec3List = (0.0, 0.0, 0.0)


class CapsuleSpec(StrictModel):
    a: Vec3List
    b: Vec3List
    radius: float = Field(gt=0)


class JointSpec(StrictModel):
    origin: PoseSpec = PoseSpec()
    axis: Vec3List
    limits_deg: tuple[float, float]

    @model_validator(mode="after")
    def _check(self):
        if self.limits_deg[0] >= self.limits_deg[1]:
            raise ValueError("limits_deg must satisfy low < high")
        if abs(math.sqrt(sum(c * c for c in self.axis))) < 1e-9:
            raise ValueError("axis must be non-zero")
        return self


class LinkSpec(StrictModel):
    joint: int = Field(ge=0)
    a: Vec3List
    b: Vec3List
    radius: float = Field(gt=0)


class ArmSpec(StrictModel):
    joints: list[JointSpec] = Field(min_length=1)
    links: list[LinkSpec] = []
    flange: PoseSpec = PoseSpec()

    @model_validator(mode="after")
    def _check(self):
        for link in self.links:
            if link.joint >= len(self.joints):
                raise ValueError(f"link joint index {link.joint} out of range")
        return self


class RobotSpec(StrictModel):
    base: PoseSpec
    left: ArmSpec
    right: ArmSpec
    torso: list[CapsuleSpec] = []
    home_deg: dict[Literal["left", "right"], list[float]]
    aperture: tuple[float, float] = (0.0, 0.08)

    @model_validator(mode="after")
    def _check(self):
        for hand in ("left", "right"):
            if hand not in self.home_deg:
                raise ValueError(f"home_deg missing entry for {hand}")
            arm = self.left if hand == "left" else self.right
            if len(self.home_deg[hand]) != len(arm.joints):
                raise ValueError(f"home_deg[{hand}] length != joint count")
        return self


class BoxSpec(StrictModel):
    name: str
    center: PoseSpec
    half_extents: Vec3List

    @model_validator(mode="after")
    def _check(self):
        if any(c <= 0 for c in self.half_extents):
            raise ValueError("half_extents must be positive")
        return self


class GraspSpec(StrictModel):
    hand: Literal["left", "right"]
    pose: PoseSpec
    aperture: float = 0.06


class ToolSpec(StrictModel):
    body: CapsuleSpec
    grasps: list[GraspSpec] = Field(min_length=1)


class GadgetSpec(StrictModel):
    kind: Literal["balancer", "pulley"]
    cable_radius: float = Field(default=0.004, gt=0)
    slider_height: float = Field(default=0.05, gt=0)
    outside_length: float = Field(default=0.0, ge=0)
    threshold: float = Field(default=0.05, gt=0)
    slider_grasps: list[PoseSpec] | None = None


class AnchorsSpec(StrictModel):
    h: Vec3List
    tool_attach_local: Vec3List = (0.0, 0.0, 0.0)
    tool_attach_normal_local: Vec3List = (0.0, 0.0, 1.0)
    slider_rest: Vec3List

    @model_validator(mode="after")
    def _check(self):
        n = math.sqrt(sum(c * c for c in self.tool_attach_normal_local))
        if abs(n - 1.0) > 1e-6:
            raise ValueError("tool_attach_normal_local must be unit length")
        return self


class GoalSpec(StrictModel):
    id: int
    pose: PoseSpec


class BenchmarkSpec(StrictModel):
    id: str
    goals: list[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self):
        if len(set(self.goals)) != len(self.goals):
            raise ValueError("benchmark goals must be distinct")
        return self


class SamplingSpec(StrictModel):
    omega: float = Field(default=0.325, gt=0)
    theta_deg: list[float] = [30.0, 60.0]
    gamma_deg: list[float] = [0.0, 60.0, 120.0, 180.0, 240.0, 300.0]
    include_base: bool = True

    @property
    def n_candidates(self) -> int:
        return (1 if self.include_base else 0) + len(self.theta_deg) * len(self.gamma_deg)


class PlannerSpec(StrictModel):
    sampling: SamplingSpec = SamplingSpec()
    clearance: float = Field(default=0.005, gt=0)
    grasp_exclusion_radius: float = Field(default=0.15, gt=0)
    joint_step_rad: float = Field(default=0.05, gt=0)
    stitch_max_translation: float = Field(default=0.02, gt=0)
    stitch_max_rotation_deg: float = Field(default=5.0, gt=0)
    mu_ts_margin: tuple[float, float] = (0.9, 1.1)
    approach_standoff: float = Field(default=0.12, gt=0)
    lift_height: float = Field(default=0.10, gt=0)
    cable_hold_u: list[float] = [0.25, 0.5, 0.75]
    rrt_max_iters: int = Field(default=3000, gt=0)
    rrt_step_rad: float = Field(default=0.2, gt=0)
    budget_s: float = Field(default=120.0, gt=0)
    seed: int = 0
    ik_tol_pos: float = Field(default=1e-3, gt=0)
    ik_tol_rot_rad: float = Field(default=1e-2, gt=0)
    slider_hand: Literal["left", "right"] = "left"

    @model_validator(mode="after")
    def _check(self):
        lo, hi = self.mu_ts_margin
        if not (0 < lo <= 1 <= hi):
            raise ValueError("mu_ts_margin must bracket 1.0")
        if any(not (0 <= u <= 1) for u in self.cable_hold_u):
            raise ValueError("cable_hold_u entries must lie in [0, 1]")
        return self


class ScenarioSpec(StrictModel):
    name: str = "scenario"
    master: RobotSpec
    assistant: RobotSpec
    environment: list[BoxSpec] = []
    tool: ToolSpec
    gadget: GadgetSpec
    anchors: AnchorsSpec
    start_pose: PoseSpec
    goals: list[GoalSpec] = Field(min_length=1)
    placements: list[PoseSpec] = []
    handover_pose: PoseSpec
    benchmarks: list[BenchmarkSpec] = []
    planner: PlannerSpec = PlannerSpec()

    @model_validator(mode="after")
    def _check(self):
        ids = [g.id for g in self.goals]
        if len(set(ids)) != len(ids):
            raise ValueError("goal ids must be unique")
        known = set(ids)
        for b in self.benchmarks:
            missing = [g for g in b.goals if g not in known]
            if missing:
                raise ValueError(f"benchmark {b.id} references unknown goals {missing}")
        names = [e.name for e in self.environment]
        if len(set(names)) != len(names):
            raise ValueError("environment box names must be unique")
        return self


# ---------------------------------------------------------------------------
# Runtime structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grasp:
    index: int
    hand: Hand
    pose: Pose        # tool-frame gripper pose
    aperture: float


@dataclass(frozen=True, eq=False)
class Tool:
    body_local: Capsule
    grasps: tuple[Grasp, ...]


@dataclass(frozen=True, eq=False)
class SamplingConfig:
    omega: float
    theta_deg: tuple[float, ...]
    gamma_deg: tuple[float, ...]
    include_base: bool

    @property
    def n_candidates(self) -> int:
        return (1 if self.include_base else 0) + len(self.theta_deg) * len(self.gamma_deg)


@dataclass(frozen=True, eq=False)
class Benchmark:
    id: str
    goal_ids: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PlannerParams:
    clearance: float
    grasp_exclusion_radius: float
    joint_step: float              # rad
    stitch_max_translation: float
    stitch_max_rotation: float     # rad
    mu_ts_margin: tuple[float, float]
    approach_standoff: float
    lift_height: float
    cable_hold_u: tuple[float, ...]
    rrt_max_iters: int
    rrt_step: float                # rad
    budget_s: float
    seed: int
    ik_tol_pos: float
    ik_tol_rot: float              # rad
    slider_hand: Hand


@dataclass(eq=False)
class Scenario:
    name: str
    master: RobotModel
    assistant: RobotModel
    boxes: list[NamedBox]
    tool: Tool
    gadget: GadgetConfig
    slider_grasps: tuple[Pose, ...]
    anchors: CableAnchors
    start_pose: Pose
    goals: dict[int, Pose]
    placements: tuple[Pose, ...]
    handover_pose: Pose
    benchmarks: tuple[Benchmark, ...]
    sampling: SamplingConfig
    params: PlannerParams
    spec: ScenarioSpec
    warnings: list[str]

    def benchmark(self, task_id: str) -> Benchmark:
        for b in self.benchmarks:
            if b.id == task_id:
                return b
        raise KeyError(f"unknown benchmark id {task_id!r}; have {[b.id for b in self.benchmarks]}")


def _pose(spec: PoseSpec) -> Pose:
    r, p, y = (math.radians(a) for a in spec.rpy_deg)
    return Pose(np.array(spec.position, dtype=float), quat_from_rpy(r, p, y))


def _capsule(spec: CapsuleSpec) -> Capsule:
    return Capsule(Segment(np.array(spec.a), np.array(spec.b)), spec.radius)


def _arm(spec: ArmSpec, name: str) -> ArmModel:
    joints = tuple(
        Joint(_pose(j.origin), np.array(j.axis, dtype=float),
              math.radians(j.limits_deg[0]), math.radians(j.limits_deg[1]))
        for j in spec.joints)
    links = tuple(
        LinkCapsule(l.joint, np.array(l.a, dtype=float), np.array(l.b, dtype=float), l.radius)
        for l in spec.links)
    return ArmModel(name=name, joints=joints, links=links, flange=_pose(spec.flange))


def _robot(spec: RobotSpec, name: str) -> RobotModel:
    home = {Hand.LEFT: np.array([math.radians(a) for a in spec.home_deg["left"]]),
            Hand.RIGHT: np.array([math.radians(a) for a in spec.home_deg["right"]])}
    return RobotModel(
        name=name,
        base=_pose(spec.base),
        left=_arm(spec.left, f"{name}/left"),
        right=_arm(spec.right, f"{name}/right"),
        torso=tuple(_capsule(c) for c in spec.torso),
        aperture=tuple(spec.aperture),
        home=home,
    )


def _default_slider_grasps(slider_height: float) -> list[Pose]:
    """Four gripper poses around the slider's vertical axis at 90 degree spacing."""
    out = []
    for k in range(4):
        beta = 0.5 * math.pi * k
        approach = vec3(-math.cos(beta), -math.sin(beta), 0.0)
        x = vec3(0, 0, -1.0)
        y = np.cross(approach, x)
        from .geometry import quat_from_matrix
        rot = quat_from_matrix(np.column_stack([x, y, approach]))
        out.append(Pose(vec3(0, 0, slider_height / 2.0), rot))
    return out


def build_scenario(spec: ScenarioSpec) -> Scenario:
    warnings: list[str] = []
    sampling = SamplingConfig(
        omega=spec.planner.sampling.omega,
        theta_deg=tuple(spec.planner.sampling.theta_deg),
        gamma_deg=tuple(spec.planner.sampling.gamma_deg),
        include_base=spec.planner.sampling.include_base,
    )
    if sampling.n_candidates != 13:
        warnings.append(
            f"non-default sampling: {sampling.n_candidates} slider candidates instead of 13")
    for b in spec.benchmarks:
        if len(b.goals) != 3:
            warnings.append(f"benchmark {b.id} has {len(b.goals)} goals instead of 3")

    gadget = GadgetConfig(
        kind=GadgetKind(spec.gadget.kind),
        cable_radius=spec.gadget.cable_radius,
        slider_height=spec.gadget.slider_height,
        outside_length=spec.gadget.outside_length,
        threshold=spec.gadget.threshold,
    )
    if spec.gadget.slider_grasps is not None:
        slider_grasps = tuple(_pose(p) for p in spec.gadget.slider_grasps)
    else:
        slider_grasps = tuple(_default_slider_grasps(spec.gadget.slider_height))

    p = spec.planner
    params = PlannerParams(
        clearance=p.clearance,
        grasp_exclusion_radius=p.grasp_exclusion_radius,
        joint_step=p.joint_step_rad,
        stitch_max_translation=p.stitch_max_translation,
        stitch_max_rotation=math.radians(p.stitch_max_rotation_deg),
        mu_ts_margin=tuple(p.mu_ts_margin),
        approach_standoff=p.approach_standoff,
        lift_height=p.lift_height,
        cable_hold_u=tuple(p.cable_hold_u),
        rrt_max_iters=p.rrt_max_iters,
        rrt_step=p.rrt_step_rad,
        budget_s=p.budget_s,
        seed=p.seed,
        ik_tol_pos=p.ik_tol_pos,
        ik_tol_rot=p.ik_tol_rot_rad,
        slider_hand=Hand(p.slider_hand),
    )

    return Scenario(
        name=spec.name,
        master=_robot(spec.master, "master"),
        assistant=_robot(spec.assistant, "assistant"),
        boxes=[NamedBox(f"env/{b.name}", Obb(_pose(b.center), np.array(b.half_extents, dtype=float)))
               for b in spec.environment],
        tool=Tool(
            body_local=_capsule(spec.tool.body),
            grasps=tuple(Grasp(i, Hand(g.hand), _pose(g.pose), g.aperture)
                         for i, g in enumerate(spec.tool.grasps)),
        ),
        gadget=gadget,
        slider_grasps=slider_grasps,
        anchors=CableAnchors(
            h=np.array(spec.anchors.h, dtype=float),
            tool_attach_local=np.array(spec.anchors.tool_attach_local, dtype=float),
            tool_attach_normal_local=np.array(spec.anchors.tool_attach_normal_local, dtype=float),
            slider_rest=np.array(spec.anchors.slider_rest, dtype=float),
        ),
        start_pose=_pose(spec.start_pose),
        goals={g.id: _pose(g.pose) for g in spec.goals},
        placements=tuple(_pose(p) for p in spec.placements),
        handover_pose=_pose(spec.handover_pose),
        benchmarks=tuple(Benchmark(b.id, tuple(b.goals)) for b in spec.benchmarks),
        sampling=sampling,
        params=params,
        spec=spec,
        warnings=warnings,
    )


def _validation_errors(exc: ValidationError) -> list[tuple[str, str]]:
    out = []
    for err in exc.errors():
        path = ".".join(str(part) for part in err["loc"])
        out.append((path, err["msg"]))
    return out


def parse_scenario(data: dict) -> Scenario:
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        raise ScenarioValidationError(_validation_errors(exc)) from exc
    return build_scenario(spec)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file.

    Raises ScenarioParseError for unreadable/ill-formed JSON and
    ScenarioValidationError (with dotted field paths) for schema violations.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(data)


def dump_scenario(scenario: Scenario) -> dict:
    return scenario.spec.model_dump(mode="json")


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump_scenario(scenario), indent=2, sort_keys=True) + "\n")
