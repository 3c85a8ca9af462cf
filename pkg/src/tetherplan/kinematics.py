"""Serial-arm forward kinematics, numeric inverse kinematics, joint motions.

Arms are chains of revolute joints.  Each joint carries a fixed transform
from the parent frame to its own frame and a rotation axis expressed in that
frame.  Link collision geometry rides the joint frames as capsules.

The solvers work on plain (rotation matrix, translation) pairs internally;
Pose objects only appear at the API surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .geometry import (
    Capsule,
    Pose,
    Segment,
    compose,
    quat_to_matrix,
    quat_from_matrix,
    transform_point,
)


class Hand(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Hand":
        return Hand.RIGHT if self is Hand.LEFT else Hand.LEFT


class IkFailure(Exception):
    """Base class for inverse-kinematics failures."""


class Unreachable(IkFailure):
    """Target position lies beyond the arm's reach radius."""


class NoConvergence(IkFailure):
    """Iteration cap hit on every seed without meeting the tolerances."""


@dataclass(frozen=True, eq=False)
class Joint:
    origin: Pose              # parent frame -> joint frame, before rotation
    axis: np.ndarray          # unit axis in the joint frame
    lower: float              # rad
    upper: float              # rad


@dataclass(frozen=True, eq=False)
class LinkCapsule:
    joint_index: int          # frame the capsule rides (post-rotation)
    a: np.ndarray             # local endpoints, m
    b: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class ArmModel:
    name: str
    joints: tuple[Joint, ...]
    links: tuple[LinkCapsule, ...]
    flange: Pose              # last joint frame -> gripper frame

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @property
    def lower_limits(self) -> np.ndarray:
        return _compiled(self).lower

    @property
    def upper_limits(self) -> np.ndarray:
        return _compiled(self).upper

    def reach_radius(self) -> float:
        """Upper bound on gripper distance from the first joint origin."""
        r = float(np.linalg.norm(self.flange.position))
        for j in self.joints[1:]:
            r += float(np.linalg.norm(j.origin.position))
        return r


@dataclass(frozen=True, eq=False)
class RobotModel:
    name: str
    base: Pose
    left: ArmModel
    right: ArmModel
    torso: tuple[Capsule, ...] = ()      # base-frame capsules, static
    aperture: tuple[float, float] = (0.0, 0.08)
    home: dict = field(default_factory=dict)   # Hand -> JointVector

    def arm(self, hand: Hand) -> ArmModel:
        return self.left if hand is Hand.LEFT else self.right

    def torso_world(self) -> list[Capsule]:
        return [Capsule(Segment(transform_point(self.base, c.axis.a),
                                transform_point(self.base, c.axis.b)), c.radius)
                for c in self.torso]


class _CompiledArm:
    """Per-joint constants hoisted out of the FK loop."""

    def __init__(self, arm: ArmModel):
        n = arm.n_joints
        self.r_org = np.empty((n, 3, 3))
        self.t_org = np.empty((n, 3))
        self.k = np.empty((n, 3, 3))        # skew(axis)
        self.k2 = np.empty((n, 3, 3))       # skew(axis)^2
        self.axes = np.empty((n, 3))
        for i, j in enumerate(arm.joints):
            self.r_org[i] = quat_to_matrix(j.origin.rotation)
            self.t_org[i] = j.origin.position
            a = np.asarray(j.axis, dtype=float)
            a = a / np.linalg.norm(a)
            self.axes[i] = a
            k = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
            self.k[i] = k
            self.k2[i] = k @ k
        self.flange_r = quat_to_matrix(arm.flange.rotation)
        self.flange_t = np.asarray(arm.flange.position, dtype=float)
        self.lower = np.array([j.lower for j in arm.joints])
        self.upper = np.array([j.upper for j in arm.joints])
        self.link_joint = np.array([l.joint_index for l in arm.links], dtype=int)
        self.link_a = np.array([l.a for l in arm.links]).reshape(-1, 3)
        self.link_b = np.array([l.b for l in arm.links]).reshape(-1, 3)
        self.link_r = np.array([l.radius for l in arm.links])


@lru_cache(maxsize=None)
def _compiled(arm: ArmModel) -> _CompiledArm:
    return _CompiledArm(arm)


_EYE3 = np.eye(3)


def _fk_arrays(arm: ArmModel, q: np.ndarray, base_r: np.ndarray, base_t: np.ndarray):
    """Rotation/translation of every joint frame plus the gripper frame."""
    c = _compiled(arm)
    n = arm.n_joints
    frames_r = np.empty((n, 3, 3))
    frames_t = np.empty((n, 3))
    r = base_r
    t = base_t
    sin = np.sin(q)
    cos = np.cos(q)
    for i in range(n):
        t = t + r @ c.t_org[i]
        r = r @ c.r_org[i]
        r = r @ (_EYE3 + sin[i] * c.k[i] + (1.0 - cos[i]) * c.k2[i])
        frames_r[i] = r
        frames_t[i] = t
    grip_t = t + r @ c.flange_t
    grip_r = r @ c.flange_r
    return frames_r, frames_t, grip_r, grip_t


@dataclass(frozen=True)
class FkResult:
    gripper: Pose
    frames: tuple[Pose, ...]          # world pose of every joint frame
    capsules: tuple[Capsule, ...]     # world-space link capsules


def forward_kinematics(arm: ArmModel, q: np.ndarray, base: Pose = Pose.identity()) -> FkResult:
    """World gripper pose and link capsules for joint vector q (radians)."""
    q = np.asarray(q, dtype=float)
    if len(q) != arm.n_joints:
        raise ValueError(f"joint vector length {len(q)} != {arm.n_joints} for arm {arm.name}")
    base_r = quat_to_matrix(base.rotation)
    frames_r, frames_t, grip_r, grip_t = _fk_arrays(arm, q, base_r, np.asarray(base.position, dtype=float))
    frames = tuple(Pose(frames_t[i], quat_from_matrix(frames_r[i])) for i in range(arm.n_joints))
    gripper = Pose(grip_t, quat_from_matrix(grip_r))
    capsules = link_capsules(arm, q, base)
    return FkResult(gripper, frames, capsules)


def link_capsules(arm: ArmModel, q: np.ndarray, base: Pose = Pose.identity()) -> tuple[Capsule, ...]:
    """World-space link capsules only; cheaper than full forward_kinematics."""
    c = _compiled(arm)
    if len(c.link_joint) == 0:
        return ()
    base_r = quat_to_matrix(base.rotation)
    frames_r, frames_t, _, _ = _fk_arrays(arm, np.asarray(q, dtype=float), base_r,
                                          np.asarray(base.position, dtype=float))
    rj = frames_r[c.link_joint]
    tj = frames_t[c.link_joint]
    a_world = tj + np.einsum("kij,kj->ki", rj, c.link_a)
    b_world = tj + np.einsum("kij,kj->ki", rj, c.link_b)
    return tuple(Capsule(Segment(a_world[i], b_world[i]), float(c.link_r[i]))
                 for i in range(len(c.link_joint)))


def gripper_pose(arm: ArmModel, q: np.ndarray, base: Pose = Pose.identity()) -> Pose:
    base_r = quat_to_matrix(base.rotation)
    _, _, grip_r, grip_t = _fk_arrays(arm, np.asarray(q, dtype=float), base_r,
                                      np.asarray(base.position, dtype=float))
    return Pose(grip_t, quat_from_matrix(grip_r))


def _rotation_error(r_cur: np.ndarray, r_tgt: np.ndarray) -> np.ndarray:
    """World axis-angle vector taking r_cur to r_tgt."""
    r_err = r_tgt @ r_cur.T
    cos_a = max(-1.0, min(1.0, 0.5 * (np.trace(r_err) - 1.0)))
    angle = math.acos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    axis = np.array([r_err[2, 1] - r_err[1, 2],
                     r_err[0, 2] - r_err[2, 0],
                     r_err[1, 0] - r_err[0, 1]])
    s = np.linalg.norm(axis)
    if s < 1e-9:
        # angle ~ pi: extract axis from the symmetric part
        diag = np.clip((np.diag(r_err) + 1.0) / 2.0, 0.0, 1.0)
        axis = np.sqrt(diag)
        axis[1] = math.copysign(axis[1], r_err[0, 1])
        axis[2] = math.copysign(axis[2], r_err[0, 2])
        n = np.linalg.norm(axis)
        axis = axis / n if n > 1e-12 else np.array([1.0, 0.0, 0.0])
        return axis * angle
    return (axis / s) * angle


DLS_DAMPING = 0.05
IK_MAX_ITERS = 300
IK_RESTARTS = 5
IK_STEP_CLAMP = 0.5   # rad, largest per-joint move per iteration
ERR_CAP_POS = 0.3     # m, error magnitude fed to the DLS step
ERR_CAP_ROT = 0.7     # rad
POS_PHASE_TOL = 0.004  # m, switch from position-only to full 6-D error
STALL_CAP = 8


def solve_ik(arm: ArmModel,
             target: Pose,
             seed: np.ndarray,
             tol_pos: float = 1e-3,
             tol_rot: float = 1e-2,
             base: Pose = Pose.identity(),
             rng: np.random.Generator | None = None,
             max_iters: int = IK_MAX_ITERS,
             restarts: int = IK_RESTARTS) -> np.ndarray:
    """Damped least-squares IK on the 6-D pose error twist.

    Iterates from ``seed`` first, then from up to ``restarts`` random seeds
    drawn uniformly within the joint limits.  Joint values are clamped to
    their limits after every update, so every returned solution is feasible.
    Convergence helpers around the plain DLS step: the position error is
    driven down first before the orientation rows join, steps backtrack by
    halving when the error norm would grow, and a stalled iterate gets a
    random in-limits jiggle instead of burning the rest of its budget.

    Raises Unreachable when the target is beyond the reach radius, or
    NoConvergence when all seeds exhaust the iteration cap.
    """
    if tol_pos <= 0 or tol_rot <= 0:
        raise ValueError("tolerances must be positive")
    seed = np.asarray(seed, dtype=float)
    if len(seed) != arm.n_joints:
        raise ValueError("seed length mismatch")

    c = _compiled(arm)
    base_r = quat_to_matrix(base.rotation)
    base_t = np.asarray(base.position, dtype=float)
    shoulder = base_t + base_r @ c.t_org[0]
    tgt_t = np.asarray(target.position, dtype=float)
    if np.linalg.norm(tgt_t - shoulder) > arm.reach_radius() + tol_pos:
        raise Unreachable(
            f"target {np.round(tgt_t, 3)} beyond reach {arm.reach_radius():.3f} m")

    tgt_r = quat_to_matrix(target.rotation)
    lam2 = DLS_DAMPING * DLS_DAMPING
    eye6 = np.eye(6)
    eye3 = np.eye(3)

    seeds = [np.clip(seed, c.lower, c.upper)]
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(restarts):
        seeds.append(c.lower + rng.random(arm.n_joints) * (c.upper - c.lower))

    def error_at(q: np.ndarray):
        frames_r, frames_t, grip_r, grip_t = _fk_arrays(arm, q, base_r, base_t)
        err = np.concatenate([tgt_t - grip_t, _rotation_error(grip_r, tgt_r)])
        return err, frames_r, frames_t, grip_t

    for q0 in seeds:
        q = q0.copy()
        err, frames_r, frames_t, grip_t = error_at(q)
        stalls = 0
        phase_pos = True
        for _ in range(max_iters):
            pos_err = np.linalg.norm(err[:3])
            rot_err = np.linalg.norm(err[3:])
            if pos_err <= tol_pos and rot_err <= tol_rot:
                return q
            if phase_pos and pos_err <= POS_PHASE_TOL:
                phase_pos = False
            e = err.copy()
            if pos_err > ERR_CAP_POS:
                e[:3] *= ERR_CAP_POS / pos_err
            if rot_err > ERR_CAP_ROT:
                e[3:] *= ERR_CAP_ROT / rot_err
            axes_w = np.einsum("kij,kj->ki", frames_r, c.axes)
            jac6 = np.empty((6, arm.n_joints))
            jac6[:3] = np.cross(axes_w, grip_t - frames_t).T
            jac6[3:] = axes_w.T
            if phase_pos:
                jac, ew, eye = jac6[:3], e[:3], eye3
            else:
                jac, ew, eye = jac6, e, eye6
            dq = jac.T @ np.linalg.solve(jac @ jac.T + lam2 * eye, ew)
            biggest = np.max(np.abs(dq))
            if biggest > IK_STEP_CLAMP:
                dq *= IK_STEP_CLAMP / biggest
            cur_cost = pos_err if phase_pos else np.linalg.norm(err)
            moved = False
            for _ in range(6):
                q_new = np.clip(q + dq, c.lower, c.upper)
                if np.max(np.abs(q_new - q)) < 1e-13:
                    break
                new_err, nfr, nft, ngt = error_at(q_new)
                new_cost = np.linalg.norm(new_err[:3]) if phase_pos else np.linalg.norm(new_err)
                if new_cost < cur_cost:
                    q, err, frames_r, frames_t, grip_t = q_new, new_err, nfr, nft, ngt
                    moved = True
                    break
                dq *= 0.5
            if not moved:
                stalls += 1
                if stalls > STALL_CAP:
                    break
                q = np.clip(q + 0.1 * (1 + stalls) * rng.standard_normal(arm.n_joints),
                            c.lower, c.upper)
                err, frames_r, frames_t, grip_t = error_at(q)
                phase_pos = np.linalg.norm(err[:3]) > POS_PHASE_TOL
    raise NoConvergence(f"no IK solution for arm {arm.name} within {max_iters} iterations")


def try_ik(arm: ArmModel, target: Pose, seed: np.ndarray, **kwargs) -> np.ndarray | None:
    """solve_ik that reports failure as None; for planner candidate loops."""
    try:
        return solve_ik(arm, target, seed, **kwargs)
    except IkFailure:
        return None


def linear_joint_motion(q0: np.ndarray, q1: np.ndarray, step: float = 0.05) -> list[np.ndarray]:
    """Inclusive straight-line interpolation with per-joint deltas <= step rad."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if q0.shape != q1.shape:
        raise ValueError("joint vectors differ in length")
    if step <= 0:
        raise ValueError("step must be positive")
    span = float(np.max(np.abs(q1 - q0)))
    if span < 1e-12:
        return [q0.copy()]
    n = int(math.ceil(span / step))
    return [q0 + (k / n) * (q1 - q0) for k in range(n + 1)]


def random_joint_vector(arm: ArmModel, rng: np.random.Generator) -> np.ndarray:
    c = _compiled(arm)
    return c.lower + rng.random(arm.n_joints) * (c.upper - c.lower)
