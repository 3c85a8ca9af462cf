"""Assistant-robot planning: slider candidates, constraint checks, policies.

For every master step the assistant must hold the cable slider at one of 13
sampled offsets around the tool attach frame.  Candidate order starts from
the previously used index and alternates outward (i_last, +1, -1, +2, ...);
when every candidate fails the previous configuration is reused if it still
satisfies all constraints, and when that fails too the whole traversal
restarts with the next slider grasp.

Two policies ride on top: in balancer mode the free hand pins the cable
while the master robot is not holding the tool, and in pulley mode motor
commands keep the outside cable length within the threshold of what the
two segments require.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .bodies import arm_capsules, hand_capsule_name, tool_capsule, torso_capsules
from .cable import (
    CableState,
    Exclusion,
    PulleyCommand,
    SliderState,
    attach_frame,
    bend_angle_slider,
    bend_angle_tool,
    cable_collision_events,
    cable_state,
    make_slider_state,
    pulley_adjust,
    required_cable_length,
)
from .collision import CapsuleSet, NamedCapsule, any_body_violation
from .geometry import (
    Pose,
    closest_point_on_segment,
    compose,
    pose_interpolate,
    pose_inverse,
    quat_from_matrix,
    quat_rotate,
    quat_rotation_between,
    vec3,
)
from .kinematics import Hand, gripper_pose, try_ik
from .motion import discretize_waypoints, rrt_connect
from .scenario import SamplingConfig, Scenario
from .tms import PlanTimeout, TMSStep, TmsAction, _deadline_guard

BEND_LIMIT_DEG = 90.0


class AmsFailure(Exception):
    pass


class Exhausted(AmsFailure):
    """Every slider grasp failed somewhere along the trajectory."""


class NoGrabPoint(AmsFailure):
    """Cable-hold policy found no IK-feasible grab point on the cable."""


class RrtFail(AmsFailure):
    """Cable-hold policy could not connect the grab motion."""


class Reject(str, Enum):
    IK_FAIL = "ik_fail"
    CABLE_COLLISION = "cable_collision"
    BEND_LIMIT = "bend_limit"
    BODY_COLLISION = "body_collision"
    MARGIN = "margin"
    STITCH = "stitch"
    HOLD_INFEASIBLE = "hold_infeasible"


# ---------------------------------------------------------------------------
# Candidate sampling (13 offsets around the attach frame)
# ---------------------------------------------------------------------------

def sample_lambda(theta_deg: float, gamma_deg: float, tool_rot: np.ndarray,
                  omega: float) -> np.ndarray:
    """Offset vector of magnitude omega at polar angle theta from the tool z
    axis, azimuth gamma, expressed in world coordinates."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    theta = math.radians(theta_deg)
    gamma = math.radians(gamma_deg)
    local = np.array([math.sin(theta) * math.cos(gamma),
                      math.sin(theta) * math.sin(gamma),
                      math.cos(theta)])
    return omega * quat_rotate(tool_rot, local)


def lambda_offsets(tool_rot: np.ndarray, cfg: SamplingConfig) -> list[np.ndarray]:
    """All candidate offsets, base case first, then theta-major gamma-ascending."""
    out = []
    if cfg.include_base:
        out.append(sample_lambda(0.0, 0.0, tool_rot, cfg.omega))
    for theta in cfg.theta_deg:
        for gamma in cfg.gamma_deg:
            out.append(sample_lambda(theta, gamma, tool_rot, cfg.omega))
    return out


def candidate_positions(attach: Pose, cfg: SamplingConfig) -> list[tuple[int, np.ndarray]]:
    """Ordered (index, slider bottom position) pairs for an attach frame."""
    return [(i, attach.position + lam)
            for i, lam in enumerate(lambda_offsets(attach.rotation, cfg))]


def candidate_order(i_last: int, n: int = 13):
    """Index enumeration i_last, i_last+1, i_last-1, ... skipping out-of-range."""
    if not 0 <= i_last < n:
        raise ValueError(f"i_last {i_last} out of range for {n} candidates")
    yield i_last
    for d in range(1, n):
        if i_last + d < n:
            yield i_last + d
        if i_last - d >= 0:
            yield i_last - d


def nexti(i_last: int, current: int | None, n: int = 13) -> int | None:
    """Next candidate index after ``current`` in the alternating order.

    current=None starts the enumeration (returns i_last); None is returned
    once all n indices have been visited.
    """
    order = list(candidate_order(i_last, n))
    if current is None:
        return order[0]
    pos = order.index(current)
    return order[pos + 1] if pos + 1 < len(order) else None


# ---------------------------------------------------------------------------
# Per-step constraint checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SliderGrasp:
    hand: Hand
    grasp_index: int
    pose: Pose       # slider-frame gripper pose


@dataclass(frozen=True, eq=False)
class CableHold:
    hand: Hand
    u: float
    grab_point: np.ndarray
    joints: np.ndarray
    approach: tuple = ()      # joint waypoints, set on the first held step
    retreat: tuple = ()       # joint waypoints, set on the last held step


@dataclass(frozen=True, eq=False)
class AMSStep:
    index: int
    joints: dict                      # Hand -> assistant joint vector
    candidate_index: int
    slider: SliderState
    slider_pose: Pose
    reused: bool = False
    stitch: tuple = ()                # interpolated sub-configs for the slider arm
    pulley_command: PulleyCommand | None = None
    outside_length: float | None = None
    cable_hold: CableHold | None = None


@dataclass(eq=False)
class AMSResult:
    steps: list[AMSStep]
    slider_grasp: SliderGrasp
    tallies: dict = field(default_factory=dict)


@dataclass(eq=False)
class _StepContext:
    """World state of one master step, precomputed for the candidate loop."""
    tms: TMSStep
    attach: Pose
    t: np.ndarray
    master_caps: list[NamedCapsule]
    master_set: CapsuleSet
    cable_exclusions: tuple[Exclusion, ...]


class AmsPlanner:
    def __init__(self, scenario: Scenario, rng: np.random.Generator,
                 deadline: float = math.inf):
        self.sc = scenario
        self.rng = rng
        self.deadline = deadline
        self.assistant = scenario.assistant
        self.assist_torso = torso_capsules(scenario.assistant)
        self.tallies: dict = {r.value: 0 for r in Reject}

    # -- context -------------------------------------------------------------

    def step_context(self, step: TMSStep) -> _StepContext:
        sc = self.sc
        attach = attach_frame(step.tool_pose, sc.anchors)
        t = attach.position
        master_caps = (arm_capsules(sc.master, Hand.LEFT, step.joints[Hand.LEFT])
                       + arm_capsules(sc.master, Hand.RIGHT, step.joints[Hand.RIGHT])
                       + torso_capsules(sc.master)
                       + [tool_capsule(sc.tool, step.tool_pose)])
        exclusions = [Exclusion("tool")]
        for hand in step.grasp_hands:
            exclusions.append(Exclusion(f"{sc.master.name}/{hand.value}/", near=t,
                                        radius=sc.params.grasp_exclusion_radius))
        return _StepContext(
            tms=step,
            attach=attach,
            t=t,
            master_caps=master_caps,
            master_set=CapsuleSet(master_caps + self.assist_torso),
            cable_exclusions=tuple(exclusions),
        )

    # -- constraint check ----------------------------------------------------

    def check_constraints(self, ctx: _StepContext, s_i: np.ndarray, grasp: SliderGrasp,
                          seed: np.ndarray, q_free: np.ndarray,
                          hold: CableHold | None = None):
        """IK + cable + bend + body validation of one slider placement.

        Returns (joint vector, SliderState) or a Reject reason.
        """
        sc = self.sc
        slider = make_slider_state(s_i, ctx.t, sc.gadget.slider_height)
        state = cable_state(sc.anchors.h, slider, ctx.t)

        mu_len = float(np.linalg.norm(state.mu_ts))
        lo, hi = sc.params.mu_ts_margin
        if not (lo * sc.sampling.omega <= mu_len <= hi * sc.sampling.omega):
            return Reject.MARGIN
        if bend_angle_tool(state.mu_ts, ctx.attach.rotation) >= BEND_LIMIT_DEG:
            return Reject.BEND_LIMIT
        if bend_angle_slider(state.mu_sp, slider.frame) >= BEND_LIMIT_DEG:
            return Reject.BEND_LIMIT

        slider_pose = Pose(slider.s, slider.frame)
        target = compose(slider_pose, grasp.pose)
        q = try_ik(self.assistant.arm(grasp.hand), target, seed, base=self.assistant.base,
                   rng=self.rng, tol_pos=sc.params.ik_tol_pos, tol_rot=sc.params.ik_tol_rot)
        if q is None:
            return Reject.IK_FAIL

        reason = self.validate_config(ctx, slider, state, grasp, q, q_free, hold)
        if reason is not None:
            return reason
        return q, slider

    def validate_config(self, ctx: _StepContext, slider: SliderState, state: CableState,
                        grasp: SliderGrasp, q_slider: np.ndarray, q_free: np.ndarray,
                        hold: CableHold | None = None) -> Reject | None:
        """Cable and body checks for a fully specified assistant configuration."""
        sc = self.sc
        q_left = q_slider if grasp.hand is Hand.LEFT else q_free
        q_right = q_slider if grasp.hand is Hand.RIGHT else q_free
        left = arm_capsules(self.assistant, Hand.LEFT, q_left)
        right = arm_capsules(self.assistant, Hand.RIGHT, q_right)

        exclusions = list(ctx.cable_exclusions)
        exclusions.append(Exclusion(f"{self.assistant.name}/{grasp.hand.value}/",
                                    near=slider.s + 0.5 * slider.b,
                                    radius=sc.params.grasp_exclusion_radius))
        if hold is not None:
            exclusions.append(Exclusion(f"{self.assistant.name}/{hold.hand.value}/",
                                        near=hold.grab_point,
                                        radius=sc.params.grasp_exclusion_radius))
        events = cable_collision_events(
            state, slider, ctx.t, sc.anchors.h,
            ctx.master_caps + left + right, sc.boxes,
            sc.gadget.cable_radius, sc.params.clearance, tuple(exclusions))
        if events:
            return Reject.CABLE_COLLISION

        v = any_body_violation(left, CapsuleSet(right), [], sc.params.clearance)
        if v is None:
            # master_set already carries the tool body and both torsos
            v = any_body_violation(left + right, ctx.master_set, sc.boxes, sc.params.clearance)
        return Reject.BODY_COLLISION if v is not None else None

    # -- cable hold (policy 1) -------------------------------------------------

    def find_hold(self, contexts: list[_StepContext], lo: int, hi: int,
                  grasp: SliderGrasp, q_slider: np.ndarray,
                  slider: SliderState) -> CableHold | None:
        """Free-hand grab of the source-side cable valid across [lo, hi].

        The tool (and so the slider) is static through a release interval;
        only the master arms move, so one hold configuration is checked
        against every step of the interval.
        """
        sc = self.sc
        free_hand = grasp.hand.other
        arm = self.assistant.arm(free_hand)
        q_home = self.assistant.home[free_hand]
        top = slider.top
        cable_dir = sc.anchors.h - top
        shoulder = compose(self.assistant.base, arm.joints[0].origin).position
        state = cable_state(sc.anchors.h, slider, contexts[lo].t)

        u_values = list(sc.params.cable_hold_u)
        u_values += [u / 20.0 for u in range(1, 20) if u / 20.0 not in u_values]
        for u in u_values:
            grab = top + u * cable_dir
            if np.linalg.norm(grab - shoulder) > arm.reach_radius():
                continue
            for rot in _grab_orientations(cable_dir, grab - self.assistant.base.position):
                # screening budget: many (u, rot) combos, failures must be cheap
                q = try_ik(arm, Pose(grab, rot), q_home, base=self.assistant.base,
                           rng=self.rng, tol_pos=sc.params.ik_tol_pos,
                           tol_rot=sc.params.ik_tol_rot, max_iters=100, restarts=1)
                if q is None:
                    continue
                hold = CableHold(free_hand, u, grab, q)
                if all(self.validate_config(contexts[k], slider, state, grasp,
                                            q_slider, q, hold) is None
                       for k in range(lo, hi + 1)):
                    return hold
        return None

    # -- reuse ----------------------------------------------------------------

    def is_reusable(self, prev: AMSStep, ctx: _StepContext, grasp: SliderGrasp,
                    q_free: np.ndarray) -> bool:
        """Whether holding the previous assistant configuration still satisfies
        every constraint against the new tool pose (slider frozen in place)."""
        slider = prev.slider
        state = cable_state(self.sc.anchors.h, slider, ctx.t)
        mu_len = float(np.linalg.norm(state.mu_ts))
        lo, hi = self.sc.params.mu_ts_margin
        if not (lo * self.sc.sampling.omega <= mu_len <= hi * self.sc.sampling.omega):
            return False
        if mu_len < 1e-9:
            return False
        if bend_angle_tool(state.mu_ts, ctx.attach.rotation) >= BEND_LIMIT_DEG:
            return False
        if bend_angle_slider(state.mu_sp, slider.frame) >= BEND_LIMIT_DEG:
            return False
        q = prev.joints[grasp.hand]
        return self.validate_config(ctx, slider, state, grasp, q, q_free, prev.cable_hold) is None

    # -- stitching -------------------------------------------------------------

    def stitch(self, ctx_prev: _StepContext | None, ctx: _StepContext,
               grasp: SliderGrasp, q_from: np.ndarray, q_to: np.ndarray,
               q_free: np.ndarray) -> tuple | None:
        """Gripper-pose interpolation between consecutive assistant configs.

        Substeps are spaced at most stitch_max_translation / stitch_max_rotation
        apart and each is IK-solved and re-validated; cable geometry follows the
        interpolated tool pose.  Returns the sub-config tuple or None.
        """
        sc = self.sc
        arm = self.assistant.arm(grasp.hand)
        pose_from = gripper_pose(arm, q_from, self.assistant.base)
        pose_to = gripper_pose(arm, q_to, self.assistant.base)
        trans = float(np.linalg.norm(pose_to.position - pose_from.position))
        rot = quat_rotation_between(pose_from.rotation, pose_to.rotation)
        n = max(int(math.ceil(trans / sc.params.stitch_max_translation)),
                int(math.ceil(rot / sc.params.stitch_max_rotation)))
        if n <= 1:
            return ()
        subs = []
        q_prev = q_from
        for k in range(1, n):
            u = k / n
            target = pose_interpolate(pose_from, pose_to, u)
            q = try_ik(arm, target, q_prev, base=self.assistant.base, rng=self.rng,
                       tol_pos=sc.params.ik_tol_pos, tol_rot=sc.params.ik_tol_rot)
            if q is None:
                return None
            if ctx_prev is not None:
                tool_pose = pose_interpolate(ctx_prev.tms.tool_pose, ctx.tms.tool_pose, u)
                attach = attach_frame(tool_pose, sc.anchors)
                grip = gripper_pose(arm, q, self.assistant.base)
                slider_pose = compose(grip, pose_inverse(grasp.pose))
                slider = SliderState(
                    slider_pose.position,
                    quat_rotate(slider_pose.rotation, vec3(0, 0, sc.gadget.slider_height)),
                    slider_pose.rotation)
                state = cable_state(sc.anchors.h, slider, attach.position)
                mid_ctx = replace(ctx, attach=attach, t=attach.position,
                                  tms=replace(ctx.tms, tool_pose=tool_pose))
                if self.validate_config(mid_ctx, slider, state, grasp, q, q_free) is not None:
                    return None
            else:
                # initial acquisition: body checks only, the cable is not yet managed
                left = arm_capsules(self.assistant, Hand.LEFT,
                                    q if grasp.hand is Hand.LEFT else q_free)
                right = arm_capsules(self.assistant, Hand.RIGHT,
                                     q if grasp.hand is Hand.RIGHT else q_free)
                v = any_body_violation(left, CapsuleSet(right), [], sc.params.clearance)
                if v is None:
                    v = any_body_violation(left + right, ctx.master_set, sc.boxes,
                                           sc.params.clearance)
                if v is not None:
                    return None
            subs.append(q)
            q_prev = q
        return tuple(subs)


# ---------------------------------------------------------------------------
# Main loop (Algorithm: AMS trajectory)
# ---------------------------------------------------------------------------

def slider_grasp_sequence(scenario: Scenario) -> list[SliderGrasp]:
    """reasonGrasp order: every grasp of the designated hand, then the other."""
    first = scenario.params.slider_hand
    out = []
    for hand in (first, first.other):
        for idx, pose in enumerate(scenario.slider_grasps):
            out.append(SliderGrasp(hand, idx, pose))
    return out


def plan_ams(tms: list[TMSStep], scenario: Scenario,
             rng: np.random.Generator | None = None,
             budget_s: float | None = None) -> AMSResult:
    """One assistant step per master step, or Exhausted/PlanTimeout.

    Candidate selection resumes from i_last ("keep the robot pose as much as
    possible"); a grasp switch restarts the traversal from step zero.

    In balancer mode every release interval (master not holding the tool) is
    planned as one unit: the slider freezes on a candidate whose geometry also
    admits a free-hand cable hold across the whole interval, and the chosen
    hold is attached to those steps.
    """
    sc = scenario
    if rng is None:
        rng = np.random.default_rng(sc.params.seed)
    budget = budget_s if budget_s is not None else sc.params.budget_s
    deadline = time.monotonic() + budget

    planner = AmsPlanner(sc, rng, deadline)
    if not tms:
        return AMSResult([], slider_grasp_sequence(sc)[0], planner.tallies)

    contexts = [planner.step_context(step) for step in tms]
    n = sc.sampling.n_candidates

    from .cable import GadgetKind
    intervals = release_intervals(tms) if sc.gadget.kind is GadgetKind.BALANCER else []
    interval_start = {lo: hi for lo, hi in intervals}

    for grasp in slider_grasp_sequence(sc):
        steps = _plan_with_grasp(planner, contexts, grasp, n, interval_start)
        if steps is not None:
            return AMSResult(steps, grasp, planner.tallies)
    raise Exhausted("all slider grasps failed")


def _plan_with_grasp(planner: AmsPlanner, contexts: list[_StepContext],
                     grasp: SliderGrasp, n: int,
                     interval_start: dict) -> list[AMSStep] | None:
    sc = planner.sc
    q_free = planner.assistant.home[grasp.hand.other]
    q_home = planner.assistant.home[grasp.hand]
    i_last = 0
    steps: list[AMSStep] = []
    prev: AMSStep | None = None
    l = 0

    while l < len(contexts):
        _deadline_guard(planner.deadline)
        ctx = contexts[l]
        candidates = candidate_positions(ctx.attach, sc.sampling)
        hold_until = interval_start.get(l)
        found = None
        seed = prev.joints[grasp.hand] if prev is not None else q_home
        for i in candidate_order(i_last, n):
            res = planner.check_constraints(ctx, candidates[i][1], grasp, seed, q_free)
            if isinstance(res, Reject):
                planner.tallies[res.value] += 1
                continue
            q, slider = res
            hold = None
            if hold_until is not None:
                hold = planner.find_hold(contexts, l, hold_until, grasp, q, slider)
                if hold is None:
                    planner.tallies[Reject.HOLD_INFEASIBLE.value] += 1
                    continue
            stitch = planner.stitch(contexts[l - 1] if prev is not None else None,
                                    ctx, grasp,
                                    prev.joints[grasp.hand] if prev is not None else q_home,
                                    q, q_free)
            if stitch is None:
                planner.tallies[Reject.STITCH.value] += 1
                continue
            found = (i, q, slider, stitch, hold)
            break

        if found is None:
            reusable = (prev is not None and hold_until is None
                        and planner.is_reusable(prev, ctx, grasp, q_free))
            if reusable:
                prev = replace(prev, index=l, reused=True, stitch=())
                steps.append(prev)
                l += 1
                continue
            return None   # reasonGrasp: restart whole traversal with next grasp

        i, q, slider, stitch, hold = found
        i_last = i
        if hold_until is None:
            prev = AMSStep(
                index=l,
                joints={grasp.hand: q, grasp.hand.other: q_free},
                candidate_index=i,
                slider=slider,
                slider_pose=Pose(slider.s, slider.frame),
                stitch=stitch,
            )
            steps.append(prev)
            l += 1
        else:
            # emit the whole release interval with a frozen slider and the hold
            for k in range(l, hold_until + 1):
                prev = AMSStep(
                    index=k,
                    joints={grasp.hand: q, grasp.hand.other: hold.joints},
                    candidate_index=i,
                    slider=slider,
                    slider_pose=Pose(slider.s, slider.frame),
                    stitch=stitch if k == l else (),
                    cable_hold=hold,
                )
                steps.append(prev)
            l = hold_until + 1
    return steps


# ---------------------------------------------------------------------------
# Policy 1: cable hold during placement (balancer)
# ---------------------------------------------------------------------------

def release_intervals(tms: list[TMSStep]) -> list[tuple[int, int]]:
    """Index ranges [release, regrasp] during which no master hand holds
    the tool; a trailing release extends to the final step."""
    out = []
    start = None
    for step in tms:
        if step.action is TmsAction.RELEASE:
            start = step.index
        elif start is not None and step.action in (TmsAction.REGRASP, TmsAction.HANDOVER_TAKE):
            out.append((start, step.index))
            start = None
    if start is not None:
        out.append((start, tms[-1].index))
    return out


def _grab_orientations(cable_dir: np.ndarray, from_side: np.ndarray) -> list[np.ndarray]:
    """Gripper rotations pinching the cable: fingers across it, any roll.

    The nominal approach points outward from the robot, orthogonalized against
    the cable; rolls about the cable axis give the solver freedom when the
    arm is near full extension.
    """
    from .geometry import quat_from_axis_angle, quat_multiply

    c = cable_dir / np.linalg.norm(cable_dir)
    w = from_side - np.dot(from_side, c) * c
    if np.linalg.norm(w) < 1e-9:
        w = np.cross(c, vec3(0, 0, 1))
    z = w / np.linalg.norm(w)
    out = []
    for roll_deg in (0.0, 25.0, -25.0, 50.0, -50.0, 75.0, -75.0):
        spin = quat_from_axis_angle(c, math.radians(roll_deg))
        for x_axis in (c, -c):
            y = np.cross(z, x_axis)
            base = quat_from_matrix(np.column_stack([x_axis, y, z]))
            out.append(quat_multiply(spin, base))
    return out


def plan_cable_hold(tms: list[TMSStep], result: AMSResult, scenario: Scenario,
                    rng: np.random.Generator | None = None,
                    budget_s: float | None = None) -> list[AMSStep]:
    """Attach grab and retreat motions to the holds chosen during planning.

    plan_ams already selected, per release interval, a grab point at parameter
    u along the slider-top -> source segment (u=0 at the slider top, u=1 at
    the source) jointly with the slider candidate.  This pass connects the
    free hand from home to each grab configuration and back with the shared
    RRT connector, validated against the interval's boundary steps.
    """
    sc = scenario
    ams = result.steps
    if rng is None:
        rng = np.random.default_rng(sc.params.seed + 1)
    budget = budget_s if budget_s is not None else sc.params.budget_s
    deadline = time.monotonic() + budget
    planner = AmsPlanner(sc, rng, deadline)

    intervals = release_intervals(tms)
    if not intervals:
        return list(ams)

    out = list(ams)
    slider_hand = result.slider_grasp.hand
    q_home = sc.assistant.home[slider_hand.other]

    for lo, hi in intervals:
        _deadline_guard(deadline)
        hold = ams[lo].cable_hold
        if hold is None:
            raise NoGrabPoint(f"release interval [{lo}, {hi}] carries no hold")
        approach = _hold_motion(planner, tms, ams, max(0, lo - 1), hold,
                                q_home, hold.joints, slider_hand, sc)
        retreat = _hold_motion(planner, tms, ams, min(hi, len(tms) - 1), hold,
                               hold.joints, q_home, slider_hand, sc)
        if approach is None or retreat is None:
            raise RrtFail(f"cable grab motion failed for interval [{lo}, {hi}]")
        out[lo] = replace(out[lo], cable_hold=replace(out[lo].cable_hold,
                                                      approach=tuple(approach)))
        out[hi] = replace(out[hi], cable_hold=replace(out[hi].cable_hold,
                                                      retreat=tuple(retreat)))
    return out


def _hold_motion(planner: AmsPlanner, tms, ams, step_index: int, hold: CableHold,
                 q_from: np.ndarray, q_to: np.ndarray, slider_hand: Hand, sc: Scenario):
    """RRT for the free hand between home and the grab configuration."""
    ctx = planner.step_context(tms[step_index])
    q_slider = ams[step_index].joints[slider_hand]
    slider = ams[step_index].slider
    state = cable_state(sc.anchors.h, slider, ctx.t)
    arm = sc.assistant.arm(hold.hand)
    grasp = SliderGrasp(slider_hand, -1, Pose.identity())

    def is_valid(q):
        return planner.validate_config(ctx, slider, state, grasp, q_slider, q,
                                       hold) is None

    waypoints = rrt_connect(arm, q_from, q_to, is_valid, planner.rng,
                            step=sc.params.rrt_step, max_iters=sc.params.rrt_max_iters,
                            check_step=sc.params.joint_step)
    if waypoints is None:
        return None
    return discretize_waypoints(waypoints, sc.params.joint_step)


# ---------------------------------------------------------------------------
# Policy 2: pulley length control
# ---------------------------------------------------------------------------

def attach_pulley_commands(ams: list[AMSStep], tms: list[TMSStep],
                           scenario: Scenario) -> list[AMSStep]:
    """Track the outside cable length stepwise and attach motor commands.

    A command attached to step l executes before that step's motion, bringing
    the outside length to exactly the required length, so after application
    every step satisfies |required - outside| <= threshold.
    """
    sc = scenario
    out = []
    outside = sc.gadget.outside_length
    for step, tms_step in zip(ams, tms):
        attach = attach_frame(tms_step.tool_pose, sc.anchors)
        state = cable_state(sc.anchors.h, step.slider, attach.position)
        required = required_cable_length(state)
        cmd = pulley_adjust(outside, required, sc.gadget.threshold)
        if cmd is not None:
            outside = cmd.apply(outside)
        out.append(replace(step, pulley_command=cmd, outside_length=outside))
    return out
