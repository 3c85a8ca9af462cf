"""Master-robot task planning: regrasp graph search and motion realization.

The tool is moved through a graph whose nodes are (pose, grasp) pairs plus a
"placed" node per stable pose.  Picks and places route through placed nodes;
hand changes happen either there (place, re-pick) or at the in-air handover
pose where both grippers hold the tool for one instant.  The cable is
deliberately ignored here; the assistant planner deals with it afterwards.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import networkx as nx
import numpy as np

from .bodies import (
    arm_capsules,
    grasp_gripper_pose,
    hand_capsule_name,
    tool_capsule,
    tool_pose_from_gripper,
    torso_capsules,
)
from .cable import (
    Exclusion,
    attach_frame,
    attach_point,
    cable_collision_events,
    cable_state,
    rest_slider_state,
)
from .collision import CapsuleSet, NamedCapsule, any_body_violation
from .geometry import Pose, compose, vec3
from .kinematics import Hand, gripper_pose, linear_joint_motion, try_ik
from .motion import discretize_waypoints, rrt_connect, validate_linear
from .scenario import Grasp, Scenario


class PlanFailure(Exception):
    pass


class EmptyGraph(PlanFailure):
    pass


class NoPath(PlanFailure):
    pass


class PlanTimeout(PlanFailure):
    pass


class TmsAction(str, Enum):
    TRANSIT = "transit"
    TRANSFER = "transfer"
    RELEASE = "release"
    REGRASP = "regrasp"
    HANDOVER_GIVE = "handover_give"
    HANDOVER_TAKE = "handover_take"


@dataclass(frozen=True, eq=False)
class TMSStep:
    index: int
    tool_pose: Pose
    joints: dict              # Hand -> joint vector (master robot)
    action: TmsAction
    grasp_hands: tuple[Hand, ...]
    grasp_index: int | None   # grasp in effect (carrying) or being acquired

    @property
    def holding(self) -> bool:
        return len(self.grasp_hands) > 0


PLACED = "placed"
GRASP = "grasp"


def _pose_key(kind: str, ident) -> str:
    return f"{kind}:{ident}"


class MasterValidator:
    """Collision validity of a full master configuration.

    Checks master arms against each other, both torsos, the environment, and
    the tool; hands listed in ``exclude_hand_tool`` skip their hand-capsule
    versus tool pair (they are grasping or closing in on it).
    """

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.master = scenario.master
        self.static = CapsuleSet(torso_capsules(scenario.master) + torso_capsules(scenario.assistant))
        self.boxes = scenario.boxes
        self.clearance = scenario.params.clearance

    def violation(self, q_left, q_right, tool_pose: Pose | None,
                  exclude_hand_tool: tuple[Hand, ...] = ()):
        left = arm_capsules(self.master, Hand.LEFT, q_left)
        right = arm_capsules(self.master, Hand.RIGHT, q_right)
        v = any_body_violation(left, CapsuleSet(right), [], self.clearance)
        if v:
            return v
        v = any_body_violation(left + right, self.static, self.boxes, self.clearance)
        if v:
            return v
        if tool_pose is not None:
            tool = tool_capsule(self.sc.tool, tool_pose)
            excluded = {hand_capsule_name(self.master, h) for h in exclude_hand_tool}
            arms = [c for c in left + right if c.name not in excluded]
            v = any_body_violation([tool], CapsuleSet(arms), self.boxes, self.clearance)
            if v:
                return v
            v = any_body_violation([tool], self.static, [], self.clearance)
            if v:
                return v
        return None

    def ok(self, q_left, q_right, tool_pose, exclude_hand_tool=()) -> bool:
        return self.violation(q_left, q_right, tool_pose, exclude_hand_tool) is None


@dataclass(eq=False)
class RegraspGraph:
    graph: nx.Graph
    stable_poses: dict[str, Pose]     # pose key -> tool pose (placeable)
    handover_key: str
    poses: dict[str, Pose]            # all pose keys

    def grasp_nodes(self, pose_key: str):
        return [n for n in self.graph.nodes if n[0] == GRASP and n[1] == pose_key]


def _deadline_guard(deadline: float):
    if time.monotonic() > deadline:
        raise PlanTimeout("planning budget exhausted")


def build_regrasp_graph(scenario: Scenario, rng: np.random.Generator,
                        deadline: float = math.inf) -> RegraspGraph:
    """Screen every (pose, grasp) pair with IK + collision and wire the graph.

    Nodes keep the solved joint vector; edges: placed<->grasp at stable poses
    (pick/place), grasp-grasp transfers sharing a grasp, and hand-changing
    handover pairs that are simultaneously collision-free.
    """
    sc = scenario
    validator = MasterValidator(sc)
    master = sc.master

    stable: dict[str, Pose] = {_pose_key("start", ""): sc.start_pose}
    for gid, pose in sc.goals.items():
        stable[_pose_key("goal", gid)] = pose
    for i, pose in enumerate(sc.placements):
        stable[_pose_key("placement", i)] = pose
    handover_key = _pose_key("handover", "")
    poses = dict(stable)
    poses[handover_key] = sc.handover_pose

    g = nx.Graph()
    for key in stable:
        g.add_node((PLACED, key))

    for key, pose in poses.items():
        _deadline_guard(deadline)
        for grasp in sc.tool.grasps:
            arm = master.arm(grasp.hand)
            target = grasp_gripper_pose(pose, grasp)
            # screening only: infeasible pairs should fail fast, realization re-seeds
            q = try_ik(arm, target, master.home[grasp.hand], base=master.base, rng=rng,
                       tol_pos=sc.params.ik_tol_pos, tol_rot=sc.params.ik_tol_rot,
                       max_iters=120, restarts=2)
            if q is None:
                continue
            q_other = master.home[grasp.hand.other]
            q_left, q_right = (q, q_other) if grasp.hand is Hand.LEFT else (q_other, q)
            if not validator.ok(q_left, q_right, pose, exclude_hand_tool=(grasp.hand,)):
                continue
            node = (GRASP, key, grasp.index)
            g.add_node(node, q=q, grasp=grasp, pose_key=key)
            if key in stable:
                g.add_edge((PLACED, key), node, w=1.0, kind="pick")

    if not any(n[0] == GRASP for n in g.nodes):
        raise EmptyGraph("no IK-feasible collision-free grasp node")

    # transfers: same grasp, different pose
    by_grasp: dict[int, list] = {}
    for n in g.nodes:
        if n[0] == GRASP:
            by_grasp.setdefault(n[2], []).append(n)
    for nodes in by_grasp.values():
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                qa = g.nodes[nodes[i]]["q"]
                qb = g.nodes[nodes[j]]["q"]
                w = 1.0 + 1e-3 * float(np.sum(np.abs(qa - qb)))
                g.add_edge(nodes[i], nodes[j], w=w, kind="transfer")

    # handover: both hands hold at the in-air pose, checked jointly
    h_nodes = [n for n in g.nodes if n[0] == GRASP and n[1] == handover_key]
    for i in range(len(h_nodes)):
        for j in range(i + 1, len(h_nodes)):
            ga: Grasp = g.nodes[h_nodes[i]]["grasp"]
            gb: Grasp = g.nodes[h_nodes[j]]["grasp"]
            if ga.hand is gb.hand:
                continue
            qa = g.nodes[h_nodes[i]]["q"]
            qb = g.nodes[h_nodes[j]]["q"]
            q_left, q_right = (qa, qb) if ga.hand is Hand.LEFT else (qb, qa)
            if validator.ok(q_left, q_right, sc.handover_pose,
                            exclude_hand_tool=(Hand.LEFT, Hand.RIGHT)):
                g.add_edge(h_nodes[i], h_nodes[j], w=1.0, kind="handover")

    return RegraspGraph(graph=g, stable_poses=stable, handover_key=handover_key, poses=poses)


class _RealizeError(Exception):
    """One graph edge failed motion realization; caller removes it and replans."""

    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge} not realizable")


@dataclass
class _MasterState:
    q: dict                      # Hand -> joint vector
    tool_pose: Pose
    holding: Grasp | None


class _TmsRealizer:
    def __init__(self, scenario: Scenario, rng: np.random.Generator, deadline: float):
        self.sc = scenario
        self.rng = rng
        self.deadline = deadline
        self.validator = MasterValidator(scenario)
        self.master = scenario.master
        self.steps: list[TMSStep] = []
        self.params = scenario.params

    # -- step emission ------------------------------------------------------

    def _emit(self, state: _MasterState, action: TmsAction, grasp_index=None):
        hands = (state.holding.hand,) if state.holding else ()
        self.steps.append(TMSStep(
            index=len(self.steps),
            tool_pose=state.tool_pose,
            joints={Hand.LEFT: state.q[Hand.LEFT].copy(), Hand.RIGHT: state.q[Hand.RIGHT].copy()},
            action=action,
            grasp_hands=hands,
            grasp_index=grasp_index if grasp_index is not None else (
                state.holding.index if state.holding else None),
        ))

    def _emit_handover_instant(self, state: _MasterState, action: TmsAction, hands, grasp_index):
        self.steps.append(TMSStep(
            index=len(self.steps),
            tool_pose=state.tool_pose,
            joints={Hand.LEFT: state.q[Hand.LEFT].copy(), Hand.RIGHT: state.q[Hand.RIGHT].copy()},
            action=action,
            grasp_hands=hands,
            grasp_index=grasp_index,
        ))

    # -- motion helpers -----------------------------------------------------

    def _arm_motion(self, state: _MasterState, hand: Hand, q_to: np.ndarray,
                    tool_attached: bool, edge, exclude_hand_tool=(), allow_rrt=True):
        """Move one arm; emit a step per waypoint.  Tool rides the gripper when attached."""
        _deadline_guard(self.deadline)
        arm = self.master.arm(hand)
        q_from = state.q[hand]
        grasp = state.holding

        def config_valid(q):
            q_left = q if hand is Hand.LEFT else state.q[Hand.LEFT]
            q_right = q if hand is Hand.RIGHT else state.q[Hand.RIGHT]
            if tool_attached:
                tool_pose = tool_pose_from_gripper(
                    gripper_pose(arm, q, self.master.base), grasp)
            else:
                tool_pose = state.tool_pose
            return self.validator.ok(q_left, q_right, tool_pose, exclude_hand_tool)

        path = validate_linear(q_from, q_to, self.params.joint_step, config_valid)
        if path is None and allow_rrt:
            _deadline_guard(self.deadline)
            waypoints = rrt_connect(arm, q_from, q_to, config_valid, self.rng,
                                    step=self.params.rrt_step,
                                    max_iters=self.params.rrt_max_iters,
                                    check_step=self.params.joint_step)
            if waypoints is not None:
                path = discretize_waypoints(waypoints, self.params.joint_step)
        if path is None:
            raise _RealizeError(edge)

        action = TmsAction.TRANSFER if tool_attached else TmsAction.TRANSIT
        for q in path[1:]:
            state.q = dict(state.q)
            state.q[hand] = q
            if tool_attached:
                state.tool_pose = tool_pose_from_gripper(
                    gripper_pose(arm, q, self.master.base), grasp)
            self._emit(state, action)
        return state

    def _ik_or_fail(self, hand: Hand, target: Pose, seed, edge):
        q = try_ik(self.master.arm(hand), target, seed, base=self.master.base, rng=self.rng,
                   tol_pos=self.params.ik_tol_pos, tol_rot=self.params.ik_tol_rot)
        if q is None:
            raise _RealizeError(edge)
        return q

    def _pregrasp(self, grip: Pose) -> Pose:
        return compose(grip, Pose(vec3(0, 0, -self.params.approach_standoff)))

    # -- edge realizations ---------------------------------------------------

    def pick(self, state: _MasterState, pose_key: str, grasp: Grasp, q_grasp, edge):
        grip = grasp_gripper_pose(state.tool_pose, grasp)
        q_pre = self._ik_or_fail(grasp.hand, self._pregrasp(grip), q_grasp, edge)
        state = self._arm_motion(state, grasp.hand, q_pre, tool_attached=False, edge=edge)
        state = self._arm_motion(state, grasp.hand, q_grasp, tool_attached=False, edge=edge,
                                 exclude_hand_tool=(grasp.hand,), allow_rrt=False)
        state.holding = grasp
        self._emit(state, TmsAction.REGRASP)
        return state

    def place(self, state: _MasterState, edge):
        grasp = state.holding
        state.holding = None
        self._emit(state, TmsAction.RELEASE)
        grip = grasp_gripper_pose(state.tool_pose, grasp)
        q_pre = self._ik_or_fail(grasp.hand, self._pregrasp(grip), state.q[grasp.hand], edge)
        state = self._arm_motion(state, grasp.hand, q_pre, tool_attached=False, edge=edge,
                                 exclude_hand_tool=(grasp.hand,), allow_rrt=False)
        state = self._arm_motion(state, grasp.hand, self.master.home[grasp.hand],
                                 tool_attached=False, edge=edge)
        return state

    def transfer(self, state: _MasterState, target_pose: Pose, q_target, edge):
        grasp = state.holding
        hand = grasp.hand
        lift = vec3(0, 0, self.params.lift_height)
        lifted_from = Pose(state.tool_pose.position + lift, state.tool_pose.rotation)
        lifted_to = Pose(target_pose.position + lift, target_pose.rotation)
        q1 = self._ik_or_fail(hand, grasp_gripper_pose(lifted_from, grasp), state.q[hand], edge)
        state = self._arm_motion(state, hand, q1, tool_attached=True, edge=edge,
                                 exclude_hand_tool=(hand,), allow_rrt=False)
        q2 = self._ik_or_fail(hand, grasp_gripper_pose(lifted_to, grasp), q1, edge)
        state = self._arm_motion(state, hand, q2, tool_attached=True, edge=edge,
                                 exclude_hand_tool=(hand,))
        state = self._arm_motion(state, hand, q_target, tool_attached=True, edge=edge,
                                 exclude_hand_tool=(hand,), allow_rrt=False)
        state.tool_pose = target_pose
        return state

    def handover(self, state: _MasterState, grasp_to: Grasp, q_to, edge):
        giver = state.holding
        taker_hand = grasp_to.hand
        grip_to = grasp_gripper_pose(state.tool_pose, grasp_to)
        q_pre = self._ik_or_fail(taker_hand, self._pregrasp(grip_to), q_to, edge)
        state = self._arm_motion(state, taker_hand, q_pre, tool_attached=False, edge=edge)
        state = self._arm_motion(state, taker_hand, q_to, tool_attached=False, edge=edge,
                                 exclude_hand_tool=(taker_hand,), allow_rrt=False)
        self._emit_handover_instant(state, TmsAction.HANDOVER_TAKE,
                                    (giver.hand, taker_hand), grasp_to.index)
        state.holding = grasp_to
        self._emit_handover_instant(state, TmsAction.HANDOVER_GIVE,
                                    (taker_hand,), grasp_to.index)
        # giver retreats to its pregrasp, then home
        grip_from = grasp_gripper_pose(state.tool_pose, giver)
        q_back = self._ik_or_fail(giver.hand, self._pregrasp(grip_from), state.q[giver.hand], edge)
        state = self._arm_motion(state, giver.hand, q_back, tool_attached=False, edge=edge,
                                 exclude_hand_tool=(giver.hand,), allow_rrt=False)
        state = self._arm_motion(state, giver.hand, self.master.home[giver.hand],
                                 tool_attached=False, edge=edge)
        return state


def plan_tms(scenario: Scenario, goal_sequence, rng: np.random.Generator | None = None,
             budget_s: float | None = None,
             graph: RegraspGraph | None = None) -> list[TMSStep]:
    """Plan the full pick/transfer/place (and handover) sequence through the goals.

    Shortest paths are by hop count with a joint-length tie-break; an edge
    whose motion cannot be realized (straight interpolation and RRT both
    fail) is dropped from the graph and the leg is re-planned.
    """
    sc = scenario
    if rng is None:
        rng = np.random.default_rng(sc.params.seed)
    budget = budget_s if budget_s is not None else sc.params.budget_s
    deadline = time.monotonic() + budget

    if graph is None:
        graph = build_regrasp_graph(sc, rng, deadline)
    g = graph.graph.copy()

    realizer = _TmsRealizer(sc, rng, deadline)
    state = _MasterState(
        q={Hand.LEFT: sc.master.home[Hand.LEFT].copy(), Hand.RIGHT: sc.master.home[Hand.RIGHT].copy()},
        tool_pose=sc.start_pose,
        holding=None,
    )

    current_key = _pose_key("start", "")
    for goal_id in goal_sequence:
        target_key = _pose_key("goal", goal_id) if goal_id != "start" else current_key
        if target_key not in graph.stable_poses:
            raise NoPath(f"goal {goal_id} has no stable pose")
        state = _plan_leg(realizer, g, graph, state, current_key, target_key)
        current_key = target_key
    return realizer.steps


def _plan_leg(realizer: _TmsRealizer, g: nx.Graph, graph: RegraspGraph,
              state: _MasterState, from_key: str, to_key: str) -> _MasterState:
    source = (PLACED, from_key)
    target = (PLACED, to_key)

    if from_key == to_key:
        # degenerate leg: pick and place back at the same pose
        picks = [n for n in g.neighbors(source) if n[0] == GRASP]
        if not picks:
            raise NoPath(f"no feasible grasp at {from_key}")
        node = picks[0]
        edge = (source, node)
        saved = _snapshot(realizer, state)
        try:
            st = realizer.pick(state, from_key, g.nodes[node]["grasp"], g.nodes[node]["q"], edge)
            st = realizer.place(st, edge)
            return st
        except _RealizeError:
            _restore(realizer, saved)
            raise NoPath(f"cannot pick and place at {from_key}")

    while True:
        _deadline_guard(realizer.deadline)
        try:
            path = nx.shortest_path(g, source, target, weight="w")
        except (nx.NetworkXNoPath, nx.NodeNotFound):
            raise NoPath(f"no regrasp path from {from_key} to {to_key}") from None
        saved = _snapshot(realizer, state)
        try:
            return _realize_path(realizer, g, graph, state, path)
        except _RealizeError as exc:
            state = _restore(realizer, saved)
            if g.has_edge(*exc.edge):
                g.remove_edge(*exc.edge)
            else:
                raise NoPath(f"unrealizable path from {from_key} to {to_key}") from exc


def _snapshot(realizer: _TmsRealizer, state: _MasterState):
    return (len(realizer.steps),
            _MasterState(q=dict(state.q), tool_pose=state.tool_pose, holding=state.holding))


def _restore(realizer: _TmsRealizer, saved) -> _MasterState:
    n, state = saved
    del realizer.steps[n:]
    return state


def _realize_path(realizer: _TmsRealizer, g: nx.Graph, graph: RegraspGraph,
                  state: _MasterState, path) -> _MasterState:
    for a, b in zip(path, path[1:]):
        edge = (a, b)
        if a[0] == PLACED and b[0] == GRASP:
            state = realizer.pick(state, b[1], g.nodes[b]["grasp"], g.nodes[b]["q"], edge)
        elif a[0] == GRASP and b[0] == PLACED:
            state = realizer.place(state, edge)
        elif a[0] == GRASP and b[0] == GRASP:
            kind = g.edges[edge]["kind"]
            if kind == "transfer":
                state = realizer.transfer(state, graph.poses[b[1]], g.nodes[b]["q"], edge)
            else:
                state = realizer.handover(state, g.nodes[b]["grasp"], g.nodes[b]["q"], edge)
        else:
            raise _RealizeError(edge)
    return state


# ---------------------------------------------------------------------------
# Cable audit: what the cable would do with nobody helping
# ---------------------------------------------------------------------------

def cable_audit(tms: list[TMSStep], scenario: Scenario) -> list[list]:
    """Per-step cable collision events with the slider at rest and no assistant.

    The cable runs tool -> rest slider -> source.  Master link capsules and
    the environment participate; the grasping hand is excluded near the
    attach point, and the tool body never counts against its own cable.
    """
    sc = scenario
    slider = rest_slider_state(sc.anchors, sc.gadget.slider_height)
    torso = torso_capsules(sc.master)
    out: list[list] = []
    for step in tms:
        t = attach_point(step.tool_pose, sc.anchors)
        state = cable_state(sc.anchors.h, slider, t)
        capsules = (arm_capsules(sc.master, Hand.LEFT, step.joints[Hand.LEFT])
                    + arm_capsules(sc.master, Hand.RIGHT, step.joints[Hand.RIGHT])
                    + torso
                    + [tool_capsule(sc.tool, step.tool_pose)])
        exclusions = [Exclusion("tool")]
        for hand in step.grasp_hands:
            exclusions.append(Exclusion(f"{sc.master.name}/{hand.value}/", near=t,
                                        radius=sc.params.grasp_exclusion_radius))
        events = cable_collision_events(
            state, slider, t, sc.anchors.h, capsules, sc.boxes,
            sc.gadget.cable_radius, sc.params.clearance, tuple(exclusions))
        out.append(events)
    return out


def count_events(per_step_events: list[list]) -> int:
    return sum(len(ev) for ev in per_step_events)
