"""Joint-space motion validation and a bidirectional RRT connector.

The same connector backs regrasp transit/transfer motions that fail straight
interpolation and the cable-grab approach of the assistant's free hand.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .kinematics import ArmModel, linear_joint_motion

Validator = Callable[[np.ndarray], bool]


def validate_linear(q0: np.ndarray, q1: np.ndarray, step: float, is_valid: Validator) -> list[np.ndarray] | None:
    """Discretized straight joint motion, or None when any waypoint fails."""
    path = linear_joint_motion(q0, q1, step)
    for q in path:
        if not is_valid(q):
            return None
    return path


def _steer(q_from: np.ndarray, q_to: np.ndarray, step: float) -> np.ndarray:
    span = float(np.max(np.abs(q_to - q_from)))
    if span <= step:
        return q_to.copy()
    return q_from + (step / span) * (q_to - q_from)


def _edge_valid(q0: np.ndarray, q1: np.ndarray, step: float, is_valid: Validator) -> bool:
    span = float(np.max(np.abs(q1 - q0)))
    n = max(1, int(math.ceil(span / step)))
    for k in range(1, n + 1):
        if not is_valid(q0 + (k / n) * (q1 - q0)):
            return False
    return True


def rrt_connect(arm: ArmModel,
                q_start: np.ndarray,
                q_goal: np.ndarray,
                is_valid: Validator,
                rng: np.random.Generator,
                step: float = 0.2,
                max_iters: int = 3000,
                check_step: float = 0.05) -> list[np.ndarray] | None:
    """Bidirectional RRT between two valid configurations.

    Returns a waypoint list from q_start to q_goal (endpoints included) or
    None when the iteration budget runs out.  Waypoints are shortcut-smoothed
    but not re-discretized; interpolate with linear_joint_motion for execution.
    """
    if not is_valid(q_start) or not is_valid(q_goal):
        return None
    if _edge_valid(q_start, q_goal, check_step, is_valid):
        return [q_start.copy(), q_goal.copy()]

    lower = arm.lower_limits
    upper = arm.upper_limits
    tree_a: list[tuple[np.ndarray, int]] = [(q_start.copy(), -1)]
    tree_b: list[tuple[np.ndarray, int]] = [(q_goal.copy(), -1)]
    swapped = False

    def nearest(tree, q):
        dists = [float(np.max(np.abs(node[0] - q))) for node in tree]
        return int(np.argmin(dists))

    def extend(tree, q_target):
        idx = nearest(tree, q_target)
        q_new = _steer(tree[idx][0], q_target, step)
        if _edge_valid(tree[idx][0], q_new, check_step, is_valid):
            tree.append((q_new, idx))
            return len(tree) - 1
        return -1

    def connect(tree, q_target):
        while True:
            idx = extend(tree, q_target)
            if idx < 0:
                return -1
            if np.max(np.abs(tree[idx][0] - q_target)) < 1e-9:
                return idx

    def backtrack(tree, idx):
        out = []
        while idx >= 0:
            out.append(tree[idx][0])
            idx = tree[idx][1]
        return out[::-1]

    for _ in range(max_iters):
        q_rand = lower + rng.random(len(lower)) * (upper - lower)
        idx_a = extend(tree_a, q_rand)
        if idx_a >= 0:
            idx_b = connect(tree_b, tree_a[idx_a][0])
            if idx_b >= 0:
                part_a = backtrack(tree_a, idx_a)
                part_b = backtrack(tree_b, idx_b)
                path = part_a + part_b[::-1][1:]
                if swapped:
                    path = path[::-1]
                return _shortcut(path, check_step, is_valid, rng)
        tree_a, tree_b = tree_b, tree_a
        swapped = not swapped
    return None


def _shortcut(path: list[np.ndarray], step: float, is_valid: Validator,
              rng: np.random.Generator, attempts: int = 60) -> list[np.ndarray]:
    path = [q.copy() for q in path]
    for _ in range(attempts):
        if len(path) < 3:
            break
        i = int(rng.integers(0, len(path) - 2))
        j = int(rng.integers(i + 2, len(path)))
        if _edge_valid(path[i], path[j], step, is_valid):
            path = path[: i + 1] + path[j:]
    return path


def discretize_waypoints(waypoints: list[np.ndarray], step: float) -> list[np.ndarray]:
    """Concatenate per-edge linear interpolations, deduplicating joints."""
    out: list[np.ndarray] = []
    for q0, q1 in zip(waypoints, waypoints[1:]):
        seg = linear_joint_motion(q0, q1, step)
        if out:
            seg = seg[1:]
        out.extend(seg)
    if not out:
        out = [waypoints[0].copy()]
    return out
