"""Taut-cable model: gadget state, slider state, segment vectors, bends.

The cable is two straight segments split by the slider: tool attach point to
slider bottom, and slider top to the cable source.  A balancer keeps the
cable tensioned mechanically; a motorized pulley tracks the outside length
and winds or unwinds when the required length drifts past a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .collision import CapsuleSet, NamedBox, NamedCapsule, segment_box_violations
from .geometry import (
    Pose,
    Segment,
    ZeroVectorError,
    closest_point_on_segment,
    normalized,
    quat_from_matrix,
    quat_rotate,
    transform_direction,
    transform_point,
    vec3,
)


class GadgetKind(str, Enum):
    BALANCER = "balancer"
    PULLEY = "pulley"


@dataclass(frozen=True)
class GadgetConfig:
    kind: GadgetKind
    cable_radius: float = 0.004
    slider_height: float = 0.05
    outside_length: float = 0.0     # pulley only: initial cable outside the housing
    threshold: float = 0.05         # pulley only: adjustment deadband, m

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("pulley threshold must be positive")
        if self.outside_length < 0:
            raise ValueError("outside length must be non-negative")


@dataclass(frozen=True)
class CableAnchors:
    h: np.ndarray                       # cable source, world, m
    tool_attach_local: np.ndarray       # attach point in tool frame
    tool_attach_normal_local: np.ndarray  # unit normal of the attach surface
    slider_rest: np.ndarray             # unattended slider bottom, world, m


@dataclass(frozen=True)
class SliderState:
    s: np.ndarray          # slider bottom, world
    b: np.ndarray          # bottom-to-top offset, world, |b| = slider height
    frame: np.ndarray      # slider local frame, unit quaternion

    @property
    def top(self) -> np.ndarray:
        return self.s + self.b


@dataclass(frozen=True)
class CableState:
    mu_ts: np.ndarray      # tool -> slider bottom
    mu_sp: np.ndarray      # slider top -> source (h - s + b form)


def segment_tool_slider(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Cable segment vector from the tool attach point to the slider bottom."""
    return np.asarray(s, dtype=float) - np.asarray(t, dtype=float)


def segment_slider_source(h: np.ndarray, s: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cable segment vector from the slider top toward the source."""
    return np.asarray(h, dtype=float) - np.asarray(s, dtype=float) + np.asarray(b, dtype=float)


def cable_state(h: np.ndarray, slider: SliderState, t: np.ndarray) -> CableState:
    return CableState(segment_tool_slider(slider.s, t),
                      segment_slider_source(h, slider.s, slider.b))


def attach_point(tool_pose: Pose, anchors: CableAnchors) -> np.ndarray:
    """World position where the cable attaches to the tool."""
    return transform_point(tool_pose, anchors.tool_attach_local)


def attach_frame(tool_pose: Pose, anchors: CableAnchors) -> Pose:
    """Tool-local cable frame: origin at the attach point, z along the surface normal.

    When the configured normal is the tool frame's own z axis the frame shares
    the tool rotation exactly; otherwise the remaining axes are orthonormalized
    from the tool's x axis.
    """
    origin = attach_point(tool_pose, anchors)
    n_local = np.asarray(anchors.tool_attach_normal_local, dtype=float)
    if np.allclose(n_local, [0.0, 0.0, 1.0], atol=1e-12):
        return Pose(origin, tool_pose.rotation)
    z = normalized(transform_direction(tool_pose, n_local))
    x_try = transform_direction(tool_pose, vec3(1, 0, 0))
    x = x_try - np.dot(x_try, z) * z
    if np.linalg.norm(x) < 1e-9:
        x_try = transform_direction(tool_pose, vec3(0, 1, 0))
        x = x_try - np.dot(x_try, z) * z
    x = normalized(x)
    y = np.cross(z, x)
    return Pose(origin, quat_from_matrix(np.column_stack([x, y, z])))


def slider_frame(mu_ts: np.ndarray) -> np.ndarray:
    """Slider orientation: z continues the tool-side segment through the slider.

    x is the world z axis Gram-Schmidt-orthonormalized against z (world x when
    the two are parallel), y completes the right-handed frame.
    """
    z = normalized(np.asarray(mu_ts, dtype=float))
    ref = vec3(0, 0, 1)
    if abs(float(np.dot(z, ref))) > 0.99:
        ref = vec3(1, 0, 0)
    x = ref - np.dot(ref, z) * z
    x = normalized(x)
    y = np.cross(z, x)
    return quat_from_matrix(np.column_stack([x, y, z]))


def make_slider_state(s: np.ndarray, t: np.ndarray, slider_height: float) -> SliderState:
    """Slider posed at bottom position s for a tool attach at t."""
    frame = slider_frame(segment_tool_slider(s, t))
    b = quat_rotate(frame, vec3(0, 0, slider_height))
    return SliderState(np.asarray(s, dtype=float), b, frame)


def rest_slider_state(anchors: CableAnchors, slider_height: float) -> SliderState:
    """Unattended slider hanging below the source with an upright frame."""
    return SliderState(np.asarray(anchors.slider_rest, dtype=float),
                       vec3(0, 0, slider_height),
                       np.array([1.0, 0.0, 0.0, 0.0]))


def _angle_to_frame_z(v: np.ndarray, rotation: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) < 1e-12:
        raise ZeroVectorError("bend angle of a zero-length segment is undefined")
    z = quat_rotate(rotation, vec3(0, 0, 1))
    u = v / np.linalg.norm(v)
    return math.degrees(math.atan2(np.linalg.norm(np.cross(u, z)), float(np.dot(u, z))))


def bend_angle_tool(mu_ts: np.ndarray, tool_rot: np.ndarray) -> float:
    """Degrees between the tool-side segment and the tool frame's z axis."""
    return _angle_to_frame_z(mu_ts, tool_rot)


def bend_angle_slider(mu_sp: np.ndarray, slider_rot: np.ndarray) -> float:
    """Degrees between the source-side segment and the slider frame's z axis."""
    return _angle_to_frame_z(mu_sp, slider_rot)


def required_cable_length(state: CableState) -> float:
    """Total taut length through the slider: |mu_ts| + |mu_sp|."""
    return float(np.linalg.norm(state.mu_ts) + np.linalg.norm(state.mu_sp))


class PulleyAction(str, Enum):
    EXTEND = "extend"
    RETRACT = "retract"


@dataclass(frozen=True)
class PulleyCommand:
    action: PulleyAction
    delta: float    # m, always positive

    def apply(self, outside_length: float) -> float:
        return outside_length + (self.delta if self.action is PulleyAction.EXTEND else -self.delta)


def pulley_adjust(outside_length: float, required: float, threshold: float) -> PulleyCommand | None:
    """Motor command bringing the outside length to the required length.

    None while the mismatch stays within the threshold deadband; otherwise the
    returned command makes the post-state length equal the requirement, so a
    second call after applying it is always None.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    diff = required - outside_length
    if abs(diff) <= threshold:
        return None
    action = PulleyAction.EXTEND if diff > 0 else PulleyAction.RETRACT
    return PulleyCommand(action, abs(diff))


# ---------------------------------------------------------------------------
# Cable collision scan
# ---------------------------------------------------------------------------

SEGMENT_TOOL_SLIDER = "tool_slider"
SEGMENT_SLIDER_SOURCE = "slider_source"


@dataclass(frozen=True)
class Exclusion:
    """Skip bodies whose name starts with a prefix, optionally only near a point.

    near=None skips the prefix unconditionally (e.g. the tool body against the
    segment that emerges from its own surface).
    """
    name_prefix: str
    near: np.ndarray | None = None
    radius: float = 0.0
    segments: tuple[str, ...] = (SEGMENT_TOOL_SLIDER, SEGMENT_SLIDER_SOURCE)


@dataclass(frozen=True)
class CollisionEvent:
    segment: str
    body: str
    distance: float


def _excluded(name: str, seg_label: str, capsule_axis: Segment | None,
              exclusions: tuple[Exclusion, ...]) -> bool:
    for ex in exclusions:
        if seg_label not in ex.segments or not name.startswith(ex.name_prefix):
            continue
        if ex.near is None:
            return True
        if capsule_axis is None:
            return True
        _, closest = closest_point_on_segment(ex.near, capsule_axis.a, capsule_axis.b)
        if float(np.linalg.norm(closest - ex.near)) <= ex.radius:
            return True
    return False


def cable_collision_events(state: CableState,
                           slider: SliderState,
                           t: np.ndarray,
                           h: np.ndarray,
                           capsules: list[NamedCapsule],
                           boxes: list[NamedBox],
                           cable_radius: float,
                           clearance: float,
                           exclusions: tuple[Exclusion, ...] = ()) -> list[CollisionEvent]:
    """Every (cable segment, body) pair closer than cable radius + clearance.

    Segment endpoints are the physical cable path: tool attach to slider
    bottom, then slider top to the source.  Events are ordered segment-major
    then by body list order, so scans are reproducible.
    """
    segments = (
        (SEGMENT_TOOL_SLIDER, Segment(np.asarray(t, dtype=float), slider.s)),
        (SEGMENT_SLIDER_SOURCE, Segment(slider.top, np.asarray(h, dtype=float))),
    )
    events: list[CollisionEvent] = []
    for label, seg in segments:
        kept = [nc for nc in capsules if not _excluded(nc.name, label, nc.capsule.axis, exclusions)]
        if kept:
            cs = CapsuleSet(kept)
            d = cs.segment_clearances(seg) - cable_radius
            for idx in np.nonzero(d < clearance)[0]:
                events.append(CollisionEvent(label, cs.names[int(idx)], max(0.0, float(d[idx]))))
        for nb in boxes:
            if _excluded(nb.name, label, None, exclusions):
                continue
            for v in segment_box_violations(seg, cable_radius, [nb], clearance):
                events.append(CollisionEvent(label, nb.name, v.distance))
    return events
