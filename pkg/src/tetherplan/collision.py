"""Named collision bodies and clearance scans over capsule/box sets.

Bodies carry slash-delimited names ("master/right/link2", "env/table",
"tool") so planners can report what collided and exclude grasping hands
near an attachment without holding references into robot models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Capsule,
    Obb,
    Segment,
    capsule_obb_distance,
    point_obb_distance,
    segment_obb_distance,
    segment_to_segments_distance,
)


@dataclass(frozen=True)
class NamedCapsule:
    name: str
    capsule: Capsule


@dataclass(frozen=True)
class NamedBox:
    name: str
    box: Obb


@dataclass(frozen=True)
class Violation:
    first: str
    second: str
    distance: float   # surface distance, 0 when penetrating


class CapsuleSet:
    """Capsule list flattened into endpoint/radius arrays for batch queries."""

    def __init__(self, capsules: list[NamedCapsule]):
        self.names = [c.name for c in capsules]
        n = len(capsules)
        self.a = np.empty((n, 3))
        self.b = np.empty((n, 3))
        self.r = np.empty(n)
        for i, c in enumerate(capsules):
            self.a[i] = c.capsule.axis.a
            self.b[i] = c.capsule.axis.b
            self.r[i] = c.capsule.radius

    def __len__(self) -> int:
        return len(self.names)

    def segment_clearances(self, seg: Segment) -> np.ndarray:
        """Surface distance from a zero-radius segment to every capsule."""
        if len(self.names) == 0:
            return np.empty(0)
        return segment_to_segments_distance(seg, self.a, self.b) - self.r


def segment_box_violations(seg: Segment, seg_radius: float, boxes: list[NamedBox],
                           clearance: float) -> list[Violation]:
    out = []
    mid = 0.5 * (seg.a + seg.b)
    half_len = 0.5 * float(np.linalg.norm(seg.b - seg.a))
    for nb in boxes:
        # cheap reject: midpoint bound caps how close the segment can be
        if point_obb_distance(mid, nb.box) - half_len - seg_radius >= clearance:
            continue
        d = segment_obb_distance(seg, nb.box) - seg_radius
        if d < clearance:
            out.append(Violation("segment", nb.name, max(0.0, d)))
    return out


def capsules_vs_capsules(set_a: list[NamedCapsule], set_b: CapsuleSet,
                         clearance: float) -> list[Violation]:
    """All pairs from set_a x set_b closer than clearance (surface to surface)."""
    out = []
    for ca in set_a:
        if len(set_b) == 0:
            break
        d = set_b.segment_clearances(ca.capsule.axis) - ca.capsule.radius
        for idx in np.nonzero(d < clearance)[0]:
            out.append(Violation(ca.name, set_b.names[int(idx)], max(0.0, float(d[idx]))))
    return out


def capsules_vs_boxes(capsules: list[NamedCapsule], boxes: list[NamedBox],
                      clearance: float) -> list[Violation]:
    out = []
    for nc in capsules:
        mid = 0.5 * (nc.capsule.axis.a + nc.capsule.axis.b)
        half_len = 0.5 * float(np.linalg.norm(nc.capsule.axis.b - nc.capsule.axis.a))
        for nb in boxes:
            if point_obb_distance(mid, nb.box) - half_len - nc.capsule.radius >= clearance:
                continue
            d = capsule_obb_distance(nc.capsule, nb.box)
            if d < clearance:
                out.append(Violation(nc.name, nb.name, d))
    return out


def any_body_violation(moving: list[NamedCapsule],
                       static_capsules: CapsuleSet,
                       static_boxes: list[NamedBox],
                       clearance: float) -> Violation | None:
    """First clearance violation of moving capsules against a static world."""
    for ca in moving:
        if len(static_capsules):
            d = static_capsules.segment_clearances(ca.capsule.axis) - ca.capsule.radius
            idx = int(np.argmin(d))
            if d[idx] < clearance:
                return Violation(ca.name, static_capsules.names[idx], max(0.0, float(d[idx])))
        mid = 0.5 * (ca.capsule.axis.a + ca.capsule.axis.b)
        half_len = 0.5 * float(np.linalg.norm(ca.capsule.axis.b - ca.capsule.axis.a))
        for nb in static_boxes:
            if point_obb_distance(mid, nb.box) - half_len - ca.capsule.radius >= clearance:
                continue
            d_box = capsule_obb_distance(ca.capsule, nb.box)
            if d_box < clearance:
                return Violation(ca.name, nb.name, d_box)
    return None
