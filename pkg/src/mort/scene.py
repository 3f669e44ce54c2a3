"""Instance / arrangement data model, validation, plan replay and file formats.

An instance holds n extruded convex objects of shared height h, a start and
a goal arrangement, and the physical parameters used by the stability
checker. Buffers are abstract off-workspace slots: a buffered object
occupies no tabletop volume.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AREA_TOL,
    GeometryError,
    Polygon,
    Pose,
    overlap_area,
    transform_footprint,
)

POS_TOL = 1e-6
YAW_TOL = 1e-6

FORMAT_VERSION = 1

SOURCE_START = "start"
SOURCE_BUFFER = "buffer"
DEST_GOAL = "goal"
DEST_BUFFER = "buffer"

LEGAL_ACTIONS = {
    (SOURCE_START, DEST_GOAL),
    (SOURCE_START, DEST_BUFFER),
    (SOURCE_BUFFER, DEST_GOAL),
}


class SceneError(ValueError):
    """Base error for scene-level problems; carries a short machine code."""

    code = "scene"


class SchemaError(SceneError):
    code = "schema"


class InvariantError(SceneError):
    code = "invariant"


class UnstableArrangementError(SceneError):
    code = "unstable"


class PlanViolation(SceneError):
    """A plan failed replay; `index` is the offending action position."""

    code = "plan"

    def __init__(self, index: int, reason: str):
        super().__init__(f"action {index}: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True)
class ObjectShape:
    id: int
    base: Polygon
    density: float = 1.0

    def __post_init__(self):
        if self.id < 1:
            raise InvariantError(f"object ids must be >= 1, got {self.id}")
        if not (self.density > 0):
            raise InvariantError(f"density must be positive, got {self.density}")


@dataclass(frozen=True)
class Arrangement:
    """Pose assignment for a subset of objects; the table sits under layer 0."""

    poses: dict[int, Pose]

    def __post_init__(self):
        object.__setattr__(self, "poses", dict(self.poses))

    def __contains__(self, oid: int) -> bool:
        return oid in self.poses

    def __iter__(self):
        return iter(sorted(self.poses))

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, oid: int) -> Pose:
        return self.poses[oid]

    def with_pose(self, oid: int, pose: Pose) -> "Arrangement":
        d = dict(self.poses)
        d[oid] = pose
        return Arrangement(d)

    def without(self, oid: int) -> "Arrangement":
        d = dict(self.poses)
        d.pop(oid)
        return Arrangement(d)


@dataclass(frozen=True)
class Action:
    object: int
    source: str
    destination: str

    def __post_init__(self):
        if (self.source, self.destination) not in LEGAL_ACTIONS:
            raise InvariantError(
                f"illegal action shape {self.source}->{self.destination}"
            )


@dataclass(frozen=True)
class Plan:
    actions: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    @property
    def cost(self) -> int:
        return len(self.actions)

    @property
    def buffers(self) -> int:
        return sum(1 for a in self.actions if a.destination == DEST_BUFFER)


@dataclass(frozen=True)
class Instance:
    height: float
    objects: tuple[ObjectShape, ...]
    start: Arrangement
    goal: Arrangement
    friction: float = 0.5
    gravity: float = 9.81

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not (self.height > 0):
            raise InvariantError("height must be positive")
        if not (0.0 <= self.friction <= 2.0):
            raise InvariantError(f"friction must be in [0, 2], got {self.friction}")
        if not (self.gravity > 0):
            raise InvariantError("gravity must be positive")
        ids = sorted(o.id for o in self.objects)
        if ids != list(range(1, len(ids) + 1)):
            raise InvariantError("object ids must be 1..n with no gaps")
        for name, arr in (("start", self.start), ("goal", self.goal)):
            if sorted(arr.poses) != ids:
                raise InvariantError(f"{name} must assign exactly one pose per object")
        object.__setattr__(self, "_shape_by_id", {o.id: o for o in self.objects})
        object.__setattr__(self, "_fp_cache", {})

    @property
    def n(self) -> int:
        return len(self.objects)

    def shape(self, oid: int) -> ObjectShape:
        return self._shape_by_id[oid]

    def footprint(self, oid: int, pose: Pose) -> Polygon:
        key = (oid, pose)
        fp = self._fp_cache.get(key)
        if fp is None:
            fp = transform_footprint(self._shape_by_id[oid].base, pose)
            self._fp_cache[key] = fp
        return fp


def poses_equal(a: Pose, b: Pose) -> bool:
    dyaw = abs(a.yaw - b.yaw) % (2.0 * math.pi)
    dyaw = min(dyaw, 2.0 * math.pi - dyaw)
    return (
        abs(a.x - b.x) <= POS_TOL
        and abs(a.y - b.y) <= POS_TOL
        and a.layer == b.layer
        and dyaw <= YAW_TOL
    )


def stay_in_place(inst: Instance, oid: int) -> bool:
    """True when an object's start and goal poses coincide."""
    return poses_equal(inst.start[oid], inst.goal[oid])


def validate_arrangement(inst: Instance, arr: Arrangement) -> list[str]:
    """Structural validity: known ids, same-layer collision freedom, support
    existence for every object above layer 0. Returns a list of violation
    strings (empty iff valid)."""
    out = []
    ids = sorted(arr.poses)
    for oid in ids:
        if oid < 1 or oid > inst.n:
            raise InvariantError(f"unknown object id {oid}")
    by_layer: dict[int, list[int]] = {}
    for oid in ids:
        by_layer.setdefault(arr[oid].layer, []).append(oid)
    for layer, members in sorted(by_layer.items()):
        for i, a in enumerate(members):
            fa = inst.footprint(a, arr[a])
            for b in members[i + 1 :]:
                if overlap_area(fa, inst.footprint(b, arr[b])) > AREA_TOL:
                    out.append(f"collision({a},{b})")
        if layer == 0:
            continue
        below = by_layer.get(layer - 1, [])
        for a in members:
            fa = inst.footprint(a, arr[a])
            if not any(
                overlap_area(fa, inst.footprint(b, arr[b])) > AREA_TOL for b in below
            ):
                out.append(f"unsupported({a})")
    return out


def validate_instance(inst: Instance, check_stability: bool = True) -> None:
    """Raise if the instance violates arrangement validity or (optionally)
    static stability of start/goal."""
    for name, arr in (("start", inst.start), ("goal", inst.goal)):
        bad = validate_arrangement(inst, arr)
        if bad:
            raise InvariantError(f"{name} arrangement invalid: {', '.join(bad)}")
    if check_stability:
        from .stability import is_stable

        for name, arr in (("start", inst.start), ("goal", inst.goal)):
            verdict = is_stable(inst, arr)
            if not verdict.stable:
                raise UnstableArrangementError(
                    f"{name} arrangement unstable (objects {sorted(verdict.unstable_objects)})"
                )


def _top_clear(inst: Instance, arr: Arrangement, oid: int) -> bool:
    pose = arr[oid]
    fp = inst.footprint(oid, pose)
    for other in arr:
        if other == oid:
            continue
        po = arr[other]
        if po.layer == pose.layer + 1 and overlap_area(
            fp, inst.footprint(other, arr[other])
        ) > AREA_TOL:
            return False
    return True


def _placement_ok(inst: Instance, arr: Arrangement, oid: int, pose: Pose) -> str | None:
    fp = inst.footprint(oid, pose)
    supported = pose.layer == 0
    for other in arr:
        po = arr[other]
        if po.layer == pose.layer and overlap_area(
            fp, inst.footprint(other, po)
        ) > AREA_TOL:
            return f"collision with {other}"
        if not supported and po.layer == pose.layer - 1 and overlap_area(
            fp, inst.footprint(other, po)
        ) > AREA_TOL:
            supported = True
    if not supported:
        return "unsupported"
    return None


def simulate_plan(inst: Instance, plan: Plan) -> list[Arrangement]:
    """Exact symbolic replay of a plan. Returns the on-table arrangement after
    every action; raises PlanViolation at the first illegal action or on a
    final-arrangement mismatch."""
    current = Arrangement(dict(inst.start.poses))
    buffered: set[int] = set()
    moved: set[int] = set()
    states: list[Arrangement] = []
    for idx, act in enumerate(plan.actions):
        oid = act.object
        if oid < 1 or oid > inst.n:
            raise PlanViolation(idx, f"unknown object {oid}")
        if act.source == SOURCE_START:
            if oid in moved:
                raise PlanViolation(idx, f"object {oid} already left its start pose")
            if not _top_clear(inst, current, oid):
                raise PlanViolation(idx, f"pick of blocked object {oid}")
            current = current.without(oid)
            moved.add(oid)
        else:
            if oid not in buffered:
                raise PlanViolation(idx, f"object {oid} is not in a buffer")
            buffered.discard(oid)
        if act.destination == DEST_BUFFER:
            buffered.add(oid)
        else:
            pose = inst.goal[oid]
            why = _placement_ok(inst, current, oid, pose)
            if why is not None:
                raise PlanViolation(idx, f"place of {oid} at goal: {why}")
            current = current.with_pose(oid, pose)
        states.append(current)
    if buffered:
        raise PlanViolation(len(plan.actions), f"objects left in buffer: {sorted(buffered)}")
    for oid in range(1, inst.n + 1):
        if not poses_equal(current[oid], inst.goal[oid]):
            raise PlanViolation(len(plan.actions), f"final mismatch for object {oid}")
    return states


# ---------------------------------------------------------------------------
# on-disk formats


def _pose_to_json(p: Pose) -> dict:
    return {"x": p.x, "y": p.y, "layer": p.layer, "yaw": p.yaw}


def _pose_from_json(d: dict) -> Pose:
    try:
        return Pose(float(d["x"]), float(d["y"]), int(d["layer"]), float(d.get("yaw", 0.0)))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"bad pose record: {e}") from e


def save_instance(inst: Instance) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "height": inst.height,
        "friction": inst.friction,
        "gravity": inst.gravity,
        "objects": [
            {"id": o.id, "base": o.base.vertices.tolist(), "density": o.density}
            for o in inst.objects
        ],
        "start": [{"id": oid, **_pose_to_json(inst.start[oid])} for oid in inst.start],
        "goal": [{"id": oid, **_pose_to_json(inst.goal[oid])} for oid in inst.goal],
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def _arrangement_from_json(rows, what: str) -> Arrangement:
    if not isinstance(rows, list):
        raise SchemaError(f"'{what}' must be a list")
    poses = {}
    for row in rows:
        if not isinstance(row, dict) or "id" not in row:
            raise SchemaError(f"'{what}' entries must be objects with an 'id'")
        oid = int(row["id"])
        if oid in poses:
            raise SchemaError(f"duplicate pose for object {oid} in '{what}'")
        poses[oid] = _pose_from_json(row)
    return Arrangement(poses)


def load_instance(data: bytes | str, check_stability: bool = True) -> Instance:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    for key in ("format_version", "height", "objects", "start", "goal"):
        if key not in doc:
            raise SchemaError(f"missing '{key}' key")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {doc['format_version']}")
    try:
        shapes = tuple(
            ObjectShape(
                int(o["id"]),
                Polygon(np.asarray(o["base"], dtype=np.float64)),
                float(o.get("density", 1.0)),
            )
            for o in doc["objects"]
        )
    except (KeyError, TypeError, GeometryError) as e:
        raise SchemaError(f"bad object record: {e}") from e
    try:
        inst = Instance(
            height=float(doc["height"]),
            objects=shapes,
            start=_arrangement_from_json(doc["start"], "start"),
            goal=_arrangement_from_json(doc["goal"], "goal"),
            friction=float(doc.get("friction", 0.5)),
            gravity=float(doc.get("gravity", 9.81)),
        )
    except GeometryError as e:
        raise SchemaError(str(e)) from e
    validate_instance(inst, check_stability=check_stability)
    return inst


def save_plan(plan: Plan, stats: dict | None = None) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "cost": plan.cost,
        "actions": [
            {"object": a.object, "from": a.source, "to": a.destination}
            for a in plan.actions
        ],
    }
    if stats:
        doc["stats"] = stats
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def load_plan(data: bytes | str) -> Plan:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from e
    for key in ("format_version", "cost", "actions"):
        if key not in doc:
            raise SchemaError(f"missing '{key}' key")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {doc['format_version']}")
    try:
        plan = Plan(
            tuple(
                Action(int(a["object"]), str(a["from"]), str(a["to"]))
                for a in doc["actions"]
            )
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"bad action record: {e}") from e
    if plan.cost != int(doc["cost"]):
        raise SchemaError(
            f"declared cost {doc['cost']} does not match {plan.cost} actions"
        )
    return plan
