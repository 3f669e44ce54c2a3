"""Quasi-static stability via a wrench-balance feasibility LP.

An arrangement is declared stable iff there exist non-negative contact
force magnitudes, along linearized friction-cone generators at every
contact point, that balance gravity (net force and net torque about each
body's centroid equal zero). The LP is solved with a deterministic
phase-1 simplex (Bland's rule), so verdicts are reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import simplex_phase1
from .geometry import centroid, polygon_area
from .relations import TABLE, extract_contacts, placement_closure
from .scene import Arrangement, Instance

SLACK_EPS = 1e-7
DEFAULT_CONE_GENERATORS = 4


@dataclass(frozen=True)
class ContactPointForce:
    """One force application point with its friction-cone generators."""

    point: np.ndarray  # 3D position
    normal: np.ndarray  # unit normal, pointing into `upper`
    generators: np.ndarray  # (k, 3) unit vectors within the friction cone
    upper: int  # body the generators push on
    lower: int  # body receiving the reaction (TABLE = fixed)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    unstable_objects: frozenset = frozenset()


def _cone(normal: np.ndarray, mu: float, k: int) -> np.ndarray:
    """k unit generators spanning the linearized cone of half-angle atan(mu)."""
    n = normal / np.linalg.norm(normal)
    if mu <= 0.0:
        return n.reshape(1, 3)
    # orthonormal tangent pair
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = np.cross(n, a)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    gens = np.empty((k, 3))
    for idx in range(k):
        ang = 2.0 * math.pi * idx / k
        d = math.cos(ang) * t1 + math.sin(ang) * t2
        g = n + mu * d
        gens[idx] = g / np.linalg.norm(g)
    return gens


def contact_points(
    inst: Instance,
    arr: Arrangement,
    mu: float | None = None,
    cone_k: int = DEFAULT_CONE_GENERATORS,
) -> list[ContactPointForce]:
    """Force application points for every contact in the arrangement.

    Support contacts contribute one point per vertex of the contact patch at
    the interface height with a +z normal; side contacts contribute the two
    segment ends at both face heights with a horizontal normal."""
    mu = inst.friction if mu is None else mu
    h = inst.height
    out: list[ContactPointForce] = []
    up = np.array([0.0, 0.0, 1.0])
    for rec in extract_contacts(inst, arr):
        if rec.kind == "support":
            z = arr[rec.upper].layer * h
            gens = _cone(up, mu, cone_k)
            for vx, vy in rec.region.vertices:
                out.append(
                    ContactPointForce(
                        point=np.array([vx, vy, z]),
                        normal=up,
                        generators=gens,
                        upper=rec.upper,
                        lower=rec.lower,
                    )
                )
        else:
            layer = arr[rec.upper].layer
            nrm = np.array([rec.normal[0], rec.normal[1], 0.0])
            nrm /= np.linalg.norm(nrm)
            gens = _cone(nrm, mu, cone_k)
            (x0, y0), (x1, y1) = rec.segment
            for (px, py) in ((x0, y0), (x1, y1)):
                for z in (layer * h, (layer + 1) * h):
                    out.append(
                        ContactPointForce(
                            point=np.array([px, py, z]),
                            normal=nrm,
                            generators=gens,
                            upper=rec.upper,
                            lower=rec.lower,
                        )
                    )
    return out


def _equilibrium_system(inst: Instance, arr: Arrangement, points):
    """Assemble A x = b with x >= 0: 6 balance rows per present object."""
    ids = sorted(arr.poses)
    row_of = {oid: 6 * k for k, oid in enumerate(ids)}
    h = inst.height
    coms = {}
    weights = {}
    for oid in ids:
        shape = inst.shape(oid)
        c2 = centroid(inst.footprint(oid, arr[oid]))
        coms[oid] = np.array([c2[0], c2[1], (arr[oid].layer + 0.5) * h])
        weights[oid] = shape.density * polygon_area(shape.base) * h * inst.gravity

    nvars = sum(p.generators.shape[0] for p in points)
    A = np.zeros((6 * len(ids), nvars))
    b = np.zeros(6 * len(ids))
    col = 0
    for p in points:
        for g in p.generators:
            for body, sign in ((p.upper, 1.0), (p.lower, -1.0)):
                if body == TABLE:
                    continue
                r = row_of[body]
                arm = p.point - coms[body]
                A[r : r + 3, col] += sign * g
                A[r + 3 : r + 6, col] += sign * np.cross(arm, g)
            col += 1
    for oid in ids:
        b[row_of[oid] + 2] = weights[oid]  # contacts must carry the weight
    return A, b, ids, row_of


def is_stable(
    inst: Instance,
    arr: Arrangement,
    mu: float | None = None,
    cone_k: int = DEFAULT_CONE_GENERATORS,
) -> StabilityVerdict:
    """Decide static stability of an arrangement.

    Objects with no contact at all are trivially unstable (no LP needed)."""
    ids = sorted(arr.poses)
    if not ids:
        return StabilityVerdict(stable=True)
    points = contact_points(inst, arr, mu=mu, cone_k=cone_k)
    touched = {p.upper for p in points} | {p.lower for p in points}
    floating = frozenset(oid for oid in ids if oid not in touched)
    if floating:
        return StabilityVerdict(stable=False, unstable_objects=floating)
    A, b, ids, row_of = _equilibrium_system(inst, arr, points)
    feasible, residuals = simplex_phase1(A, b, SLACK_EPS)
    if feasible:
        return StabilityVerdict(stable=True)
    bad = frozenset(
        oid for oid in ids if np.abs(residuals[row_of[oid] : row_of[oid] + 6]).sum() > SLACK_EPS
    )
    if not bad:
        bad = frozenset(ids)
    return StabilityVerdict(stable=False, unstable_objects=bad)


@dataclass(frozen=True)
class UnstableStep:
    bundle: int  # 1-based index of the failing removal bundle
    removal: int  # object whose removal bundle failed
    micro: str  # description of the failing micro-action
    unstable_objects: frozenset


def direct_at_removal(i: int, removed_before, rel) -> bool:
    """Whether object i can go straight from start to goal as one atomic
    action at its removal: its goal column is already clear and its goal
    supporters are on the table before the pick. (Placements that would be
    unlocked by i's own removal cannot help an atomic move.)"""
    removed_before = frozenset(removed_before)
    if any(j not in removed_before for j in rel.goal_column_blockers[i]):
        return False
    placed_before = placement_closure(removed_before, rel)
    return all(
        j in placed_before for (k, j) in rel.goal_above_direct if k == i
    )


def move_cost(i: int, removed_before, rel) -> int:
    """0 for a stay-in-place object relocated in place, 1 for a direct move,
    2 when a buffer is needed."""
    if direct_at_removal(i, removed_before, rel):
        return 0 if i in rel.stay else 1
    return 2


def bundle_steps(inst: Instance, rel, removed_before, oid: int):
    """Micro-states of one removal bundle: pick `oid`, place it immediately
    when direct, then eagerly place buffered objects (goal-support
    topological order, ascending id). Yields (micro_desc, arrangement)."""
    removed_before = frozenset(removed_before)
    placed_before = placement_closure(removed_before, rel)
    removed_after = removed_before | {oid}
    placed_after = placement_closure(removed_after, rel)

    current = dict(inst.start.poses)
    for j in removed_after:
        del current[j]
    for j in placed_before:
        current[j] = inst.goal[j]

    direct = direct_at_removal(oid, removed_before, rel)
    placed = set(placed_before)
    if direct and oid in rel.stay:
        # never physically moves
        current[oid] = inst.goal[oid]
        placed.add(oid)
    else:
        yield f"pick {oid}", Arrangement(current)
        if direct:
            current[oid] = inst.goal[oid]
            placed.add(oid)
            yield f"place {oid}", Arrangement(current)

    supporters: dict[int, set[int]] = {}
    for i, j in rel.goal_above_direct:
        supporters.setdefault(i, set()).add(j)
    while True:
        ready = sorted(
            i
            for i in placed_after
            if i not in placed and all(j in placed for j in supporters.get(i, ()))
        )
        if not ready:
            break
        for i in ready:
            current[i] = inst.goal[i]
            placed.add(i)
            yield f"place {i}", Arrangement(current)


def check_bundle(
    inst: Instance, rel, removed_before, oid: int, mu: float | None = None
) -> UnstableStep | None:
    """Stability of every micro-state of one bundle; bundle index is filled
    in by the caller (0 here)."""
    for micro, arr in bundle_steps(inst, rel, removed_before, oid):
        verdict = is_stable(inst, arr, mu=mu)
        if not verdict.stable:
            return UnstableStep(
                bundle=0, removal=oid, micro=micro, unstable_objects=verdict.unstable_objects
            )
    return None


def first_unstable_step(
    inst: Instance, removal_order, rel, mu: float | None = None
) -> UnstableStep | None:
    """Replay a removal order and return the first bundle whose execution
    reaches an unstable on-table arrangement, or None when fully stable."""
    from .relations import removable

    removed: set[int] = set()
    for k, oid in enumerate(removal_order, start=1):
        if not removable(oid, removed, rel):
            raise ValueError(f"illegal removal order at {oid}")
        fail = check_bundle(inst, rel, removed, oid, mu=mu)
        if fail is not None:
            return UnstableStep(
                bundle=k,
                removal=oid,
                micro=fail.micro,
                unstable_objects=fail.unstable_objects,
            )
        removed.add(oid)
    return None
