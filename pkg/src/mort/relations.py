"""Dependency structure between start and goal arrangements.

Three pair sets drive the planners:

- start_above: (i, j) when i directly rests on j in the start arrangement;
  i must leave before j can be picked.
- goal_above_closure: (i, j) when i is transitively above j in the goal;
  j must be placed before i can be placed.
- blockers: i -> objects whose start footprint overlaps the goal footprint
  of i or of anything goal-below i; all must leave their start poses before
  i can be placed at its goal.

Footprint overlap is evaluated on the 2D column (layers ignored), which
makes placeability a monotone function of the removed set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import AREA_TOL, Polygon, overlap_area
from .scene import Arrangement, Instance

TABLE = 0  # pseudo-id for the tabletop in contact records

GAP_TOL = 1e-6


@dataclass(frozen=True)
class ContactRecord:
    """A support patch (horizontal) or side face segment between two bodies."""

    upper: int
    lower: int  # TABLE for tabletop support
    kind: str  # "support" | "side"
    region: Polygon | None = None  # support patch
    segment: tuple | None = None  # ((x0, y0), (x1, y1)) for side contacts
    normal: tuple | None = None  # outward horizontal normal, lower -> upper


@dataclass(frozen=True)
class Relations:
    start_above: frozenset  # ordered pairs (upper, lower)
    goal_above_direct: frozenset
    goal_above_closure: frozenset
    blockers: dict  # id -> frozenset of ids
    goal_column_blockers: dict  # id -> direct start-column overlaps with goal(i)
    stay: frozenset  # objects whose start pose equals their goal pose

    def above_in_start(self, oid: int) -> frozenset:
        """Objects directly resting on `oid` in the start arrangement."""
        return frozenset(i for (i, j) in self.start_above if j == oid)


def extract_contacts(inst: Instance, arr: Arrangement) -> list[ContactRecord]:
    """All support patches (between consecutive layers and with the table)
    and all side-face contact segments in an arrangement."""
    out: list[ContactRecord] = []
    ids = sorted(arr.poses)
    fps = {oid: inst.footprint(oid, arr[oid]) for oid in ids}
    for oid in ids:
        pose = arr[oid]
        if pose.layer == 0:
            out.append(ContactRecord(upper=oid, lower=TABLE, kind="support", region=fps[oid]))
        for other in ids:
            if other == oid:
                continue
            po = arr[other]
            if po.layer == pose.layer - 1:
                from .geometry import polygon_intersection

                patch = polygon_intersection(fps[oid], fps[other])
                if patch is not None:
                    out.append(
                        ContactRecord(upper=oid, lower=other, kind="support", region=patch)
                    )
            elif po.layer == pose.layer and other > oid:
                seg = _side_contact(fps[oid], fps[other])
                if seg is not None:
                    (p0, p1), normal = seg
                    out.append(
                        ContactRecord(
                            upper=oid,
                            lower=other,
                            kind="side",
                            segment=(tuple(p0), tuple(p1)),
                            normal=tuple(normal),
                        )
                    )
    return out


def _side_contact(a: Polygon, b: Polygon):
    """Detect flush touching faces between two same-layer convex footprints.

    Returns ((p0, p1), normal) with the normal pointing from b into a, or
    None. Faces must be anti-parallel, coincident within GAP_TOL, and
    overlap along their shared line."""
    import numpy as np

    if overlap_area(a, b) > AREA_TOL:
        return None  # overlapping, not touching; collision is caught elsewhere
    va, vb = a.vertices, b.vertices
    best = None
    for i in range(va.shape[0]):
        a0, a1 = va[i], va[(i + 1) % va.shape[0]]
        da = a1 - a0
        la = np.linalg.norm(da)
        if la <= GAP_TOL:
            continue
        ta = da / la
        na = np.array([ta[1], -ta[0]])  # outward for CCW polygon
        for j in range(vb.shape[0]):
            b0, b1 = vb[j], vb[(j + 1) % vb.shape[0]]
            db = b1 - b0
            lb = np.linalg.norm(db)
            if lb <= GAP_TOL:
                continue
            tb = db / lb
            if abs(ta @ tb + 1.0) > 1e-9:
                continue  # need anti-parallel edges
            if abs((b0 - a0) @ na) > GAP_TOL:
                continue  # not on the same supporting line
            # overlap of the two segments along ta
            s0, s1 = 0.0, la
            t0, t1 = (b1 - a0) @ ta, (b0 - a0) @ ta
            lo, hi = max(s0, t0), min(s1, t1)
            if hi - lo <= GAP_TOL:
                continue
            p0 = a0 + lo * ta
            p1 = a0 + hi * ta
            length = hi - lo
            if best is None or length > best[2]:
                best = ((p0, p1), -na, length)
    if best is None:
        return None
    return best[0], best[1]


def _direct_support_pairs(inst: Instance, arr: Arrangement) -> set[tuple[int, int]]:
    pairs = set()
    ids = sorted(arr.poses)
    for i in ids:
        pi = arr[i]
        if pi.layer == 0:
            continue
        fi = inst.footprint(i, pi)
        for j in ids:
            if j == i:
                continue
            pj = arr[j]
            if pj.layer == pi.layer - 1 and overlap_area(
                fi, inst.footprint(j, pj)
            ) > AREA_TOL:
                pairs.add((i, j))
    return pairs


def _transitive_closure(pairs: set[tuple[int, int]]) -> set[tuple[int, int]]:
    below: dict[int, set[int]] = {}
    for i, j in pairs:
        below.setdefault(i, set()).add(j)
    closure: dict[int, set[int]] = {}

    def visit(i: int) -> set[int]:
        if i in closure:
            return closure[i]
        acc = set()
        for j in below.get(i, ()):
            acc.add(j)
            acc |= visit(j)
        closure[i] = acc
        return acc

    for i in list(below):
        visit(i)
    return {(i, j) for i, js in closure.items() for j in js}


def build_relations(inst: Instance) -> Relations:
    from .scene import stay_in_place

    start_above = _direct_support_pairs(inst, inst.start)
    goal_direct = _direct_support_pairs(inst, inst.goal)
    goal_closure = _transitive_closure(goal_direct)

    goal_fp = {i: inst.footprint(i, inst.goal[i]) for i in range(1, inst.n + 1)}
    start_fp = {i: inst.footprint(i, inst.start[i]) for i in range(1, inst.n + 1)}

    column: dict[int, frozenset[int]] = {}
    for i in range(1, inst.n + 1):
        column[i] = frozenset(
            j
            for j in range(1, inst.n + 1)
            if j != i and overlap_area(goal_fp[i], start_fp[j]) > AREA_TOL
        )

    blockers: dict[int, frozenset[int]] = {}
    below_of: dict[int, set[int]] = {}
    for i, j in goal_closure:
        below_of.setdefault(i, set()).add(j)
    for i in range(1, inst.n + 1):
        acc = set(column[i])
        for k in below_of.get(i, ()):
            acc |= column[k]
        acc.discard(i)
        blockers[i] = frozenset(acc)

    stay = frozenset(i for i in range(1, inst.n + 1) if stay_in_place(inst, i))
    return Relations(
        start_above=frozenset(start_above),
        goal_above_direct=frozenset(goal_direct),
        goal_above_closure=frozenset(goal_closure),
        blockers=blockers,
        goal_column_blockers=column,
        stay=stay,
    )


def removable(i: int, removed: frozenset | set, rel: Relations) -> bool:
    """True when every object directly above i in the start has been removed."""
    if i in removed:
        raise ValueError(f"object {i} already removed")
    return all(j in removed for (j, k) in rel.start_above if k == i)


def placement_closure(removed, rel: Relations) -> frozenset:
    """Maximal subset of `removed` placeable at goal poses under eager
    placement: every member's goal supporters (transitively) are in the set
    and no unremoved object overlaps its goal column. Monotone fixpoint."""
    removed = frozenset(removed)
    supporters: dict[int, set[int]] = {}
    for i, j in rel.goal_above_direct:
        supporters.setdefault(i, set()).add(j)
    placed = set()
    changed = True
    while changed:
        changed = False
        for i in removed:
            if i in placed:
                continue
            if any(j not in removed for j in rel.goal_column_blockers[i]):
                continue
            if any(j not in placed for j in supporters.get(i, ())):
                continue
            placed.add(i)
            changed = True
    return frozenset(placed)


def is_direct(i: int, removed_after, rel: Relations) -> bool:
    """Whether object i can go straight to its goal when removed as part of
    `removed_after` (the removed set including i)."""
    removed_after = frozenset(removed_after)
    if i not in removed_after:
        raise ValueError(f"object {i} not in removed set")
    return i in placement_closure(removed_after, rel)
