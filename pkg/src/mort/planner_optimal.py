"""Exact minimum-length planner: best-first search over the removed-set
lattice with an admissible lower bound and lazily generated stability bans.

Each search state is the set of objects already removed from their start
poses; eager placement makes the physical arrangement a pure function of
that set, so per-object move costs decompose over lattice edges. A
candidate removal order is only screened for stability when it is dequeued
as a goal; the first unstable bundle yields a ban (prefix set, next
removal) and the search restarts with the extra constraint, reusing all
memoized stability verdicts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from heapq import heappop, heappush

from .relations import Relations, build_relations
from .scene import (
    DEST_BUFFER,
    DEST_GOAL,
    SOURCE_BUFFER,
    SOURCE_START,
    Action,
    Instance,
    Plan,
    validate_instance,
)
from .stability import UnstableStep, check_bundle, direct_at_removal

_UNKNOWN = object()

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIMEOUT = "timeout"
STATUS_UNSTABLE = "unstable"  # greedy only


@dataclass(frozen=True)
class BanRecord:
    prefix_set: frozenset
    banned_next: int


@dataclass(frozen=True)
class PlannerConfig:
    time_limit_s: float = 300.0
    enable_stability: bool = True
    mu: float | None = None  # override of the instance friction
    use_lower_bound: bool = True
    eager_stability: bool = False  # screen every expansion instead of goal candidates
    tie_break_seed: int = 0

    def __post_init__(self):
        if not (self.time_limit_s > 0):
            raise ValueError("time_limit_s must be positive")


@dataclass
class PlanResult:
    status: str
    plan: Plan | None = None
    stats: dict = field(default_factory=dict)

    @property
    def cost(self) -> int | None:
        return self.plan.cost if self.plan is not None else None


class _Model:
    """Bitmask view of an instance's relations, shared by the exact search
    and the brute-force oracle."""

    def __init__(self, inst: Instance, rel: Relations):
        self.inst = inst
        self.rel = rel
        n = inst.n
        self.n = n
        self.full = (1 << n) - 1
        self.above = [0] * (n + 1)  # objects resting on i in the start
        for (i, j) in rel.start_above:
            self.above[j] |= 1 << (i - 1)
        self.colblk = [0] * (n + 1)
        for i in range(1, n + 1):
            for j in rel.goal_column_blockers[i]:
                self.colblk[i] |= 1 << (j - 1)
        self.supp = [0] * (n + 1)
        for (i, j) in rel.goal_above_direct:
            self.supp[i] |= 1 << (j - 1)
        self.stay = 0
        for i in rel.stay:
            self.stay |= 1 << (i - 1)
        self.blkfull = [0] * (n + 1)
        for i in range(1, n + 1):
            for j in rel.blockers[i]:
                self.blkfull[i] |= 1 << (j - 1)
        # start-below transitive closure: objects that must be removed after i
        below: dict[int, set[int]] = {}
        for (i, j) in rel.start_above:
            below.setdefault(i, set()).add(j)
        memo: dict[int, frozenset] = {}

        def deep(i: int) -> frozenset:
            if i not in memo:
                acc: set[int] = set()
                for j in below.get(i, ()):
                    acc.add(j)
                    acc |= deep(j)
                memo[i] = frozenset(acc)
            return memo[i]

        self.after = [0] * (n + 1)
        for i in range(1, n + 1):
            for j in deep(i):
                self.after[i] |= 1 << (j - 1)
        # mutual blocking adjacency (cyclic constraints)
        self.mutual = [0] * (n + 1)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if j != i and (self.blkfull[i] >> (j - 1)) & 1 and (
                    self.blkfull[j] >> (i - 1)
                ) & 1:
                    self.mutual[i] |= 1 << (j - 1)
        self._closure_cache: dict[int, int] = {}

    def mask_of(self, ids) -> int:
        m = 0
        for i in ids:
            m |= 1 << (i - 1)
        return m

    def ids_of(self, mask: int) -> frozenset:
        return frozenset(i + 1 for i in range(self.n) if (mask >> i) & 1)

    def removable_mask(self, removed: int) -> int:
        """Objects not yet removed whose start tops are clear."""
        out = 0
        rest = self.full & ~removed
        m = rest
        while m:
            b = m & -m
            i = b.bit_length()
            if self.above[i] & ~removed == 0:
                out |= b
            m &= m - 1
        return out

    def closure(self, removed: int) -> int:
        """Bitmask placement closure (eager placement fixpoint)."""
        cached = self._closure_cache.get(removed)
        if cached is not None:
            return cached
        placed = 0
        changed = True
        while changed:
            changed = False
            m = removed & ~placed
            while m:
                b = m & -m
                i = b.bit_length()
                if self.colblk[i] & ~removed == 0 and self.supp[i] & ~placed == 0:
                    placed |= b
                    changed = True
                m &= m - 1
        self._closure_cache[removed] = placed
        return placed

    def direct(self, i: int, removed_before: int) -> bool:
        return (
            self.colblk[i] & ~removed_before == 0
            and self.supp[i] & ~self.closure(removed_before) == 0
        )

    def move_cost(self, i: int, removed_before: int) -> int:
        if self.direct(i, removed_before):
            return 0 if (self.stay >> (i - 1)) & 1 else 1
        return 2

    def lower_bound(self, removed: int) -> int:
        """Admissible remaining-cost bound: one move per remaining mover,
        plus forced buffers (a not-yet-removed object below i in the start
        blocks i's placement), plus one buffer per disjoint mutual pair."""
        rest = self.full & ~removed
        base = (rest & ~self.stay).bit_count()
        extra = 0
        forced = 0
        m = rest
        while m:
            b = m & -m
            i = b.bit_length()
            if self.after[i] & self.blkfull[i] & rest:
                forced |= b
                extra += 2 if (self.stay & b) else 1
            m &= m - 1
        avail = rest & ~forced
        m = avail
        while m:
            b = m & -m
            i = b.bit_length()
            if avail & b:
                partners = self.mutual[i] & avail & ~b
                if partners:
                    p = partners & -partners
                    avail &= ~(b | p)
                    extra += 1
            m &= m - 1
        return base + extra


def plan_from_removal_order(order, rel: Relations, inst: Instance) -> Plan:
    """Deterministic expansion of a removal order into pick-n-place actions
    with eager buffer flushes."""
    from .relations import placement_closure

    actions: list[Action] = []
    removed: set[int] = set()
    placed: set[int] = set()
    supporters: dict[int, set[int]] = {}
    for i, j in rel.goal_above_direct:
        supporters.setdefault(i, set()).add(j)
    for oid in order:
        direct = direct_at_removal(oid, removed, rel)
        removed.add(oid)
        if direct and oid in rel.stay:
            placed.add(oid)
        elif direct:
            actions.append(Action(oid, SOURCE_START, DEST_GOAL))
            placed.add(oid)
        else:
            actions.append(Action(oid, SOURCE_START, DEST_BUFFER))
        target = placement_closure(frozenset(removed), rel)
        while True:
            ready = sorted(
                i
                for i in target
                if i not in placed and all(j in placed for j in supporters.get(i, ()))
            )
            if not ready:
                break
            for i in ready:
                actions.append(Action(i, SOURCE_BUFFER, DEST_GOAL))
                placed.add(i)
    return Plan(tuple(actions))


class OptimalPlanner:
    """Best-first lattice search with the lazy stability loop."""

    def __init__(self, inst: Instance, config: PlannerConfig | None = None):
        self.inst = inst
        self.config = config or PlannerConfig()
        self.rel = build_relations(inst)
        self.model = _Model(inst, self.rel)
        self.bans: dict[int, int] = {}  # prefix mask -> banned removal mask
        self.ban_records: list[BanRecord] = []
        self._edge_memo: dict[tuple[int, int], UnstableStep | None] = {}
        self.stats = {
            "expanded": 0,
            "generated": 0,
            "stability_checks": 0,
            "bans": 0,
            "time_ms": 0.0,
            "status": None,
        }

    def _edge_unstable(self, removed_before: int, oid: int) -> UnstableStep | None:
        key = (removed_before, oid)
        if key not in self._edge_memo:
            self.stats["stability_checks"] += 1
            self._edge_memo[key] = check_bundle(
                self.inst,
                self.rel,
                self.model.ids_of(removed_before),
                oid,
                mu=self.config.mu,
            )
        return self._edge_memo[key]

    def _search(self, deadline: float):
        """One best-first pass under the current ban set. Returns
        ("goal", order) | ("exhausted", None) | ("timeout", None)."""
        model = self.model
        cfg = self.config
        g: dict[int, int] = {0: 0}
        parent: dict[int, tuple[int, int]] = {}
        counter = 0
        h0 = model.lower_bound(0) if cfg.use_lower_bound else 0
        open_heap = [(h0, 0, 0, 0, 0, 0)]  # f, -count, last id, tick, mask, g
        while open_heap:
            if time.monotonic() > deadline:
                return "timeout", None
            f, negc, last, _, mask, gval = heappop(open_heap)
            if gval > g.get(mask, gval):
                continue  # stale entry
            if mask == model.full:
                order = []
                cur = mask
                while cur:
                    prev, oid = parent[cur]
                    order.append(oid)
                    cur = prev
                order.reverse()
                return "goal", order
            self.stats["expanded"] += 1
            cand = model.removable_mask(mask)
            cand &= ~self.bans.get(mask, 0)
            m = cand
            while m:
                b = m & -m
                m &= m - 1
                i = b.bit_length()
                if cfg.enable_stability:
                    known = self._edge_memo.get((mask, i), _UNKNOWN)
                    if known is not _UNKNOWN and known is not None:
                        continue  # memoized unstable edge, same check a ban encodes
                    if cfg.eager_stability and self._edge_unstable(mask, i) is not None:
                        continue
                succ = mask | b
                ng = gval + model.move_cost(i, mask)
                old = g.get(succ)
                if old is not None and old <= ng:
                    continue
                g[succ] = ng
                parent[succ] = (mask, i)
                h = model.lower_bound(succ) if cfg.use_lower_bound else 0
                counter += 1
                self.stats["generated"] += 1
                heappush(
                    open_heap, (ng + h, -(succ.bit_count()), i, counter, succ, ng)
                )
        return "exhausted", None

    def solve(self) -> PlanResult:
        t0 = time.monotonic()
        deadline = t0 + self.config.time_limit_s
        validate_instance(self.inst, check_stability=self.config.enable_stability)
        model = self.model
        status = None
        order = None
        while True:
            outcome, order = self._search(deadline)
            if outcome == "timeout":
                status = STATUS_TIMEOUT
                break
            if outcome == "exhausted":
                status = STATUS_INFEASIBLE
                break
            if not self.config.enable_stability:
                status = STATUS_OPTIMAL
                break
            # lazy screening of the dequeued goal candidate
            removed = 0
            fail = None
            for k, oid in enumerate(order, start=1):
                step = self._edge_unstable(removed, oid)
                if step is not None:
                    fail = (k, removed, oid)
                    break
                removed |= 1 << (oid - 1)
            if fail is None:
                status = STATUS_OPTIMAL
                break
            _, prefix_mask, bad = fail
            self.bans.setdefault(prefix_mask, 0)
            self.bans[prefix_mask] |= 1 << (bad - 1)
            self.ban_records.append(
                BanRecord(prefix_set=model.ids_of(prefix_mask), banned_next=bad)
            )
            self.stats["bans"] += 1

        self.stats["time_ms"] = (time.monotonic() - t0) * 1e3
        self.stats["status"] = status
        if status != STATUS_OPTIMAL:
            return PlanResult(status=status, stats=dict(self.stats))
        plan = plan_from_removal_order(order, self.rel, self.inst)
        return PlanResult(status=STATUS_OPTIMAL, plan=plan, stats=dict(self.stats))


def solve(inst: Instance, config: PlannerConfig | None = None) -> PlanResult:
    """Compute a provably minimum-length plan (or infeasible/timeout)."""
    return OptimalPlanner(inst, config).solve()


def brute_force_min_cost(inst: Instance, config: PlannerConfig | None = None):
    """Independent oracle: exhaustive minimization over all legal removal
    orders by depth-first enumeration over the removed-set lattice, using the
    same per-edge move costs and the same bundle stability check. Returns
    (min_cost or None, optimal order or None)."""
    config = config or PlannerConfig()
    rel = build_relations(inst)
    model = _Model(inst, rel)
    edge_ok: dict[tuple[int, int], bool] = {}

    def stable_edge(mask: int, i: int) -> bool:
        key = (mask, i)
        if key not in edge_ok:
            edge_ok[key] = (
                check_bundle(inst, rel, model.ids_of(mask), i, mu=config.mu) is None
            )
        return edge_ok[key]

    best: dict[int, tuple[int, tuple]] = {model.full: (0, ())}

    def explore(mask: int):
        if mask in best:
            return best[mask]
        result = None
        cand = model.removable_mask(mask)
        m = cand
        while m:
            b = m & -m
            m &= m - 1
            i = b.bit_length()
            if config.enable_stability and not stable_edge(mask, i):
                continue
            sub = explore(mask | b)
            if sub is None:
                continue
            total = model.move_cost(i, mask) + sub[0]
            if result is None or total < result[0]:
                result = (total, (i,) + sub[1])
        best[mask] = result
        return result

    res = explore(0)
    if res is None:
        return None, None
    return res[0], list(res[1])
