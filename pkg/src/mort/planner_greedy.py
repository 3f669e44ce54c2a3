"""Greedy best-first baseline.

Start dependencies are processed in topological order (bottom layer first,
ascending id within a layer). For each object, the objects whose start
poses sit on its goal column are cleared by breadth-first recursion over
the start support structure, each cleared object going straight to its
goal when possible and to a buffer otherwise; buffered objects are flushed
eagerly. No backtracking: with stability enabled, the run fails at the
first action that leaves an unstable arrangement.
"""

from __future__ import annotations

from .planner_optimal import (
    STATUS_UNSTABLE,
    STATUS_OPTIMAL,
    PlannerConfig,
    PlanResult,
    plan_from_removal_order,
)
from .relations import build_relations, removable
from .scene import Instance, validate_instance
from .stability import first_unstable_step


def greedy_removal_order(inst: Instance, rel) -> list[int]:
    """The deterministic removal order produced by the greedy recursion."""
    removed: list[int] = []
    removed_set: set[int] = set()

    above: dict[int, set[int]] = {i: set() for i in range(1, inst.n + 1)}
    for (i, k) in rel.start_above:
        above[k].add(i)

    def remove_rec(j: int) -> None:
        """Remove j and everything transitively resting on it: breadth-first
        collection upward, then removal top layer first, ascending id."""
        if j in removed_set:
            return
        group = {j}
        frontier = {j}
        while frontier:
            frontier = set().union(*(above[k] for k in frontier)) - group
            group |= frontier
        for k in sorted(group - removed_set, key=lambda i: (-inst.start[i].layer, i)):
            removed_set.add(k)
            removed.append(k)

    topo = sorted(range(1, inst.n + 1), key=lambda i: (inst.start[i].layer, i))
    for i in topo:
        if i in removed_set:
            continue
        # free i's goal column, recursively unblocking from the start structure
        for j in sorted(rel.goal_column_blockers[i]):
            if j not in removed_set:
                remove_rec(j)
        remove_rec(i)
    return removed


def solve_greedy(inst: Instance, config: PlannerConfig | None = None) -> PlanResult:
    """Run the greedy baseline; the result is feasible but not necessarily
    optimal, and `unstable` when stability screening rejects an action."""
    import time

    config = config or PlannerConfig()
    t0 = time.monotonic()
    validate_instance(inst, check_stability=config.enable_stability)
    rel = build_relations(inst)
    order = greedy_removal_order(inst, rel)
    assert len(order) == inst.n
    plan = plan_from_removal_order(order, rel, inst)
    stats = {"expanded": len(order), "bans": 0, "status": STATUS_OPTIMAL}
    if config.enable_stability:
        step = first_unstable_step(inst, order, rel, mu=config.mu)
        if step is not None:
            stats["status"] = STATUS_UNSTABLE
            stats["unstable_bundle"] = step.bundle
            stats["unstable_micro"] = step.micro
            stats["time_ms"] = (time.monotonic() - t0) * 1e3
            return PlanResult(status=STATUS_UNSTABLE, plan=None, stats=stats)
    stats["time_ms"] = (time.monotonic() - t0) * 1e3
    return PlanResult(status=STATUS_OPTIMAL, plan=plan, stats=stats)
