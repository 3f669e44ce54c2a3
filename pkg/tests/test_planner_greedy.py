import pytest

from mort import presets
from mort.generators import gen_pyramid2d, gen_pyramid3d, gen_random_pile
from mort.planner_greedy import greedy_removal_order, solve_greedy
from mort.planner_optimal import (
    STATUS_OPTIMAL,
    STATUS_UNSTABLE,
    PlannerConfig,
    solve,
)
from mort.relations import build_relations, removable
from mort.scene import simulate_plan

CFG = PlannerConfig(time_limit_s=60.0)
NO_STAB = PlannerConfig(time_limit_s=60.0, enable_stability=False)

# 3-layer pyramid relabeling where the greedy baseline needs 11 actions but
# the exact planner finds a 10-action plan (pinned by seed search)
GREEDY_GAP_SEED = 8


class TestRemovalOrder:
    def test_order_is_legal(self):
        for seed in range(5):
            inst = gen_random_pile(8, seed=seed)
            rel = build_relations(inst)
            removed = set()
            for oid in greedy_removal_order(inst, rel):
                assert removable(oid, removed, rel)
                removed.add(oid)
            assert len(removed) == inst.n

    def test_order_deterministic(self):
        inst = gen_pyramid2d(4, seed=3)
        rel = build_relations(inst)
        assert greedy_removal_order(inst, rel) == greedy_removal_order(inst, rel)

    def test_top_down_group_clearing(self):
        # clearing a bottom cube must first remove everything stacked on it
        inst = gen_pyramid2d(3, seed=0)
        rel = build_relations(inst)
        order = greedy_removal_order(inst, rel)
        pos = {oid: k for k, oid in enumerate(order)}
        for (upper, lower) in rel.start_above:
            assert pos[upper] < pos[lower]


class TestGreedySolve:
    def test_presets(self):
        assert solve_greedy(presets.two_cube_swap(), CFG).cost == 3
        assert solve_greedy(presets.counterweight_cycle(), CFG).cost == 6
        assert solve_greedy(presets.counterweight_swap(), CFG).cost == 4

    def test_arch_reports_unstable(self):
        r = solve_greedy(presets.friction_arch(), CFG)
        assert r.status == STATUS_UNSTABLE
        assert r.plan is None
        assert r.stats["unstable_bundle"] >= 1

    def test_plans_replay_cleanly(self):
        for seed in range(8):
            inst = gen_random_pile(9, seed=seed)
            r = solve_greedy(inst, CFG)
            if r.status == STATUS_OPTIMAL:
                simulate_plan(inst, r.plan)

    def test_never_beats_optimal(self):
        for seed in range(10):
            inst = gen_random_pile(8, seed=seed)
            g = solve_greedy(inst, NO_STAB)
            o = solve(inst, NO_STAB)
            assert g.status == STATUS_OPTIMAL and o.status == STATUS_OPTIMAL
            assert g.cost >= o.cost

    def test_known_gap_on_three_layer_pyramid(self):
        inst = gen_pyramid2d(3, seed=GREEDY_GAP_SEED)
        g = solve_greedy(inst, CFG)
        o = solve(inst, CFG)
        assert (g.status, g.cost) == (STATUS_OPTIMAL, 11)
        assert (o.status, o.cost) == (STATUS_OPTIMAL, 10)

    @pytest.mark.parametrize(
        "inst",
        [gen_pyramid2d(4, seed=2), gen_pyramid3d(2, seed=2)],
        ids=["pyramid2d", "pyramid3d"],
    )
    def test_pyramids_succeed(self, inst):
        r = solve_greedy(inst, CFG)
        assert r.status == STATUS_OPTIMAL
        simulate_plan(inst, r.plan)
