import pytest

from mort import presets
from mort.generators import gen_pyramid2d, gen_pyramid3d, gen_random_pile
from mort.planner_optimal import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT,
    OptimalPlanner,
    PlannerConfig,
    brute_force_min_cost,
    plan_from_removal_order,
    solve,
)
from mort.relations import build_relations
from mort.scene import DEST_BUFFER, simulate_plan

FAST = PlannerConfig(time_limit_s=60.0)
NO_STAB = PlannerConfig(time_limit_s=60.0, enable_stability=False)


class TestPresets:
    def test_two_cube_swap_costs_three(self):
        r = solve(presets.two_cube_swap(), FAST)
        assert r.status == STATUS_OPTIMAL
        assert r.cost == 3
        assert r.plan.buffers == 1

    def test_counterweight_cycle_costs_six(self):
        inst = presets.counterweight_cycle()
        r = solve(inst, FAST)
        assert r.status == STATUS_OPTIMAL
        assert r.cost == 6
        assert all(a.object != 1 for a in r.plan.actions)  # base never moves
        simulate_plan(inst, r.plan)

    def test_counterweight_swap_costs_four(self):
        inst = presets.counterweight_swap()
        r = solve(inst, FAST)
        assert r.status == STATUS_OPTIMAL
        assert r.cost == 4
        assert {a.object for a in r.plan.actions} == {3, 4}
        simulate_plan(inst, r.plan)

    def test_arch_infeasible_with_stability(self):
        for mu in (0.5, 1.0):
            r = solve(presets.friction_arch(), PlannerConfig(time_limit_s=60, mu=mu))
            assert r.status == STATUS_INFEASIBLE
            assert r.stats["bans"] >= 1

    def test_arch_solvable_without_stability(self):
        r = solve(presets.friction_arch(), NO_STAB)
        assert r.status == STATUS_OPTIMAL
        # one top cube buffers, the other then moves direct into the vacated
        # slot, and the buffered one follows: 3 actions once physics is ignored
        assert r.cost == 3


class TestSearchMechanics:
    def test_plans_replay_cleanly(self):
        for seed in range(5):
            inst = gen_random_pile(7, seed=seed)
            r = solve(inst, FAST)
            if r.status == STATUS_OPTIMAL:
                states = simulate_plan(inst, r.plan)
                assert len(states) == r.cost

    def test_timeout_status(self):
        inst = gen_pyramid2d(6, seed=0)
        r = solve(inst, PlannerConfig(time_limit_s=1e-4, enable_stability=False))
        assert r.status == STATUS_TIMEOUT
        assert r.plan is None

    def test_lower_bound_admissible_on_small_instances(self):
        for seed in range(10):
            inst = gen_random_pile(6, seed=seed)
            with_lb = solve(inst, NO_STAB)
            without_lb = solve(
                inst,
                PlannerConfig(
                    time_limit_s=60, enable_stability=False, use_lower_bound=False
                ),
            )
            assert with_lb.cost == without_lb.cost

    def test_eager_stability_matches_lazy(self):
        for seed in range(5):
            inst = gen_random_pile(6, seed=seed)
            lazy = solve(inst, FAST)
            eager = solve(
                inst, PlannerConfig(time_limit_s=60, eager_stability=True)
            )
            assert lazy.status == eager.status
            assert lazy.cost == eager.cost

    def test_ban_records_are_real_collapses(self):
        from mort.stability import check_bundle

        inst = presets.friction_arch()
        planner = OptimalPlanner(inst, FAST)
        result = planner.solve()
        assert result.status == STATUS_INFEASIBLE
        rel = planner.rel
        for ban in planner.ban_records:
            assert check_bundle(inst, rel, ban.prefix_set, ban.banned_next) is not None

    def test_plan_from_removal_order_flushes_buffers(self):
        inst = presets.two_cube_swap()
        rel = build_relations(inst)
        plan = plan_from_removal_order([1, 2], rel, inst)
        assert plan.cost == 3
        assert [a.destination for a in plan.actions].count(DEST_BUFFER) == 1
        simulate_plan(inst, plan)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(12))
    def test_random_piles_match_brute_force(self, seed):
        inst = gen_random_pile(6, seed=seed)
        r = solve(inst, FAST)
        want, order = brute_force_min_cost(inst, FAST)
        if want is None:
            assert r.status == STATUS_INFEASIBLE
        else:
            assert r.status == STATUS_OPTIMAL
            assert r.cost == want

    @pytest.mark.parametrize("seed", range(6))
    def test_pyramid_relabels_match_brute_force(self, seed):
        inst = gen_pyramid2d(3, seed=seed)
        r = solve(inst, FAST)
        want, _ = brute_force_min_cost(inst, FAST)
        assert r.status == STATUS_OPTIMAL
        assert r.cost == want

    def test_presets_match_brute_force(self):
        for inst in (
            presets.two_cube_swap(),
            presets.counterweight_cycle(),
            presets.counterweight_swap(),
            presets.friction_arch(),
        ):
            r = solve(inst, FAST)
            want, _ = brute_force_min_cost(inst, FAST)
            if want is None:
                assert r.status == STATUS_INFEASIBLE
            else:
                assert r.cost == want


class TestScaling:
    def test_pyramid2d_m6_within_budget(self):
        import time

        t0 = time.monotonic()
        r = solve(gen_pyramid2d(6, seed=0), PlannerConfig(time_limit_s=60))
        assert r.status == STATUS_OPTIMAL
        assert time.monotonic() - t0 < 60.0

    def test_pyramid3d_m3_within_budget(self):
        import time

        t0 = time.monotonic()
        r = solve(gen_pyramid3d(3, seed=0), PlannerConfig(time_limit_s=60))
        assert r.status == STATUS_OPTIMAL
        assert time.monotonic() - t0 < 60.0
