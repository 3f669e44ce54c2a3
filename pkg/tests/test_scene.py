import json
import math

import numpy as np
import pytest

from mort import presets
from mort.geometry import Polygon, Pose
from mort.scene import (
    Action,
    Arrangement,
    Instance,
    InvariantError,
    ObjectShape,
    Plan,
    PlanViolation,
    SchemaError,
    UnstableArrangementError,
    load_instance,
    load_plan,
    poses_equal,
    save_instance,
    save_plan,
    simulate_plan,
    stay_in_place,
    validate_arrangement,
    validate_instance,
)

UNIT = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def cubes(n):
    return tuple(ObjectShape(i, UNIT) for i in range(1, n + 1))


def inst_of(start, goal, n=None, **kw):
    n = n or len(start)
    return Instance(
        height=1.0,
        objects=cubes(n),
        start=Arrangement(start),
        goal=Arrangement(goal),
        **kw,
    )


class TestModelValidation:
    def test_ids_must_be_contiguous(self):
        with pytest.raises(InvariantError):
            Instance(
                height=1.0,
                objects=(ObjectShape(1, UNIT), ObjectShape(3, UNIT)),
                start=Arrangement({1: Pose(0, 0, 0), 3: Pose(2, 0, 0)}),
                goal=Arrangement({1: Pose(0, 0, 0), 3: Pose(2, 0, 0)}),
            )

    def test_arrangements_must_cover_all_objects(self):
        with pytest.raises(InvariantError):
            inst_of({1: Pose(0, 0, 0)}, {1: Pose(0, 0, 0), 2: Pose(2, 0, 0)}, n=2)

    def test_friction_range(self):
        with pytest.raises(InvariantError):
            inst_of({1: Pose(0, 0, 0)}, {1: Pose(0, 0, 0)}, friction=2.5)

    def test_action_shapes(self):
        Action(1, "start", "goal")
        Action(1, "start", "buffer")
        Action(1, "buffer", "goal")
        with pytest.raises(InvariantError):
            Action(1, "buffer", "buffer")
        with pytest.raises(InvariantError):
            Action(1, "goal", "start")

    def test_plan_counters(self):
        p = Plan(
            (
                Action(1, "start", "buffer"),
                Action(2, "start", "goal"),
                Action(1, "buffer", "goal"),
            )
        )
        assert p.cost == 3
        assert p.buffers == 1


class TestPoseComparison:
    def test_tolerant_equality(self):
        assert poses_equal(Pose(0, 0, 1), Pose(1e-7, -1e-7, 1))
        assert not poses_equal(Pose(0, 0, 1), Pose(0, 0, 2))
        assert not poses_equal(Pose(0, 0, 1), Pose(1e-3, 0, 1))

    def test_yaw_wraparound(self):
        assert poses_equal(Pose(0, 0, 0, 0.0), Pose(0, 0, 0, 2.0 * math.pi - 1e-9))

    def test_stay_in_place(self):
        inst = presets.counterweight_cycle()
        assert stay_in_place(inst, 1)
        assert not stay_in_place(inst, 2)


class TestArrangementValidation:
    def test_collision_detected(self):
        inst = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(0.5, 0, 0)},
            {1: Pose(0, 0, 0), 2: Pose(0.5, 0, 0)},
        )
        bad = validate_arrangement(inst, inst.start)
        assert bad == ["collision(1,2)"]

    def test_unsupported_detected(self):
        inst = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(3, 0, 1)},
            {1: Pose(0, 0, 0), 2: Pose(3, 0, 1)},
        )
        assert validate_arrangement(inst, inst.start) == ["unsupported(2)"]

    def test_edge_touching_is_not_collision(self):
        inst = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(1.0, 0, 0)},
            {1: Pose(0, 0, 0), 2: Pose(1.0, 0, 0)},
        )
        assert validate_arrangement(inst, inst.start) == []

    def test_validate_instance_stability_gate(self):
        # cube hanging half off its support tips over
        bad = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(0.8, 0, 1)},
            {1: Pose(0, 0, 0), 2: Pose(0.8, 0, 1)},
        )
        validate_instance(bad, check_stability=False)
        with pytest.raises(UnstableArrangementError):
            validate_instance(bad, check_stability=True)


class TestSimulatePlan:
    def test_two_cube_swap_replay(self):
        inst = presets.two_cube_swap()
        plan = Plan(
            (
                Action(1, "start", "buffer"),
                Action(2, "start", "goal"),
                Action(1, "buffer", "goal"),
            )
        )
        states = simulate_plan(inst, plan)
        assert len(states) == 3
        assert poses_equal(states[-1][1], inst.goal[1])

    def test_pick_of_covered_object_rejected(self):
        inst = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(0.2, 0, 1)},
            {1: Pose(3, 0, 0), 2: Pose(0.2, 0, 1)},
        )
        plan = Plan((Action(1, "start", "goal"),))
        with pytest.raises(PlanViolation) as e:
            simulate_plan(inst, plan)
        assert e.value.index == 0

    def test_place_collision_rejected(self):
        inst = presets.two_cube_swap()
        # moving 1 straight onto 2's occupied pose must fail
        plan = Plan((Action(1, "start", "goal"),))
        with pytest.raises(PlanViolation):
            simulate_plan(inst, plan)

    def test_unbuffered_retrieval_rejected(self):
        inst = presets.two_cube_swap()
        plan = Plan((Action(1, "buffer", "goal"),))
        with pytest.raises(PlanViolation):
            simulate_plan(inst, plan)

    def test_leftover_buffer_rejected(self):
        inst = inst_of({1: Pose(0, 0, 0)}, {1: Pose(3, 0, 0)})
        plan = Plan((Action(1, "start", "buffer"),))
        with pytest.raises(PlanViolation) as e:
            simulate_plan(inst, plan)
        assert "buffer" in str(e.value)

    def test_final_mismatch_rejected(self):
        inst = inst_of(
            {1: Pose(0, 0, 0), 2: Pose(3, 0, 0)},
            {1: Pose(0, 0, 0), 2: Pose(5, 0, 0)},
        )
        plan = Plan(())
        with pytest.raises(PlanViolation) as e:
            simulate_plan(inst, plan)
        assert "final mismatch" in str(e.value)


class TestSerialization:
    def test_instance_roundtrip(self):
        inst = presets.counterweight_cycle()
        back = load_instance(save_instance(inst))
        assert back.n == inst.n
        assert back.friction == inst.friction
        for oid in range(1, inst.n + 1):
            assert poses_equal(back.start[oid], inst.start[oid])
            assert poses_equal(back.goal[oid], inst.goal[oid])
            assert back.shape(oid).base == inst.shape(oid).base

    def test_plan_roundtrip(self):
        plan = Plan(
            (
                Action(2, "start", "buffer"),
                Action(3, "start", "goal"),
                Action(2, "buffer", "goal"),
            )
        )
        back = load_plan(save_plan(plan, stats={"expanded": 5}))
        assert back == plan

    def test_rejects_bad_json(self):
        with pytest.raises(SchemaError):
            load_instance(b"{not json")
        with pytest.raises(SchemaError):
            load_plan(b"[]")

    def test_rejects_wrong_version(self):
        doc = json.loads(save_instance(presets.two_cube_swap()))
        doc["format_version"] = 99
        with pytest.raises(SchemaError):
            load_instance(json.dumps(doc))

    def test_rejects_missing_keys(self):
        doc = json.loads(save_instance(presets.two_cube_swap()))
        del doc["objects"]
        with pytest.raises(SchemaError):
            load_instance(json.dumps(doc))

    def test_rejects_cost_mismatch(self):
        doc = json.loads(save_plan(Plan((Action(1, "start", "goal"),))))
        doc["cost"] = 7
        with pytest.raises(SchemaError):
            load_plan(json.dumps(doc))

    def test_rejects_duplicate_pose(self):
        doc = json.loads(save_instance(presets.two_cube_swap()))
        doc["start"].append(dict(doc["start"][0]))
        with pytest.raises(SchemaError):
            load_instance(json.dumps(doc))
