"""Optimal and greedy pick-n-place planning for multi-layer tabletop
rearrangement with statically stable intermediate arrangements."""

from .geometry import (
    GeometryError,
    Polygon,
    Pose,
    centroid,
    overlap_area,
    polygon_area,
    polygon_intersection,
    transform_footprint,
)
from .scene import (
    Action,
    Arrangement,
    Instance,
    InvariantError,
    ObjectShape,
    Plan,
    PlanViolation,
    SceneError,
    SchemaError,
    UnstableArrangementError,
    load_instance,
    load_plan,
    save_instance,
    save_plan,
    simulate_plan,
    validate_arrangement,
    validate_instance,
)
from .relations import Relations, build_relations, placement_closure, removable
from .stability import StabilityVerdict, is_stable, move_cost
from .planner_optimal import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT,
    STATUS_UNSTABLE,
    OptimalPlanner,
    PlannerConfig,
    PlanResult,
    solve,
)
from .planner_greedy import solve_greedy
from .generators import (
    GenSpec,
    SplitMix64,
    gen_pyramid2d,
    gen_pyramid3d,
    gen_random_pile,
    generate,
)

__version__ = "1.0.0"

__all__ = [
    "Action",
    "Arrangement",
    "GenSpec",
    "GeometryError",
    "Instance",
    "InvariantError",
    "ObjectShape",
    "OptimalPlanner",
    "Plan",
    "PlanResult",
    "PlanViolation",
    "PlannerConfig",
    "Polygon",
    "Pose",
    "Relations",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_TIMEOUT",
    "STATUS_UNSTABLE",
    "SceneError",
    "SchemaError",
    "SplitMix64",
    "StabilityVerdict",
    "UnstableArrangementError",
    "build_relations",
    "centroid",
    "gen_pyramid2d",
    "gen_pyramid3d",
    "gen_random_pile",
    "generate",
    "is_stable",
    "load_instance",
    "load_plan",
    "move_cost",
    "overlap_area",
    "placement_closure",
    "polygon_area",
    "polygon_intersection",
    "removable",
    "save_instance",
    "save_plan",
    "simulate_plan",
    "solve",
    "solve_greedy",
    "transform_footprint",
    "validate_arrangement",
    "validate_instance",
]
