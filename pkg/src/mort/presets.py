"""Small hand-built instances exercising the planner's corner cases:
stay-in-place bases, overhangs held by side friction, mutual swap cycles,
and an instance with no stable disassembly order at all."""

from __future__ import annotations

import numpy as np

from .geometry import Polygon, Pose
from .scene import Arrangement, Instance, ObjectShape

_UNIT = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
_WIDE = Polygon(np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]))

# three layer-1 slots on the wide base; the right slot overhangs the base
# edge and is only stable with side friction from the middle slot
_SLOT_A = Pose(-0.45, 0.0, 1)
_SLOT_B = Pose(0.55, 0.0, 1)
_SLOT_C = Pose(1.55, 0.0, 1)


def two_cube_swap(gap: float = 1.5) -> Instance:
    """Two unit cubes exchanging tabletop poses; the minimal cyclic
    conflict, solvable only with one buffer (3 actions)."""
    p1, p2 = Pose(0.0, 0.0, 0), Pose(gap, 0.0, 0)
    return Instance(
        height=1.0,
        objects=(ObjectShape(1, _UNIT), ObjectShape(2, _UNIT)),
        start=Arrangement({1: p1, 2: p2}),
        goal=Arrangement({1: p2, 2: p1}),
    )


def counterweight_cycle(friction: float = 0.5) -> Instance:
    """A wide base (object 1, never moved) carrying three cubes whose goal
    slots form a 3-cycle. Every cube's goal column crosses the base's start
    footprint, so all three must be buffered: optimal cost 6. Orders that
    pick the middle cube before the overhanging one collapse the overhang."""
    return Instance(
        height=1.0,
        objects=(
            ObjectShape(1, _WIDE),
            ObjectShape(2, _UNIT),
            ObjectShape(3, _UNIT),
            ObjectShape(4, _UNIT),
        ),
        start=Arrangement({1: Pose(0.0, 0.0, 0), 2: _SLOT_A, 4: _SLOT_B, 3: _SLOT_C}),
        goal=Arrangement({1: Pose(0.0, 0.0, 0), 3: _SLOT_A, 2: _SLOT_B, 4: _SLOT_C}),
        friction=friction,
    )


def counterweight_swap(friction: float = 0.5) -> Instance:
    """Like counterweight_cycle but with only the two right slots swapping
    and a free-standing cube that never moves: optimal cost 4."""
    return Instance(
        height=1.0,
        objects=(
            ObjectShape(1, _WIDE),
            ObjectShape(2, _UNIT),
            ObjectShape(3, _UNIT),
            ObjectShape(4, _UNIT),
        ),
        start=Arrangement(
            {1: Pose(0.0, 0.0, 0), 2: Pose(3.0, 0.0, 0), 4: _SLOT_B, 3: _SLOT_C}
        ),
        goal=Arrangement(
            {1: Pose(0.0, 0.0, 0), 2: Pose(3.0, 0.0, 0), 3: _SLOT_B, 4: _SLOT_C}
        ),
        friction=friction,
    )


def friction_arch(friction: float = 0.5) -> Instance:
    """Two overhanging cubes leaning on each other over separate pedestals.
    The start and goal are label swaps of the same arch, and removing either
    top cube collapses the other: no stable plan exists."""
    return Instance(
        height=1.0,
        objects=(
            ObjectShape(1, _UNIT),
            ObjectShape(2, _UNIT),
            ObjectShape(3, _UNIT),
            ObjectShape(4, _UNIT),
        ),
        start=Arrangement(
            {
                1: Pose(0.0, 0.0, 0),
                2: Pose(2.1, 0.0, 0),
                3: Pose(0.55, 0.0, 1),
                4: Pose(1.55, 0.0, 1),
            }
        ),
        goal=Arrangement(
            {
                1: Pose(0.0, 0.0, 0),
                2: Pose(2.1, 0.0, 0),
                4: Pose(0.55, 0.0, 1),
                3: Pose(1.55, 0.0, 1),
            }
        ),
        friction=friction,
    )


def overhang_counterweight_stack(friction: float = 0.5) -> Instance:
    """Four objects where an overhanging cube (3) is held down by a
    counterweight cube (4) on top of it; with 4 absent, 3 tips over.
    Start equals goal; used for stability checks only."""
    arr = Arrangement(
        {
            1: Pose(0.0, 0.0, 0),
            2: Pose(2.0, 0.0, 0),
            3: Pose(0.6, 0.0, 1),
            4: Pose(0.3, 0.0, 2),
        }
    )
    return Instance(
        height=1.0,
        objects=(
            ObjectShape(1, _UNIT),
            ObjectShape(2, _UNIT),
            ObjectShape(3, _UNIT),
            ObjectShape(4, _UNIT),
        ),
        start=arr,
        goal=arr,
        friction=friction,
    )
