"""Seeded benchmark instance generators: 2D pyramids, 3D pyramids and
random piles, each in an in-place or disjoint variant.

All randomness flows through a splitmix64 stream so instances are
bit-identical across platforms for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Polygon, Pose, overlap_area
from .scene import Arrangement, Instance, ObjectShape, validate_instance

SCENARIO_PYRAMID2D = "pyramid2d"
SCENARIO_PYRAMID3D = "pyramid3d"
SCENARIO_RANDOM = "random"

MODE_IN_PLACE = "in_place"
MODE_DISJOINT = "disjoint"

MAX_PILE_ATTEMPTS = 1000

_UNIT_SQUARE = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


class SplitMix64:
    """Deterministic 64-bit stream (splitmix64)."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        # rejection sampling keeps the draw unbiased
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of [0, n)."""
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randrange(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


@dataclass(frozen=True)
class GenSpec:
    scenario: str
    size: int  # layers m for pyramids, object count n for random piles
    mode: str = MODE_IN_PLACE
    seed: int = 0
    region: float = 5.0

    def __post_init__(self):
        if self.scenario not in (SCENARIO_PYRAMID2D, SCENARIO_PYRAMID3D, SCENARIO_RANDOM):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.mode not in (MODE_IN_PLACE, MODE_DISJOINT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.size < 1:
            raise ValueError("size must be >= 1")


def generate(spec: GenSpec) -> Instance:
    if spec.scenario == SCENARIO_PYRAMID2D:
        return gen_pyramid2d(spec.size, spec.mode, spec.seed)
    if spec.scenario == SCENARIO_PYRAMID3D:
        return gen_pyramid3d(spec.size, spec.mode, spec.seed)
    return gen_random_pile(spec.size, spec.mode, spec.seed, region=spec.region)


def _pyramid2d_slots(m: int) -> list[Pose]:
    slots = []
    for layer in range(m):  # layer i (0-based) holds m - i cubes
        for k in range(m - layer):
            slots.append(Pose(x=0.5 * layer + k, y=0.0, layer=layer))
    return slots


def _pyramid3d_slots(m: int) -> list[Pose]:
    slots = []
    for layer in range(m):  # layer i holds (m - i)^2 cubes in a centered grid
        side = m - layer
        for kx in range(side):
            for ky in range(side):
                slots.append(Pose(x=0.5 * layer + kx, y=0.5 * layer + ky, layer=layer))
    return slots


def _pyramid_instance(slots: list[Pose], mode: str, seed: int, span: float) -> Instance:
    n = len(slots)
    rng = SplitMix64(seed)
    perm = rng.permutation(n)  # goal labels drawn uniformly at random
    if mode == MODE_DISJOINT:
        shift = span + 2.0
        goal_slots = [Pose(p.x + shift, p.y, p.layer, p.yaw) for p in slots]
    else:
        goal_slots = slots
    objects = tuple(ObjectShape(i + 1, _UNIT_SQUARE) for i in range(n))
    start = Arrangement({i + 1: slots[i] for i in range(n)})
    goal = Arrangement({perm[i] + 1: goal_slots[i] for i in range(n)})
    return Instance(height=1.0, objects=objects, start=start, goal=goal)


def gen_pyramid2d(m: int, mode: str = MODE_IN_PLACE, seed: int = 0) -> Instance:
    """m-layer triangle of unit cubes along the x axis, n = m(m+1)/2."""
    return _pyramid_instance(_pyramid2d_slots(m), mode, seed, span=float(m))


def gen_pyramid3d(m: int, mode: str = MODE_IN_PLACE, seed: int = 0) -> Instance:
    """m-layer square pyramid of unit cubes, n = sum of squares."""
    return _pyramid_instance(_pyramid3d_slots(m), mode, seed, span=float(m))


def gen_random_pile(
    n: int, mode: str = MODE_IN_PLACE, seed: int = 0, region: float = 5.0
) -> Instance:
    """Random piles in a region x region square. Cubes spawn sequentially at
    uniform (x, y); an overlapping cube lands on top of the highest cube it
    overlaps. A cube whose placement makes the pile-so-far unstable is
    redrawn (bounded attempts), so every prefix of the pile is stable."""
    from .geometry import transform_footprint
    from .stability import is_stable

    rng = SplitMix64(seed)
    objects = tuple(ObjectShape(i, _UNIT_SQUARE) for i in range(1, n + 1))
    goal_offset = 0.0 if mode == MODE_IN_PLACE else region + 2.0

    def draw(offset: float) -> Arrangement:
        poses: dict[int, Pose] = {}
        fps: dict[int, Polygon] = {}
        for oid in range(1, n + 1):
            for _ in range(MAX_PILE_ATTEMPTS):
                x = offset + rng.uniform() * (region - 1.0)
                y = rng.uniform() * (region - 1.0)
                fp = transform_footprint(_UNIT_SQUARE, Pose(x, y, 0))
                top = -1
                for other, ofp in fps.items():
                    if overlap_area(fp, ofp) > 1e-9 and poses[other].layer > top:
                        top = poses[other].layer
                trial = dict(poses)
                trial[oid] = Pose(x, y, top + 1)
                arr = Arrangement(trial)
                prefix = tuple(ObjectShape(i, _UNIT_SQUARE) for i in range(1, oid + 1))
                tmp = Instance(height=1.0, objects=prefix, start=arr, goal=arr)
                if is_stable(tmp, arr).stable:
                    poses[oid] = trial[oid]
                    fps[oid] = fp
                    break
            else:
                raise RuntimeError(
                    f"no stable pose for object {oid} in {MAX_PILE_ATTEMPTS} attempts"
                )
        return Arrangement(poses)

    start = draw(0.0)
    goal = draw(goal_offset)
    inst = Instance(height=1.0, objects=objects, start=start, goal=goal)
    validate_instance(inst, check_stability=False)
    return inst
