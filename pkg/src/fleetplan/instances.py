"""Seeded micro-mission generator for randomized solver checks.

Instances stay tiny (at most 3 locations, 2 vehicles, 1 obstacle) so an
exhaustive oracle can enumerate every bounded plan.  Generation is fully
deterministic in the seed.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .domain import (
    HUMANS,
    UAV,
    UGV,
    MissionState,
    NavigationGraph,
    Vehicle,
    obstacle_at,
)


def micro_mission(seed: int) -> MissionState:
    rng = random.Random(seed)
    n_locs = rng.choice((2, 3, 3))
    locs = {f"L{i + 1}": (float(30 * i), float(rng.randint(-10, 10)))
            for i in range(n_locs)}
    names = sorted(locs)

    edges: dict[tuple[str, str], dict[str, Fraction]] = {}
    pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    for a, b in pairs:
        if len(pairs) > 1 and rng.random() < 0.25:
            continue  # drop an edge; unreachable goals stay possible
        robot_d = Fraction(rng.randint(2, 9))
        modes = {UAV: robot_d, UGV: robot_d}
        if rng.random() < 0.75:
            modes[HUMANS] = robot_d * 2
        edges[(a, b)] = dict(modes)
        edges[(b, a)] = dict(modes)

    kinds = rng.choice(((HUMANS, UAV), (HUMANS, UGV), (UAV, UGV),
                        (UAV,), (UGV,)))
    vehicles = tuple(
        Vehicle(f"{kind}{i + 1}" if kind != HUMANS else "H", kind,
                rng.choice(names))
        for i, kind in enumerate(kinds))

    graph = NavigationGraph(locs, edges)
    obstacles = ()
    if edges and rng.random() < 0.4:
        site = rng.choice(names)
        obstacles = (obstacle_at(graph, "OB1", site,
                                 secure_duration=Fraction(rng.randint(4, 12))),)

    goal_vehicle = vehicles[0]
    return MissionState(
        graph=graph, vehicles=vehicles, obstacles=obstacles,
        objective_location=rng.choice(names),
        objective_vehicle=goal_vehicle.name)
