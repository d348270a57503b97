"""Mission model: navigation graph, mission state and problem compilation.

A mission (graph + vehicles + approved obstacles + objective) compiles into a
chronicle planning problem in either the natural or the optimized form.  The
three optimizations are independently switchable: flattened recursion,
complete (transitively closed) robot navigation graph, and encoding the
objective as an end-of-plan condition instead of a subtask.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping

from .chronicles import (
    ACTION,
    BOOLEAN,
    INITIAL,
    METHOD,
    NUMERIC,
    ChronicleTemplate,
    Condition,
    Constraint,
    DisplayInfo,
    Effect,
    PlanningProblem,
    StateVariableSchema,
    Subtask,
    SvRef,
    TaskSignature,
    TypeTree,
    Variable,
)

HUMANS = "Humans"
UAV = "UAV"
UGV = "UGV"
ROBOT_KINDS = (UAV, UGV)
VEHICLE_KINDS = (HUMANS, UAV, UGV)

DEFAULT_SECURE_DURATION = Fraction(900)  # 15 minutes


class MissionError(Exception):
    pass


@dataclass(frozen=True)
class NavigationGraph:
    """Directed location graph with per-kind permissions and durations."""

    locations: Mapping[str, tuple[float, float]]
    edges: Mapping[tuple[str, str], Mapping[str, Fraction]]  # (from, to) -> kind -> dur

    def __post_init__(self):
        object.__setattr__(self, "locations", dict(self.locations))
        object.__setattr__(self, "edges", {k: dict(v) for k, v in self.edges.items()})

    def violations(self) -> list[str]:
        out = []
        for (f, t), modes in self.edges.items():
            if f not in self.locations or t not in self.locations:
                out.append(f"edge {f}->{t} references unknown location")
            for kind, dur in modes.items():
                if kind not in VEHICLE_KINDS:
                    out.append(f"edge {f}->{t}: unknown vehicle kind {kind!r}")
                if dur <= 0:
                    out.append(f"edge {f}->{t}: non-positive duration for {kind}")
        return out

    def permitted(self, kind: str) -> dict[tuple[str, str], Fraction]:
        return {pair: modes[kind] for pair, modes in self.edges.items() if kind in modes}

    def incident_edges(self, location: str) -> tuple[tuple[str, str], ...]:
        return tuple(pair for pair in self.edges if location in pair)


@dataclass(frozen=True)
class Vehicle:
    name: str
    kind: str  # Humans | UAV | UGV
    location: str


@dataclass(frozen=True)
class Obstacle:
    id: str
    type: str  # Obs1, Obs2, ...
    location: str
    edges: tuple[tuple[str, str], ...]  # directed edges it blocks for walking
    secure_duration: Fraction = DEFAULT_SECURE_DURATION


@dataclass(frozen=True)
class ModelVariant:
    flatten: bool = False
    close_graph: bool = False
    objective_as_condition: bool = False

    @classmethod
    def natural(cls) -> "ModelVariant":
        return cls(False, False, False)

    @classmethod
    def optimized(cls) -> "ModelVariant":
        return cls(True, True, True)

    @property
    def label(self) -> str:
        if self == ModelVariant.natural():
            return "natural"
        if self == ModelVariant.optimized():
            return "optimized"
        flags = []
        if self.flatten:
            flags.append("flatten")
        if self.close_graph:
            flags.append("closure")
        if self.objective_as_condition:
            flags.append("objective-condition")
        return "+".join(flags) or "natural"

    @classmethod
    def from_label(cls, label: str) -> "ModelVariant":
        if label == "natural":
            return cls.natural()
        if label == "optimized":
            return cls.optimized()
        parts = set(label.split("+"))
        return cls("flatten" in parts, "closure" in parts,
                   "objective-condition" in parts)


@dataclass(frozen=True)
class MissionState:
    graph: NavigationGraph
    vehicles: tuple[Vehicle, ...]
    obstacles: tuple[Obstacle, ...]
    objective_location: str
    objective_vehicle: str | None = None  # defaults to the Humans group
    variant: ModelVariant = field(default_factory=ModelVariant.natural)
    cluster_threshold: float = 5.0

    def objective_vehicle_name(self) -> str:
        if self.objective_vehicle is not None:
            return self.objective_vehicle
        for v in self.vehicles:
            if v.kind == HUMANS:
                return v.name
        raise MissionError("mission has no Humans group and no explicit objective vehicle")

    def bounds(self, margin: float = 50.0) -> tuple[float, float, float, float]:
        xs = [c[0] for c in self.graph.locations.values()]
        ys = [c[1] for c in self.graph.locations.values()]
        return (min(xs) - margin, min(ys) - margin, max(xs) + margin, max(ys) + margin)

    def nearest_location(self, x: float, y: float) -> str:
        return min(self.graph.locations,
                   key=lambda n: (self.graph.locations[n][0] - x) ** 2
                   + (self.graph.locations[n][1] - y) ** 2)


def obstacle_at(graph: NavigationGraph, obstacle_id: str, location: str,
                obstacle_type: str = "Obs1",
                secure_duration: Fraction = DEFAULT_SECURE_DURATION) -> Obstacle:
    """Obstacle pinned to a node; it blocks walking on all incident edges."""
    if location not in graph.locations:
        raise MissionError(f"obstacle location {location!r} not in graph")
    return Obstacle(obstacle_id, obstacle_type, location,
                    graph.incident_edges(location), secure_duration)


# ---------------------------------------------------------------------------
# graph closure (§ optimization: complete navigation graph)


def close_graph(graph: NavigationGraph) -> NavigationGraph:
    """Transitive closure for robots with shortest-path durations.

    For every ordered pair of locations and every robot kind, an edge exists
    iff a path of kind-permitted edges connects them, and its duration is the
    minimal summed duration.  Human edges are kept as-is: humans need to know
    exactly where they are going.
    """
    new_edges: dict[tuple[str, str], dict[str, Fraction]] = {
        pair: {k: d for k, d in modes.items() if k == HUMANS}
        for pair, modes in graph.edges.items()
    }
    for kind in ROBOT_KINDS:
        adjacency: dict[str, list[tuple[str, Fraction]]] = {}
        for (f, t), dur in graph.permitted(kind).items():
            adjacency.setdefault(f, []).append((t, dur))
        for source in graph.locations:
            dist = _dijkstra(adjacency, source)
            for target, d in dist.items():
                if target == source:
                    continue
                new_edges.setdefault((source, target), {})[kind] = d
    return NavigationGraph(graph.locations,
                           {p: m for p, m in new_edges.items() if m})


def _dijkstra(adjacency: dict[str, list[tuple[str, Fraction]]],
              source: str) -> dict[str, Fraction]:
    dist: dict[str, Fraction] = {source: Fraction(0)}
    heap: list[tuple[Fraction, str]] = [(Fraction(0), source)]
    while heap:
        d, node = heapq.heappop(heap)
        if d > dist[node]:
            continue
        for nxt, w in adjacency.get(node, ()):
            cand = d + w
            if nxt not in dist or cand < dist[nxt]:
                dist[nxt] = cand
                heapq.heappush(heap, (cand, nxt))
    return dist


# ---------------------------------------------------------------------------
# decomposition tree size


def tree_size(variant: ModelVariant, n: int) -> int:
    """Closed-form node count of the goto decomposition at depth ``n``."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    if variant.flatten:
        return 2 + 10 * n
    return 2 + 3 * 4 ** n


# ---------------------------------------------------------------------------
# compilation


def _tp(*names: str) -> tuple[Variable, ...]:
    return tuple(Variable(n, "time") for n in names)


def _seq_constraints(pairs: Iterable[tuple[str, str]]) -> tuple[Constraint, ...]:
    return tuple(Constraint("le", earlier=a, later=b) for a, b in pairs)


def _move_action(name: str, task: str, kind: str, var: str) -> ChronicleTemplate:
    extra_conditions = ()
    if name == "walk":
        extra_conditions = (
            Condition("s", "e", "explored_air", ("f", "t"), True),
            Condition("s", "e", "explored_ground", ("f", "t"), True),
            Condition("s", "e", "obstacle", ("f", "t"), False),
        )
    return ChronicleTemplate(
        name=name, kind=ACTION, task=(task, (var, "f", "t")),
        variables=(Variable(var, kind), Variable("f", "Location"),
                   Variable("t", "Location"), *_tp("s", "e")),
        constraints=(Constraint("neq", a="f", b="t"),
                     Constraint("diff_eq", earlier="s", later="e",
                                amount=SvRef("dur", (var, "f", "t")))),
        conditions=(Condition("s", "s", "loc", (var,), "f"),
                    Condition("s", "e", "path", ("f", "t"), True),
                    *extra_conditions),
        effects=(Effect("s", "e", "loc", (var,), "t"),),
        display=DisplayInfo("Move", var, ("t",), is_move=True),
    )


def _explore_action(name: str, kind: str, fluent: str) -> ChronicleTemplate:
    var = "a" if kind == UAV else "g"
    return ChronicleTemplate(
        name=name, kind=ACTION, task=(name, (var, "f", "t")),
        variables=(Variable(var, kind), Variable("f", "Location"),
                   Variable("t", "Location"), *_tp("s", "e")),
        constraints=(Constraint("neq", a="f", b="t"),
                     Constraint("diff_eq", earlier="s", later="e",
                                amount=SvRef("dur", (var, "f", "t")))),
        conditions=(Condition("s", "s", "loc", (var,), "f"),
                    Condition("s", "e", "path", ("f", "t"), True),
                    Condition("s", "e", "explorable", ("f", "t"), True)),
        # exploring an edge surveys it in both directions and moves the robot
        effects=(Effect("s", "e", fluent, ("f", "t"), True),
                 Effect("s", "e", fluent, ("t", "f"), True),
                 Effect("s", "e", "loc", (var,), "t")),
        display=DisplayInfo("Explore", var, ("f", "t")),
    )


def _goto_methods(flatten: bool) -> list[ChronicleTemplate]:
    noop = ChronicleTemplate(
        name="goto_noop", kind=METHOD, task=("goto", ("v", "t")),
        variables=(Variable("v", "Vehicle"), Variable("t", "Location"), *_tp("s", "e")),
        conditions=(Condition("s", "e", "loc", ("v",), "t"),),
    )
    if not flatten:
        steps = []
        for mname, prim, kind, var in (("goto_uav", "fly", UAV, "a"),
                                       ("goto_ugv", "roll", UGV, "g"),
                                       ("goto_humans", "walk", HUMANS, "h")):
            steps.append(ChronicleTemplate(
                name=mname, kind=METHOD, task=("goto", (var, "t")),
                variables=(Variable(var, kind), Variable("f", "Location"),
                           Variable("i", "Location"), Variable("t", "Location"),
                           *_tp("s", "e", "s1", "e1", "s2", "e2")),
                constraints=(Constraint("neq", a="f", b="t"),
                             *_seq_constraints([("e1", "s2")])),
                subtasks=(Subtask("k1", "s1", "e1", prim, (var, "f", "i")),
                          Subtask("k2", "s2", "e2", "goto", (var, "t"))),
            ))
        return [noop, *steps]
    # flattened: the recursive call appears only once
    step = ChronicleTemplate(
        name="goto_step", kind=METHOD, task=("goto", ("v", "t")),
        variables=(Variable("v", "Vehicle"), Variable("t", "Location"),
                   *_tp("s", "e", "s1", "e1", "s2", "e2")),
        constraints=_seq_constraints([("e1", "s2")]),
        subtasks=(Subtask("k1", "s1", "e1", "goto_once", ("v", "t")),
                  Subtask("k2", "s2", "e2", "goto", ("v", "t"))),
    )
    once = []
    for mname, prim, kind, var in (("goto_once_uav", "fly", UAV, "a"),
                                   ("goto_once_ugv", "roll", UGV, "g"),
                                   ("goto_once_humans", "walk", HUMANS, "h")):
        once.append(ChronicleTemplate(
            name=mname, kind=METHOD, task=("goto_once", (var, "t")),
            variables=(Variable(var, kind), Variable("f", "Location"),
                       Variable("i", "Location"), Variable("t", "Location"),
                       *_tp("s", "e", "s1", "e1")),
            subtasks=(Subtask("k1", "s1", "e1", prim, (var, "f", "i")),),
        ))
    return [noop, step, *once]


def _explore_methods(flatten: bool) -> list[ChronicleTemplate]:
    if not flatten:
        out = []
        for mname, kind, var, prim, forward in (
                ("explore_fwd_air", UAV, "a", "explore_air", True),
                ("explore_fwd_ground", UGV, "g", "explore_ground", True),
                ("explore_bwd_air", UAV, "a", "explore_air", False),
                ("explore_bwd_ground", UGV, "g", "explore_ground", False)):
            here, there = ("f", "t") if forward else ("t", "f")
            out.append(ChronicleTemplate(
                name=mname, kind=METHOD, task=("explore", (var, "f", "t")),
                variables=(Variable(var, kind), Variable("f", "Location"),
                           Variable("t", "Location"),
                           *_tp("s", "e", "s1", "e1", "s2", "e2")),
                constraints=_seq_constraints([("e1", "s2")]),
                subtasks=(Subtask("k1", "s1", "e1", "goto", (var, here)),
                          Subtask("k2", "s2", "e2", prim, (var, here, there))),
            ))
        return out
    out = []
    for mname, forward in (("explore_fwd", True), ("explore_bwd", False)):
        here, there = ("f", "t") if forward else ("t", "f")
        out.append(ChronicleTemplate(
            name=mname, kind=METHOD, task=("explore", ("r", "f", "t")),
            variables=(Variable("r", "Robot"), Variable("f", "Location"),
                       Variable("t", "Location"),
                       *_tp("s", "e", "s1", "e1", "s2", "e2")),
            constraints=_seq_constraints([("e1", "s2")]),
            subtasks=(Subtask("k1", "s1", "e1", "goto", ("r", here)),
                      Subtask("k2", "s2", "e2", "explore_from", ("r", here, there))),
        ))
    for mname, kind, var, prim in (("explore_from_air", UAV, "a", "explore_air"),
                                   ("explore_from_ground", UGV, "g", "explore_ground")):
        out.append(ChronicleTemplate(
            name=mname, kind=METHOD, task=("explore_from", (var, "f", "t")),
            variables=(Variable(var, kind), Variable("f", "Location"),
                       Variable("t", "Location"), *_tp("s", "e", "s1", "e1")),
            subtasks=(Subtask("k1", "s1", "e1", prim, (var, "f", "t")),),
        ))
    return out


def _secure_templates(obstacles: tuple[Obstacle, ...],
                      obstacle_types: tuple[str, ...]) -> list[ChronicleTemplate]:
    if not obstacles:
        return []
    out = []
    for otype in obstacle_types:
        out.append(ChronicleTemplate(
            name=f"secure_method_{otype.lower()}", kind=METHOD,
            task=("secure", ("r", "o")),
            variables=(Variable("r", "Robot"), Variable("o", otype),
                       Variable("l", "Location"),
                       *_tp("s", "e", "s1", "e1", "s2", "e2")),
            constraints=_seq_constraints([("e1", "s2")]),
            conditions=(Condition("s", "s", "obstacle_loc", ("o",), "l"),),
            subtasks=(Subtask("k1", "s1", "e1", "goto", ("r", "l")),
                      Subtask("k2", "s2", "e2", "secure_site", ("r", "o"))),
        ))
    for ob in obstacles:
        out.append(ChronicleTemplate(
            name=f"secure_{ob.id}", kind=ACTION,
            task=("secure_site", ("r", ob.id)),
            variables=(Variable("r", "Robot"), *_tp("s", "e")),
            constraints=(Constraint("diff_eq", earlier="s", later="e",
                                    amount=ob.secure_duration),),
            conditions=(Condition("s", "e", "loc", ("r",), ob.location),),
            effects=tuple(Effect("s", "e", "obstacle", edge, False)
                          for edge in ob.edges),
            display=DisplayInfo("Secure", "r", ()),
        ))
    return out


def _freedom_methods(flatten: bool, with_secure: bool) -> list[ChronicleTemplate]:
    noop = ChronicleTemplate(
        name="freedom_noop", kind=METHOD, task=("freedom", ("v",)),
        variables=(Variable("v", "Vehicle"), *_tp("s", "e")),
    )
    if not flatten:
        out = [
            noop,
            ChronicleTemplate(
                name="freedom_goto", kind=METHOD, task=("freedom", ("v",)),
                variables=(Variable("v", "Vehicle"), Variable("l", "Location"),
                           *_tp("s", "e", "s1", "e1", "s2", "e2")),
                constraints=_seq_constraints([("e1", "s2")]),
                subtasks=(Subtask("k1", "s1", "e1", "goto", ("v", "l")),
                          Subtask("k2", "s2", "e2", "freedom", ("v",)))),
            ChronicleTemplate(
                name="freedom_explore", kind=METHOD, task=("freedom", ("r",)),
                variables=(Variable("r", "Robot"), Variable("f", "Location"),
                           Variable("t", "Location"),
                           *_tp("s", "e", "s1", "e1", "s2", "e2")),
                constraints=_seq_constraints([("e1", "s2")]),
                subtasks=(Subtask("k1", "s1", "e1", "explore", ("r", "f", "t")),
                          Subtask("k2", "s2", "e2", "freedom", ("r",)))),
        ]
        if with_secure:
            out.append(ChronicleTemplate(
                name="freedom_secure", kind=METHOD, task=("freedom", ("r",)),
                variables=(Variable("r", "Robot"), Variable("o", "Obstacle"),
                           *_tp("s", "e", "s1", "e1", "s2", "e2")),
                constraints=_seq_constraints([("e1", "s2")]),
                subtasks=(Subtask("k1", "s1", "e1", "secure", ("r", "o")),
                          Subtask("k2", "s2", "e2", "freedom", ("r",)))))
        return out
    out = [
        noop,
        ChronicleTemplate(
            name="freedom_step", kind=METHOD, task=("freedom", ("v",)),
            variables=(Variable("v", "Vehicle"),
                       *_tp("s", "e", "s1", "e1", "s2", "e2")),
            constraints=_seq_constraints([("e1", "s2")]),
            subtasks=(Subtask("k1", "s1", "e1", "freedom_once", ("v",)),
                      Subtask("k2", "s2", "e2", "freedom", ("v",)))),
        ChronicleTemplate(
            name="freedom_once_goto", kind=METHOD, task=("freedom_once", ("v",)),
            variables=(Variable("v", "Vehicle"), Variable("l", "Location"),
                       *_tp("s", "e", "s1", "e1")),
            subtasks=(Subtask("k1", "s1", "e1", "goto", ("v", "l")),)),
        ChronicleTemplate(
            name="freedom_once_explore", kind=METHOD, task=("freedom_once", ("r",)),
            variables=(Variable("r", "Robot"), Variable("f", "Location"),
                       Variable("t", "Location"), *_tp("s", "e", "s1", "e1")),
            subtasks=(Subtask("k1", "s1", "e1", "explore", ("r", "f", "t")),)),
    ]
    if with_secure:
        out.append(ChronicleTemplate(
            name="freedom_once_secure", kind=METHOD, task=("freedom_once", ("r",)),
            variables=(Variable("r", "Robot"), Variable("o", "Obstacle"),
                       *_tp("s", "e", "s1", "e1")),
            subtasks=(Subtask("k1", "s1", "e1", "secure", ("r", "o")),)))
    return out


def compile(mission: MissionState, variant: ModelVariant | None = None) -> PlanningProblem:
    """Compile a mission into a chronicle planning problem."""
    if variant is None:
        variant = mission.variant
    graph = mission.graph
    bad = graph.violations()
    if bad:
        raise MissionError("; ".join(bad))
    if mission.objective_location not in graph.locations:
        raise MissionError(
            f"objective location {mission.objective_location!r} absent from graph")
    for v in mission.vehicles:
        if v.kind not in VEHICLE_KINDS:
            raise MissionError(f"unknown vehicle kind {v.kind!r} for {v.name!r}")
        if v.location not in graph.locations:
            raise MissionError(f"vehicle {v.name!r} at unknown location {v.location!r}")

    original_edges = tuple(graph.edges)
    if variant.close_graph:
        graph = close_graph(graph)

    obstacle_types = tuple(sorted({ob.type for ob in mission.obstacles})) or ("Obs1",)
    types = TypeTree.from_edges([
        ("Vehicle", "Object"), ("Humans", "Vehicle"), ("Robot", "Vehicle"),
        ("UAV", "Robot"), ("UGV", "Robot"), ("Location", "Object"),
        ("Obstacle", "Object"),
        *((otype, "Obstacle") for otype in obstacle_types),
    ])

    objects: dict[str, str] = {}
    for v in mission.vehicles:
        objects[v.name] = v.kind
    for loc in graph.locations:
        objects[loc] = "Location"
    for ob in mission.obstacles:
        objects[ob.id] = ob.type

    state_variables = (
        StateVariableSchema("loc", ("Vehicle",), "Location"),
        StateVariableSchema("obstacle_loc", ("Obstacle",), "Location"),
        StateVariableSchema("path", ("Location", "Location"), BOOLEAN),
        StateVariableSchema("explorable", ("Location", "Location"), BOOLEAN),
        StateVariableSchema("explored_air", ("Location", "Location"), BOOLEAN),
        StateVariableSchema("explored_ground", ("Location", "Location"), BOOLEAN),
        StateVariableSchema("obstacle", ("Location", "Location"), BOOLEAN),
        StateVariableSchema("dur", ("Vehicle", "Location", "Location"), NUMERIC),
    )

    tasks = [
        TaskSignature("goto", ("Vehicle", "Location")),
        TaskSignature("explore", ("Robot", "Location", "Location")),
        TaskSignature("secure", ("Robot", "Obstacle")),
        TaskSignature("freedom", ("Vehicle",)),
        TaskSignature("walk", ("Humans", "Location", "Location")),
        TaskSignature("fly", ("UAV", "Location", "Location")),
        TaskSignature("roll", ("UGV", "Location", "Location")),
        TaskSignature("explore_air", ("UAV", "Location", "Location")),
        TaskSignature("explore_ground", ("UGV", "Location", "Location")),
        TaskSignature("secure_site", ("Robot", "Obstacle")),
    ]
    if variant.flatten:
        tasks.extend([
            TaskSignature("goto_once", ("Vehicle", "Location")),
            TaskSignature("explore_from", ("Robot", "Location", "Location")),
            TaskSignature("freedom_once", ("Vehicle",)),
        ])

    templates: list[ChronicleTemplate] = [
        _move_action("walk", "walk", HUMANS, "h"),
        _move_action("fly", "fly", UAV, "a"),
        _move_action("roll", "roll", UGV, "g"),
        _explore_action("explore_air", UAV, "explored_air"),
        _explore_action("explore_ground", UGV, "explored_ground"),
        *_goto_methods(variant.flatten),
        *_explore_methods(variant.flatten),
        *_secure_templates(mission.obstacles, obstacle_types),
        *_freedom_methods(variant.flatten, with_secure=bool(mission.obstacles)),
    ]

    # initial chronicle: initial state effects + objectives + freedom subtasks
    effects = [Effect("s", "s", "loc", (v.name,), v.location) for v in mission.vehicles]
    for (f, t), modes in graph.edges.items():
        effects.append(Effect("s", "s", "path", (f, t), True))
        for vehicle in mission.vehicles:
            if vehicle.kind in modes:
                effects.append(Effect("s", "s", "dur", (vehicle.name, f, t),
                                      modes[vehicle.kind]))
    for f, t in original_edges:
        effects.append(Effect("s", "s", "explorable", (f, t), True))
    for ob in mission.obstacles:
        effects.append(Effect("s", "s", "obstacle_loc", (ob.id,), ob.location))
        for edge in ob.edges:
            effects.append(Effect("s", "s", "obstacle", edge, True))

    goal_vehicle = mission.objective_vehicle_name()
    conditions: list[Condition] = []
    subtasks: list[Subtask] = []
    timepoints = ["s", "e"]
    idx = 0

    def add_subtask(task: str, args: tuple):
        nonlocal idx
        idx += 1
        st_s, st_e = f"s{idx}", f"e{idx}"
        timepoints.extend([st_s, st_e])
        subtasks.append(Subtask(f"k{idx}", st_s, st_e, task, args))

    if variant.objective_as_condition:
        conditions.append(Condition("e", "e", "loc", (goal_vehicle,),
                                    mission.objective_location))
    else:
        add_subtask("goto", (goal_vehicle, mission.objective_location))
    for v in mission.vehicles:
        add_subtask("freedom", (v.name,))

    initial = ChronicleTemplate(
        name="initial", kind=INITIAL, task=None,
        variables=_tp(*timepoints),
        constraints=(Constraint("at", later="s", amount=Fraction(0)),),
        conditions=tuple(conditions),
        effects=tuple(effects),
        subtasks=tuple(subtasks),
    )

    return PlanningProblem(
        types=types,
        objects=objects,
        state_variables=state_variables,
        tasks=tuple(tasks),
        templates=tuple(templates),
        initial=initial,
    )


# ---------------------------------------------------------------------------
# mission fixture (de)serialization


def mission_to_json(mission: MissionState) -> dict:
    return {
        "locations": [{"name": n, "x": c[0], "y": c[1]}
                      for n, c in mission.graph.locations.items()],
        "edges": [{"from": f, "to": t,
                   "modes": {k: str(d) for k, d in modes.items()}}
                  for (f, t), modes in mission.graph.edges.items()],
        "vehicles": [{"name": v.name, "kind": v.kind, "location": v.location}
                     for v in mission.vehicles],
        "obstacles": [{"id": ob.id, "type": ob.type, "location": ob.location,
                       "edges": [list(e) for e in ob.edges],
                       "secure_duration": str(ob.secure_duration)}
                      for ob in mission.obstacles],
        "objective": {"location": mission.objective_location,
                      **({"vehicle": mission.objective_vehicle}
                         if mission.objective_vehicle else {})},
        "variant": mission.variant.label,
        "cluster_threshold": mission.cluster_threshold,
    }


def mission_from_json(data: dict) -> MissionState:
    locations = {l["name"]: (float(l["x"]), float(l["y"])) for l in data["locations"]}
    edges: dict[tuple[str, str], dict[str, Fraction]] = {}
    symmetric = data.get("symmetric", False)
    for e in data["edges"]:
        modes = {k: Fraction(d) for k, d in e["modes"].items()}
        edges.setdefault((e["from"], e["to"]), {}).update(modes)
        if symmetric:
            edges.setdefault((e["to"], e["from"]), {}).update(modes)
    graph = NavigationGraph(locations, edges)
    obstacles = []
    for ob in data.get("obstacles", []):
        if "edges" in ob:
            blocked = tuple((e[0], e[1]) for e in ob["edges"])
        else:
            blocked = graph.incident_edges(ob["location"])
        obstacles.append(Obstacle(
            ob["id"], ob.get("type", "Obs1"), ob["location"], blocked,
            Fraction(ob.get("secure_duration", DEFAULT_SECURE_DURATION))))
    return MissionState(
        graph=graph,
        vehicles=tuple(Vehicle(v["name"], v["kind"], v["location"])
                       for v in data["vehicles"]),
        obstacles=tuple(obstacles),
        objective_location=data["objective"]["location"],
        objective_vehicle=data["objective"].get("vehicle"),
        variant=ModelVariant.from_label(data.get("variant", "natural")),
        cluster_threshold=float(data.get("cluster_threshold", 5.0)),
    )


def load_mission(path) -> MissionState:
    with open(path) as fh:
        return mission_from_json(json.load(fh))


def dump_mission(mission: MissionState, path) -> None:
    with open(path, "w") as fh:
        json.dump(mission_to_json(mission), fh, indent=2)


# ---------------------------------------------------------------------------
# shipped scenario fixture (13-location reconstruction of the demo terrain)


def _fixture_data() -> dict:
    text = resources.files("fleetplan.fixtures").joinpath("mission_fig2.json").read_text()
    return json.loads(text)


def scenario_fixture(step: int) -> MissionState:
    """Mission knowledge at the three demo steps.

    Step 1: no known obstacles; step 2: approved obstacle at L5; step 3:
    additional approved obstacle at L2.  Vehicles start at L1, the humans
    must reach L8.
    """
    if step not in (1, 2, 3):
        raise ValueError("step must be 1, 2 or 3")
    mission = mission_from_json(_fixture_data())
    approved = {1: (), 2: ("OB_L5",), 3: ("OB_L5", "OB_L2")}[step]
    return replace(mission,
                   obstacles=tuple(ob for ob in mission.obstacles if ob.id in approved))
