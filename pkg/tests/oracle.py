"""Exhaustive makespan oracle for micro missions.

Enumerates every action sequence up to a length bound, left-shift schedules
each prefix (an action starts as soon as its reads settle and its writes do
not collide with earlier reads or writes), and returns the minimal makespan
over sequences that end with the objective vehicle at the goal.  Built
directly on mission semantics, independent of the planner's search.
"""
from __future__ import annotations

from fractions import Fraction

from fleetplan.domain import HUMANS, UAV, UGV, MissionState

ZERO = Fraction(0)


def _ground_actions(mission: MissionState):
    acts = []
    for v in mission.vehicles:
        at_loc = ("loc", v.name)
        for (f, t), modes in mission.graph.edges.items():
            if v.kind not in modes:
                continue
            dur = modes[v.kind]
            move_conds = [(at_loc, f, False)]
            if v.kind == HUMANS:
                move_conds += [
                    (("ea", f, t), True, True),
                    (("eg", f, t), True, True),
                    (("ob", f, t), False, True),
                ]
            acts.append((f"move:{v.name}:{f}:{t}", dur, move_conds,
                         [(at_loc, t)]))
            if v.kind in (UAV, UGV):
                fluent = "ea" if v.kind == UAV else "eg"
                acts.append((
                    f"explore:{v.name}:{f}:{t}", dur, [(at_loc, f, False)],
                    [((fluent, f, t), True), ((fluent, t, f), True),
                     (at_loc, t)]))
        if v.kind in (UAV, UGV):
            for ob in mission.obstacles:
                acts.append((
                    f"secure:{v.name}:{ob.id}", ob.secure_duration,
                    [(at_loc, ob.location, True)],
                    [(("ob", f, t), False) for f, t in ob.edges]))
    return acts


def oracle_makespan(mission: MissionState,
                    max_actions: int = 9) -> Fraction | None:
    """Minimal makespan, or None when no bounded sequence reaches the goal."""
    goal_atom = ("loc", mission.objective_vehicle_name())
    goal = mission.objective_location
    actions = _ground_actions(mission)

    val = {("loc", v.name): v.location for v in mission.vehicles}
    for ob in mission.obstacles:
        for edge in ob.edges:
            val[("ob", *edge)] = True

    best: list[Fraction | None] = [None]
    seen: dict = {}

    def earliest(conds, effects, val, tend, rend):
        start = ZERO
        for atom, want, _held in conds:
            if val.get(atom, False) != want:
                return None
            start = max(start, tend.get(atom, ZERO))
        for atom, _value in effects:
            start = max(start, tend.get(atom, ZERO), rend.get(atom, ZERO))
        return start

    def dfs(val, tend, rend, makespan, remaining):
        if val.get(goal_atom) == goal:
            if best[0] is None or makespan < best[0]:
                best[0] = makespan
            return  # extensions only grow the makespan
        if remaining == 0:
            return
        key = (frozenset(val.items()), frozenset(tend.items()),
               frozenset(rend.items()))
        prior = seen.get(key)
        if prior is not None and prior <= makespan:
            return
        seen[key] = makespan
        for _label, dur, conds, effects in actions:
            start = earliest(conds, effects, val, tend, rend)
            if start is None:
                continue
            end = start + dur
            if best[0] is not None and max(makespan, end) >= best[0]:
                continue
            v2, t2, r2 = dict(val), dict(tend), dict(rend)
            for atom, _want, held in conds:
                read_until = end if held else start
                if r2.get(atom, ZERO) < read_until:
                    r2[atom] = read_until
            for atom, value in effects:
                v2[atom] = value
                t2[atom] = end
            dfs(v2, t2, r2, max(makespan, end), remaining - 1)

    dfs(val, {}, {}, ZERO, max_actions)
    return best[0]
