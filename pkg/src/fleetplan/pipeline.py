"""Operator-facing plan post-processing.

Raw plans are noisy: a route shows up as a run of single-edge moves.  Here
maximal per-vehicle move runs collapse into one Move with the final
destination, plans render as per-robot timeline lanes, and operator edits
(reallocating an action to another vehicle) are re-validated by a fixed
sequence reschedule.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chronicles import ACTION, PlanningProblem
from .solver import Plan, ScheduledAction, reschedule


@dataclass(frozen=True)
class DisplayAction:
    verb: str  # Move | Explore | Secure
    vehicle: str
    targets: tuple[str, ...]
    start: Fraction
    end: Fraction

    def label(self) -> str:
        if self.verb == "Move":
            return f"Move {self.vehicle} to {self.targets[-1]}"
        return f"{self.verb} {self.vehicle} {' '.join(self.targets)}".rstrip()


@dataclass(frozen=True)
class SimplifiedPlan:
    lanes: tuple[tuple[str, tuple[DisplayAction, ...]], ...]
    makespan: Fraction

    def lane(self, vehicle: str) -> tuple[DisplayAction, ...]:
        for name, actions in self.lanes:
            if name == vehicle:
                return actions
        return ()

    @property
    def actions(self) -> tuple[DisplayAction, ...]:
        return tuple(a for _, lane in self.lanes for a in lane)


@dataclass(frozen=True)
class TimelineView:
    """One lane per vehicle; items in a lane never overlap in time."""

    lanes: tuple[tuple[str, tuple[DisplayAction, ...]], ...]
    makespan: Fraction

    def __post_init__(self):
        for vehicle, actions in self.lanes:
            for prev, nxt in zip(actions, actions[1:]):
                if nxt.start < prev.end:
                    raise ValueError(
                        f"overlapping display actions in lane {vehicle}")


def _display(action: ScheduledAction) -> DisplayAction:
    verb = action.display_verb or action.name
    targets = action.display_targets or tuple(action.params[1:])
    return DisplayAction(verb, action.vehicle or action.params[0],
                         targets, action.start, action.end)


def collapse_lane(items: list[DisplayAction]) -> list[DisplayAction]:
    """Merges adjacent Moves; the run keeps only its final destination."""
    out: list[DisplayAction] = []
    for item in items:
        if out and item.verb == "Move" and out[-1].verb == "Move":
            prev = out[-1]
            out[-1] = DisplayAction("Move", prev.vehicle, item.targets,
                                    prev.start, item.end)
        else:
            out.append(item)
    return out


def simplify(plan: Plan) -> SimplifiedPlan:
    """Collapses per-vehicle move runs; non-move actions break a run."""
    by_vehicle: dict[str, list[ScheduledAction]] = {}
    for action in plan.actions:
        key = action.vehicle or action.params[0]
        by_vehicle.setdefault(key, []).append(action)
    lanes = []
    for vehicle in sorted(by_vehicle):
        raw = sorted(by_vehicle[vehicle], key=lambda a: (a.start, a.id))
        lanes.append((vehicle, tuple(collapse_lane([_display(a) for a in raw]))))
    makespan = plan.makespan if plan.makespan is not None else Fraction(0)
    return SimplifiedPlan(lanes=tuple(lanes), makespan=makespan)


def timeline(simplified: SimplifiedPlan) -> TimelineView:
    return TimelineView(lanes=simplified.lanes, makespan=simplified.makespan)


# ---------------------------------------------------------------------------
# reallocation


_FRIENDLY = {
    ("explored_air", True): "path {0}->{1} not explored by air",
    ("explored_ground", True): "path {0}->{1} not explored by ground",
    ("obstacle", False): "obstacle on path {0}->{1} not secured",
    ("path", True): "no path {0}->{1}",
    ("explorable", True): "path {0}->{1} cannot be explored",
}


def _friendly_condition(reason: str) -> str:
    # reschedule reports "condition sv(a, b)=value is not satisfied for sig"
    if not reason.startswith("condition "):
        return reason
    try:
        head, rest = reason.split("=", 1)
        sv, argpart = head[len("condition "):].split("(", 1)
        args = [a.strip() for a in argpart.rstrip(")").split(",")]
        value = rest.split(" is not satisfied", 1)[0]
        value = {"True": True, "False": False}.get(value, value)
        fmt = _FRIENDLY.get((sv.strip(), value))
        if fmt is not None:
            return fmt.format(*args)
        if sv.strip() == "loc":
            return f"{args[0]} is not at {value}"
    except ValueError:
        pass
    return reason


def reallocate(problem: PlanningProblem, plan: Plan, action_id: int,
               new_vehicle: str) -> tuple[Plan | None, str | None]:
    """Rebinds one action's vehicle and reschedules with bindings fixed.

    Returns (plan, None) on success, else (None, reason).  The replacement
    primitive is chosen among action templates sharing the edited action's
    display verb, so e.g. an air explore reallocated to a ground robot
    becomes the ground explore of the same edge.
    """
    target = next((a for a in plan.actions if a.id == action_id), None)
    if target is None:
        return None, f"no action with id {action_id}"
    vtype = problem.objects.get(new_vehicle)
    if vtype is None:
        return None, f"unknown vehicle {new_vehicle!r}"

    old_tpl = next((t for t in problem.templates
                    if t.kind == ACTION and t.name == target.name), None)
    if old_tpl is None:
        return None, f"no template for action {target.name!r}"
    verb = old_tpl.display.verb if old_tpl.display else None
    candidates = [t for t in problem.templates if t.kind == ACTION
                  and t.display and t.display.verb == verb
                  and len(t.task[1]) == len(target.params)]
    chosen = None
    for tpl in candidates:
        var = tpl.var_map().get(tpl.task[1][0])
        if var is not None and problem.types.is_subtype(vtype, var.sort):
            # non-vehicle task arguments must carry over unchanged
            if all(isinstance(f, str) and f in tpl.var_map() or f == p
                   for f, p in zip(tpl.task[1][1:], target.params[1:])):
                chosen = tpl
                break
    if chosen is None:
        return None, "type-inadmissible"

    chains: dict[str, list[tuple[str, tuple[str, ...]]]] = {}
    paths: dict[str, list[tuple[str, ...]]] = {}
    for action in sorted(plan.actions, key=lambda a: (a.start, a.id)):
        name, params = action.name, action.params
        if action.id == action_id:
            name = chosen.name
            params = (new_vehicle, *params[1:])
        chains.setdefault(action.chain, []).append((name, tuple(params)))
        paths.setdefault(action.chain, []).append(tuple(action.path))

    new_plan, reason = reschedule(problem, chains, paths)
    if new_plan is None:
        return None, _friendly_condition(reason)
    return new_plan, None


# ---------------------------------------------------------------------------
# serialization


def display_to_json(a: DisplayAction) -> dict:
    return {"verb": a.verb, "vehicle": a.vehicle, "targets": list(a.targets),
            "start": str(a.start), "end": str(a.end), "label": a.label()}


def simplified_to_json(sp: SimplifiedPlan) -> dict:
    return {
        "makespan": str(sp.makespan),
        "lanes": [{"vehicle": v, "actions": [display_to_json(a) for a in acts]}
                  for v, acts in sp.lanes],
    }
