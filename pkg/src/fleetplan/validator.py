"""Independent plan validation by timeline replay.

The validator never inspects solver internals.  It regrounds every scheduled
action from its template, replays all effects into per-state-variable
timelines, and checks each condition against the resulting value history.
An effect [s,e]sv<-v leaves the variable undetermined on the open interval
]s,e[, so no condition interval and no other transition window may overlap
it; a condition may begin exactly where the supporting transition settles.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chronicles import (
    ACTION,
    BOOLEAN,
    ChronicleTemplate,
    PlanningProblem,
    SvRef,
)
from .solver import Plan, ScheduledAction

Atom = tuple


@dataclass(frozen=True)
class _Transition:
    start: Fraction
    end: Fraction
    value: object
    source: str  # human-readable originator


def _fmt_atom(atom: Atom) -> str:
    name, *args = atom
    return f"{name}({', '.join(str(a) for a in args)})"


def _fmt_value(value) -> str:
    return {True: "true", False: "false"}.get(value, str(value))


class _Grounder:
    """Grounds one scheduled action against its template."""

    def __init__(self, problem: PlanningProblem):
        self.problem = problem
        self.templates = {t.name: t for t in problem.templates
                          if t.kind == ACTION}
        self.value_types = {s.name: s.value_type for s in problem.state_variables}
        # static lookup tables come from the initial chronicle's instant effects
        self.static: dict[Atom, object] = {}
        for eff in problem.initial.effects:
            self.static[(eff.sv, *eff.args)] = eff.value

    def default(self, atom: Atom):
        if self.value_types.get(atom[0]) == BOOLEAN:
            return False
        return None

    def ground(self, action: ScheduledAction, out: list[str]):
        """Returns (conditions, transitions) or None after reporting errors."""
        tpl = self.templates.get(action.name)
        if tpl is None:
            out.append(f"{action.signature()}: no action template named "
                       f"{action.name!r}")
            return None
        binding = self._bind(tpl, action, out)
        if binding is None:
            return None
        times = {tpl.start: action.start, tpl.end: action.end}

        def resolve(term):
            if isinstance(term, str) and term in binding:
                return binding[term]
            return term

        ok = self._check_constraints(tpl, action, binding, times, out)
        conds = []
        for c in tpl.conditions:
            atom = (c.sv, *(resolve(a) for a in c.args))
            conds.append((times[c.start], times[c.end], atom, resolve(c.value)))
        trans = []
        for e in tpl.effects:
            atom = (e.sv, *(resolve(a) for a in e.args))
            trans.append((atom, _Transition(times[e.start], times[e.end],
                                            resolve(e.value),
                                            action.signature())))
        return (conds, trans) if ok else None

    def _bind(self, tpl: ChronicleTemplate, action: ScheduledAction,
              out: list[str]):
        _task, formal = tpl.task
        if len(formal) != len(action.params):
            out.append(f"{action.signature()}: expects {len(formal)} task "
                       f"arguments, got {len(action.params)}")
            return None
        binding: dict[str, str] = {}
        var_names = {v.name for v in tpl.object_vars()}
        for name, value in zip(formal, action.params):
            if isinstance(name, str) and name in var_names:
                if binding.setdefault(name, value) != value:
                    out.append(f"{action.signature()}: conflicting bindings "
                               f"for {name!r}")
                    return None
            elif name != value:
                out.append(f"{action.signature()}: task argument {value!r} "
                           f"does not match constant {name!r}")
                return None
        missing = var_names - set(binding)
        if missing:
            out.append(f"{action.signature()}: unbound variables "
                       f"{sorted(missing)}")
            return None
        for var in tpl.object_vars():
            otype = self.problem.objects.get(binding[var.name])
            if otype is None or not self.problem.types.is_subtype(otype, var.sort):
                out.append(f"{action.signature()}: {binding[var.name]!r} is "
                           f"not of type {var.sort}")
                return None
        return binding

    def _check_constraints(self, tpl, action, binding, times, out) -> bool:
        ok = True

        def resolve(term):
            if isinstance(term, str) and term in binding:
                return binding[term]
            return term

        for x in tpl.constraints:
            if x.kind == "eq" and resolve(x.a) != resolve(x.b):
                out.append(f"{action.signature()}: {x.a} = {x.b} violated")
                ok = False
            elif x.kind == "neq" and resolve(x.a) == resolve(x.b):
                out.append(f"{action.signature()}: {x.a} != {x.b} violated")
                ok = False
            elif x.kind in ("diff_eq", "diff_ge"):
                amount = x.amount
                if isinstance(amount, SvRef):
                    atom = (amount.sv, *(resolve(a) for a in amount.args))
                    amount = self.static.get(atom)
                    if amount is None:
                        out.append(f"{action.signature()}: no value for "
                                   f"{_fmt_atom(atom)}")
                        ok = False
                        continue
                diff = times[x.later] - times[x.earlier]
                if x.kind == "diff_eq" and diff != amount:
                    out.append(f"{action.signature()}: duration {diff} != "
                               f"{amount}")
                    ok = False
                elif x.kind == "diff_ge" and diff < amount:
                    out.append(f"{action.signature()}: {x.later} - {x.earlier}"
                               f" = {diff} < {amount}")
                    ok = False
            elif x.kind == "le" and times[x.earlier] > times[x.later]:
                out.append(f"{action.signature()}: {x.earlier} <= {x.later} "
                           f"violated")
                ok = False
            elif x.kind == "at" and times[x.later] != x.amount:
                out.append(f"{action.signature()}: {x.later} != {x.amount}")
                ok = False
        return ok


def _overlaps(a_start, a_end, b_start, b_end) -> bool:
    return a_start < b_end and b_start < a_end


def validate_plan(problem: PlanningProblem, plan: Plan) -> list[str]:
    """All violations found by replaying the plan; empty means valid."""
    out: list[str] = []
    if not plan.found:
        out.append(f"plan carries no schedule (status {plan.status})")
        return out

    grounder = _Grounder(problem)
    makespan = plan.makespan
    timelines: dict[Atom, list[_Transition]] = {}
    conditions: list[tuple[Fraction, Fraction, Atom, object, str]] = []

    for eff in problem.initial.effects:
        atom = (eff.sv, *eff.args)
        timelines.setdefault(atom, []).append(
            _Transition(Fraction(0), Fraction(0), eff.value, "initial state"))
    times = {problem.initial.start: Fraction(0), problem.initial.end: makespan}
    for c in problem.initial.conditions:
        conditions.append((times[c.start], times[c.end], (c.sv, *c.args),
                           c.value, "initial chronicle"))

    for action in plan.actions:
        if action.start < 0 or action.end > makespan:
            out.append(f"{action.signature()}: interval [{action.start}, "
                       f"{action.end}] outside [0, {makespan}]")
        grounded = grounder.ground(action, out)
        if grounded is None:
            continue
        conds, trans = grounded
        for cs, ce, atom, value in conds:
            conditions.append((cs, ce, atom, value, action.signature()))
        for atom, tr in trans:
            timelines.setdefault(atom, []).append(tr)

    # per-chain refinement: subtasks of one method are totally ordered
    by_chain: dict[str, list[ScheduledAction]] = {}
    for action in plan.actions:
        by_chain.setdefault(action.chain, []).append(action)
    for chain, actions in by_chain.items():
        actions.sort(key=lambda a: (a.start, a.id))
        for prev, nxt in zip(actions, actions[1:]):
            if nxt.start < prev.end:
                out.append(f"chain {chain}: {nxt.signature()} starts before "
                           f"{prev.signature()} ends")

    # transitions on one ground variable must not overlap
    for atom, trans in timelines.items():
        trans.sort(key=lambda t: (t.start, t.end))
        for prev, nxt in zip(trans, trans[1:]):
            if nxt.start < prev.end or (
                    _overlaps(prev.start, prev.end, nxt.start, nxt.end)):
                out.append(f"conflicting transitions on {_fmt_atom(atom)}: "
                           f"{prev.source} and {nxt.source}")

    # every condition needs a settled supporting value and a quiet interval
    for cs, ce, atom, value, source in conditions:
        trans = timelines.get(atom, [])
        supporter = None
        for tr in trans:
            if tr.end <= cs:
                supporter = tr
        held = supporter.value if supporter is not None \
            else grounder.default(atom)
        if held != value:
            out.append(f"{source}: condition {_fmt_atom(atom)}="
                       f"{_fmt_value(value)} unsupported at {cs} "
                       f"(value is {_fmt_value(held)})")
            continue
        for tr in trans:
            if tr.end <= cs:
                continue
            if tr.start < ce:
                out.append(f"{source}: condition {_fmt_atom(atom)}="
                           f"{_fmt_value(value)} on [{cs}, {ce}] broken by "
                           f"transition from {tr.source}")
                break

    out.extend(_check_chain_closure(problem, by_chain, grounder, timelines))
    return out


def _value_at(timelines, grounder, atom: Atom, t: Fraction):
    supporter = None
    for tr in timelines.get(atom, ()):  # sorted already
        if tr.end <= t:
            supporter = tr
    return supporter.value if supporter is not None else grounder.default(atom)


def _check_chain_closure(problem, by_chain, grounder, timelines) -> list[str]:
    """Each initial subtask must be closable once its chain's actions end.

    A task is closable when some achieving method with no subtasks and no
    effects has all conditions satisfied under the task binding at the
    chain's final timepoint.  Tasks with no such terminal method are left to
    the per-action checks.
    """
    out = []
    for st in problem.initial.subtasks:
        terminals = [t for t in problem.templates
                     if t.task and t.task[0] == st.task
                     and not t.subtasks and not t.effects]
        if not terminals:
            continue
        actions = by_chain.get(st.key, [])
        t_end = max((a.end for a in actions), default=Fraction(0))
        closable = False
        for tpl in terminals:
            binding = dict(zip(tpl.task[1], st.args))
            satisfied = True
            for c in tpl.conditions:
                atom = (c.sv, *(binding.get(a, a) for a in c.args))
                want = binding.get(c.value, c.value)
                if _value_at(timelines, grounder, atom, t_end) != want:
                    satisfied = False
                    break
            if satisfied:
                closable = True
                break
        if not closable:
            args = ", ".join(str(a) for a in st.args)
            out.append(f"task {st.task}({args}) is not achieved at {t_end}")
    return out
