"""Chronicle formalism: types, state variables, tasks and chronicle templates.

A chronicle bundles variables, an achieved task, constraints, conditions,
effects and subtasks.  Action chronicles have effects but no subtasks, method
chronicles have subtasks but no effects, and the unique initial chronicle has
no achieved task.  Everything in this module is immutable and safe to share
across solver workers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Time = Fraction

#: A term is a variable/constant symbol, a boolean literal or a rational.
Term = Union[str, bool, Fraction]

BOOLEAN = "boolean"
NUMERIC = "numeric"
TIME_SORT = "time"
ROOT_TYPE = "Object"


class ChronicleError(Exception):
    """Base error for malformed chronicle data."""


class TypeMismatchError(ChronicleError):
    """A bound value's type is not a subtype of the declared parameter type."""


class UnknownTaskError(ChronicleError):
    """A referenced task is achieved by no chronicle template."""


@dataclass(frozen=True)
class TypeTree:
    """Type hierarchy: every non-root type has exactly one supertype."""

    parents: Mapping[str, str | None]

    def __post_init__(self):
        object.__setattr__(self, "parents", dict(self.parents))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> "TypeTree":
        """Build from (subtype, supertype) pairs; the root is implicit."""
        parents: dict[str, str | None] = {ROOT_TYPE: None}
        for sub, sup in edges:
            parents[sub] = sup
            parents.setdefault(sup, ROOT_TYPE if sup != ROOT_TYPE else None)
        return cls(parents)

    def __contains__(self, name: str) -> bool:
        return name in self.parents

    def is_subtype(self, sub: str, sup: str) -> bool:
        cur: str | None = sub
        seen = set()
        while cur is not None and cur not in seen:
            if cur == sup:
                return True
            seen.add(cur)
            cur = self.parents.get(cur)
        return False

    def violations(self) -> list[str]:
        out = []
        if self.parents.get(ROOT_TYPE, "missing") is not None:
            out.append(f"type tree has no root type {ROOT_TYPE!r}")
        for name, parent in self.parents.items():
            if name == ROOT_TYPE:
                continue
            if parent is None:
                out.append(f"type {name!r} has no supertype and is not {ROOT_TYPE!r}")
            elif parent not in self.parents:
                out.append(f"type {name!r} has unknown supertype {parent!r}")
        # cycle check: walking up from any node must terminate at the root
        for name in self.parents:
            cur, seen = name, set()
            while cur is not None:
                if cur in seen:
                    out.append(f"type cycle through {name!r}")
                    break
                seen.add(cur)
                cur = self.parents.get(cur)
        return out


@dataclass(frozen=True)
class StateVariableSchema:
    """Parametrized fluent, e.g. loc(Vehicle) -> Location."""

    name: str
    params: tuple[str, ...]
    value_type: str  # a type name, "boolean" or "numeric"


@dataclass(frozen=True)
class TaskSignature:
    name: str
    params: tuple[str, ...]


@dataclass(frozen=True)
class Variable:
    name: str
    sort: str  # "time" or a type name

    @property
    def is_temporal(self) -> bool:
        return self.sort == TIME_SORT


@dataclass(frozen=True)
class Constraint:
    """Constraint over chronicle variables.

    kinds:
      eq / neq            a == b / a != b over object terms
      diff_eq / diff_ge   later - earlier == amount / >= amount
      le                  earlier <= later
      at                  timepoint == amount (absolute anchor)
    ``amount`` is a rational or an SvRef into a static numeric fluent.
    """

    kind: str
    a: Term | None = None
    b: Term | None = None
    earlier: str | None = None
    later: str | None = None
    amount: Union[Fraction, "SvRef", None] = None


@dataclass(frozen=True)
class SvRef:
    """Lookup into a (static) state variable, e.g. dur(v, f, t)."""

    sv: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Condition:
    start: str
    end: str
    sv: str
    args: tuple[Term, ...]
    value: Term


@dataclass(frozen=True)
class Effect:
    start: str
    end: str
    sv: str
    args: tuple[Term, ...]
    value: Term


@dataclass(frozen=True)
class Subtask:
    key: str
    start: str
    end: str
    task: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class DisplayInfo:
    """Operator-facing rendering hints for an action template."""

    verb: str  # Move / Explore / Secure
    vehicle_param: str
    target_params: tuple[str, ...]
    is_move: bool = False


ACTION = "action"
METHOD = "method"
INITIAL = "initial"


@dataclass(frozen=True)
class ChronicleTemplate:
    name: str
    kind: str  # action | method | initial
    task: tuple[str, tuple[Term, ...]] | None
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...] = ()
    conditions: tuple[Condition, ...] = ()
    effects: tuple[Effect, ...] = ()
    subtasks: tuple[Subtask, ...] = ()
    start: str = "s"
    end: str = "e"
    display: DisplayInfo | None = None

    def var_map(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def object_vars(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if not v.is_temporal)

    def temporal_vars(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.is_temporal)


@dataclass(frozen=True)
class ChronicleInstance:
    """A (possibly partially) bound and scheduled copy of a template."""

    template: ChronicleTemplate
    binding: Mapping[str, Term] = field(default_factory=dict)
    schedule: Mapping[str, Time] = field(default_factory=dict)
    active: bool = True

    def __post_init__(self):
        object.__setattr__(self, "binding", dict(self.binding))
        object.__setattr__(self, "schedule", dict(self.schedule))

    def resolve(self, term: Term) -> Term:
        if isinstance(term, str):
            return self.binding.get(term, term)
        return term

    def free_variables(self) -> tuple[Variable, ...]:
        return tuple(
            v for v in self.template.object_vars() if v.name not in self.binding
        )

    def conditions(self) -> tuple[Condition, ...]:
        return tuple(
            replace(c, args=tuple(self.resolve(a) for a in c.args), value=self.resolve(c.value))
            for c in self.template.conditions
        )

    def effects(self) -> tuple[Effect, ...]:
        return tuple(
            replace(e, args=tuple(self.resolve(a) for a in e.args), value=self.resolve(e.value))
            for e in self.template.effects
        )

    def subtasks(self) -> tuple[Subtask, ...]:
        return tuple(
            replace(st, args=tuple(self.resolve(a) for a in st.args))
            for st in self.template.subtasks
        )

    def constraints(self) -> tuple[Constraint, ...]:
        out = []
        for x in self.template.constraints:
            amount = x.amount
            if isinstance(amount, SvRef):
                amount = SvRef(amount.sv, tuple(self.resolve(a) for a in amount.args))
            out.append(replace(x, a=self.resolve(x.a) if x.a is not None else None,
                               b=self.resolve(x.b) if x.b is not None else None,
                               amount=amount))
        return tuple(out)


@dataclass(frozen=True)
class PlanningProblem:
    types: TypeTree
    objects: Mapping[str, str]  # name -> type
    state_variables: tuple[StateVariableSchema, ...]
    tasks: tuple[TaskSignature, ...]
    templates: tuple[ChronicleTemplate, ...]
    initial: ChronicleTemplate

    def __post_init__(self):
        object.__setattr__(self, "objects", dict(self.objects))

    def sv_map(self) -> dict[str, StateVariableSchema]:
        return {s.name: s for s in self.state_variables}

    def task_map(self) -> dict[str, TaskSignature]:
        return {t.name: t for t in self.tasks}

    def achievers(self, task_name: str) -> tuple[ChronicleTemplate, ...]:
        return tuple(t for t in self.templates if t.task and t.task[0] == task_name)

    def objects_of_type(self, type_name: str) -> tuple[str, ...]:
        return tuple(
            name for name, tname in self.objects.items()
            if self.types.is_subtype(tname, type_name)
        )


# ---------------------------------------------------------------------------
# instantiation


def instantiate(template: ChronicleTemplate, binding: Mapping[str, Term],
                problem: PlanningProblem | None = None) -> ChronicleInstance:
    """Bind some of a template's variables, checking types against the tree.

    Substitution is applied uniformly across constraints, conditions, effects
    and subtasks (they resolve through the stored binding).  Unbound variables
    stay free.
    """
    var_map = template.var_map()
    for name, value in binding.items():
        if name not in var_map:
            raise ChronicleError(
                f"{template.name}: binding for unknown variable {name!r}")
        var = var_map[name]
        if var.is_temporal:
            if not isinstance(value, (int, Fraction)):
                raise TypeMismatchError(
                    f"{template.name}: temporal variable {name!r} bound to {value!r}")
            continue
        if problem is not None and isinstance(value, str):
            obj_type = problem.objects.get(value)
            if obj_type is None:
                raise TypeMismatchError(
                    f"{template.name}: {name!r} bound to unknown object {value!r}")
            if not problem.types.is_subtype(obj_type, var.sort):
                raise TypeMismatchError(
                    f"{template.name}: {value!r} of type {obj_type!r} is not a "
                    f"subtype of {var.sort!r} for variable {name!r}")
    return ChronicleInstance(template=template, binding=binding)


def merge_instance(inst: ChronicleInstance, more: Mapping[str, Term],
                   problem: PlanningProblem | None = None) -> ChronicleInstance:
    """instantiate(t, b1 | b2) == merge_instance(instantiate(t, b1), b2)."""
    combined = dict(inst.binding)
    for k, v in more.items():
        if k in combined and combined[k] != v:
            raise ChronicleError(f"conflicting rebinding of {k!r}")
        combined[k] = v
    return instantiate(inst.template, combined, problem)


# ---------------------------------------------------------------------------
# problem validation


def validate_problem(problem: PlanningProblem) -> list[str]:
    """Well-formedness check; returns human-readable violations (empty = ok)."""
    out: list[str] = []
    out.extend(problem.types.violations())

    seen_objects = set()
    for name, type_name in problem.objects.items():
        if name in seen_objects:
            out.append(f"duplicate object name {name!r}")
        seen_objects.add(name)
        if type_name not in problem.types:
            out.append(f"object {name!r} has unknown type {type_name!r}")

    sv_map = problem.sv_map()
    for sv in problem.state_variables:
        for p in sv.params:
            if p not in problem.types:
                out.append(f"state variable {sv.name!r}: unknown parameter type {p!r}")
        if sv.value_type not in (BOOLEAN, NUMERIC) and sv.value_type not in problem.types:
            out.append(f"state variable {sv.name!r}: unknown value type {sv.value_type!r}")

    task_map = problem.task_map()
    achiever_counts = {name: 0 for name in task_map}
    initial_count = 0

    def check_template(t: ChronicleTemplate):
        var_map = t.var_map()
        symbols_ok = lambda term: (not isinstance(term, str)) or term in var_map or term in problem.objects

        if t.kind == ACTION and t.subtasks:
            out.append(f"{t.name}: action has subtasks")
        if t.kind == METHOD and t.effects:
            out.append(f"{t.name}: method has effects")
        if t.kind == INITIAL and t.task is not None:
            out.append(f"{t.name}: initial chronicle must not achieve a task")
        if t.kind not in (ACTION, METHOD, INITIAL):
            out.append(f"{t.name}: unknown chronicle kind {t.kind!r}")
        if t.kind != INITIAL:
            if t.task is None:
                out.append(f"{t.name}: non-initial chronicle must achieve a task")
            else:
                name, args = t.task
                sig = task_map.get(name)
                if sig is None:
                    out.append(f"{t.name}: achieved task {name!r} not in task set")
                elif len(args) != len(sig.params):
                    out.append(f"{t.name}: task {name!r} arity mismatch")
        for v in t.variables:
            if not v.is_temporal and v.sort not in problem.types:
                out.append(f"{t.name}: variable {v.name!r} has unknown type {v.sort!r}")
        for group, items in (("condition", t.conditions), ("effect", t.effects)):
            for item in items:
                sv = sv_map.get(item.sv)
                if sv is None:
                    out.append(f"{t.name}: {group} on unknown state variable {item.sv!r}")
                elif len(item.args) != len(sv.params):
                    out.append(f"{t.name}: {group} on {item.sv!r} arity mismatch")
                for term in (*item.args, item.value):
                    if not symbols_ok(term):
                        out.append(f"{t.name}: {group} uses unknown symbol {term!r}")
                for tp in (item.start, item.end):
                    if tp not in var_map or not var_map[tp].is_temporal:
                        out.append(f"{t.name}: {group} uses unknown timepoint {tp!r}")
        for st in t.subtasks:
            sig = task_map.get(st.task)
            if sig is None:
                out.append(f"{t.name}: subtask {st.task!r} not in task set")
            elif len(st.args) != len(sig.params):
                out.append(f"{t.name}: subtask {st.task!r} arity mismatch")
            for term in st.args:
                if not symbols_ok(term):
                    out.append(f"{t.name}: subtask uses unknown symbol {term!r}")

    all_templates = (*problem.templates, problem.initial)
    for t in all_templates:
        check_template(t)
        if t.kind == INITIAL:
            initial_count += 1
        elif t.task is not None and t.task[0] in achiever_counts:
            achiever_counts[t.task[0]] += 1
    if initial_count != 1:
        out.append("initial chronicle not unique")

    referenced = {st.task for t in all_templates for st in t.subtasks}
    for name in sorted(referenced):
        if name in achiever_counts and achiever_counts[name] == 0:
            out.append(f"task {name!r} is referenced but achieved by no template")

    return out


# ---------------------------------------------------------------------------
# decomposition trees


@dataclass
class DecompositionNode:
    """Node of the AND/OR decomposition tree: a task, method or action."""

    kind: str  # "task" | "method" | "action"
    label: str
    instance: ChronicleInstance | None
    children: list["DecompositionNode"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def count(self, kind: str) -> int:
        n = 1 if self.kind == kind else 0
        return n + sum(c.count(kind) for c in self.children)


def recursive_tasks(problem: PlanningProblem) -> frozenset[str]:
    """Tasks that can reach themselves through method decomposition."""
    edges: dict[str, set[str]] = {t.name: set() for t in problem.tasks}
    for t in problem.templates:
        if t.kind == METHOD and t.task is not None:
            for st in t.subtasks:
                edges.setdefault(t.task[0], set()).add(st.task)

    def reaches(src: str, dst: str) -> bool:
        stack, seen = [src], set()
        while stack:
            cur = stack.pop()
            for nxt in edges.get(cur, ()):
                if nxt == dst:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    return frozenset(name for name in edges if reaches(name, name))


def _task_binding(template: ChronicleTemplate, args: Sequence[Term],
                  problem: PlanningProblem) -> dict[str, Term] | None:
    """Unify a template's achieved-task pattern with concrete arguments.

    Arguments that are known objects bind the template's task parameters;
    free symbols leave them unbound.  Returns None when a constant argument
    clashes with the pattern or fails the type check.
    """
    assert template.task is not None
    binding: dict[str, Term] = {}
    var_map = template.var_map()
    for pat, arg in zip(template.task[1], args):
        if isinstance(pat, str) and pat in var_map:
            if isinstance(arg, str) and arg in problem.objects:
                obj_type = problem.objects[arg]
                if not problem.types.is_subtype(obj_type, var_map[pat].sort):
                    return None
                if pat in binding and binding[pat] != arg:
                    return None
                binding[pat] = arg
            elif isinstance(arg, (bool, Fraction)):
                binding[pat] = arg
        else:
            if isinstance(arg, str) and arg in problem.objects and pat != arg:
                return None
    return binding


def ground_task(task: str, args: Sequence[Term], problem: PlanningProblem,
                depth: int) -> DecompositionNode:
    """Expand a task into its AND/OR decomposition tree.

    ``depth`` bounds the number of replacements along each recursive-task
    chain; once exhausted, methods still containing a recursive task are
    removed since they cannot be completed.  Non-recursive tasks expand
    freely.  Each task occurrence, method and action is one node.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    recursive = recursive_tasks(problem)
    task_map = problem.task_map()

    def fmt(name: str, arglist: Sequence[Term]) -> str:
        return f"{name}({', '.join(str(a) for a in arglist)})"

    def achievers_of(name: str) -> tuple[ChronicleTemplate, ...]:
        if name not in task_map:
            raise UnknownTaskError(f"unknown task {name!r}")
        found = problem.achievers(name)
        if not found:
            raise UnknownTaskError(f"no chronicle template achieves task {name!r}")
        return found

    def method_is_closed(template: ChronicleTemplate) -> bool:
        """True when the method contains no recursive task to expand."""
        return all(st.task not in recursive for st in template.subtasks)

    def expand(name: str, arglist: tuple[Term, ...], budget: int) -> DecompositionNode:
        node = DecompositionNode("task", fmt(name, arglist), None)
        inner = budget - 1 if name in recursive else budget
        for template in achievers_of(name):
            binding = _task_binding(template, arglist, problem)
            if binding is None:
                continue
            inst = instantiate(template, binding, problem)
            if template.kind == ACTION:
                node.children.append(
                    DecompositionNode("action", fmt(template.name, arglist), inst))
                continue
            if name in recursive and budget == 0 and not method_is_closed(template):
                continue  # undecomposable leaf: the method is removed
            mnode = DecompositionNode("method", fmt(template.name, arglist), inst)
            for st in inst.subtasks():
                sub_achievers = achievers_of(st.task)
                if all(a.kind == ACTION for a in sub_achievers):
                    for a in sub_achievers:
                        sub_binding = _task_binding(a, st.args, problem)
                        if sub_binding is None:
                            continue
                        mnode.children.append(DecompositionNode(
                            "action", fmt(a.name, st.args),
                            instantiate(a, sub_binding, problem)))
                else:
                    mnode.children.append(expand(st.task, st.args, inner))
            node.children.append(mnode)
        return node

    return expand(task, tuple(args), depth)


# ---------------------------------------------------------------------------
# JSON interchange


def _term_to_json(term: Term):
    if isinstance(term, bool):
        return term
    if isinstance(term, Fraction):
        return str(term)
    return term


def _term_from_json(value) -> Term:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str) and value and (value[0].isdigit() or value[0] == "-") \
            and all(c.isdigit() or c in "/-" for c in value):
        try:
            return Fraction(value)
        except ValueError:
            return value
    return value


def _amount_to_json(amount):
    if amount is None:
        return None
    if isinstance(amount, SvRef):
        return {"sv": amount.sv, "args": [_term_to_json(a) for a in amount.args]}
    return str(amount)


def _amount_from_json(value):
    if value is None:
        return None
    if isinstance(value, dict):
        return SvRef(value["sv"], tuple(_term_from_json(a) for a in value["args"]))
    return Fraction(value)


def template_to_json(t: ChronicleTemplate) -> dict:
    data = {
        "name": t.name,
        "kind": t.kind,
        "task": None if t.task is None else
            {"name": t.task[0], "args": [_term_to_json(a) for a in t.task[1]]},
        "variables": [{"name": v.name, "sort": v.sort} for v in t.variables],
        "start": t.start,
        "end": t.end,
        "constraints": [
            {"kind": x.kind,
             **({"a": _term_to_json(x.a)} if x.a is not None else {}),
             **({"b": _term_to_json(x.b)} if x.b is not None else {}),
             **({"earlier": x.earlier} if x.earlier is not None else {}),
             **({"later": x.later} if x.later is not None else {}),
             **({"amount": _amount_to_json(x.amount)} if x.amount is not None else {})}
            for x in t.constraints],
        "conditions": [
            {"start": c.start, "end": c.end, "sv": c.sv,
             "args": [_term_to_json(a) for a in c.args], "value": _term_to_json(c.value)}
            for c in t.conditions],
        "effects": [
            {"start": e.start, "end": e.end, "sv": e.sv,
             "args": [_term_to_json(a) for a in e.args], "value": _term_to_json(e.value)}
            for e in t.effects],
        "subtasks": [
            {"key": st.key, "start": st.start, "end": st.end,
             "task": st.task, "args": [_term_to_json(a) for a in st.args]}
            for st in t.subtasks],
    }
    if t.display is not None:
        data["display"] = {"verb": t.display.verb,
                           "vehicle_param": t.display.vehicle_param,
                           "target_params": list(t.display.target_params),
                           "is_move": t.display.is_move}
    return data


def template_from_json(data: dict) -> ChronicleTemplate:
    display = None
    if "display" in data:
        d = data["display"]
        display = DisplayInfo(d["verb"], d["vehicle_param"],
                              tuple(d["target_params"]), d.get("is_move", False))
    return ChronicleTemplate(
        name=data["name"],
        kind=data["kind"],
        task=None if data.get("task") is None else
            (data["task"]["name"], tuple(_term_from_json(a) for a in data["task"]["args"])),
        variables=tuple(Variable(v["name"], v["sort"]) for v in data["variables"]),
        start=data.get("start", "s"),
        end=data.get("end", "e"),
        constraints=tuple(
            Constraint(kind=x["kind"],
                       a=_term_from_json(x["a"]) if "a" in x else None,
                       b=_term_from_json(x["b"]) if "b" in x else None,
                       earlier=x.get("earlier"), later=x.get("later"),
                       amount=_amount_from_json(x.get("amount")))
            for x in data.get("constraints", ())),
        conditions=tuple(
            Condition(c["start"], c["end"], c["sv"],
                      tuple(_term_from_json(a) for a in c["args"]),
                      _term_from_json(c["value"]))
            for c in data.get("conditions", ())),
        effects=tuple(
            Effect(e["start"], e["end"], e["sv"],
                   tuple(_term_from_json(a) for a in e["args"]),
                   _term_from_json(e["value"]))
            for e in data.get("effects", ())),
        subtasks=tuple(
            Subtask(st["key"], st["start"], st["end"], st["task"],
                    tuple(_term_from_json(a) for a in st["args"]))
            for st in data.get("subtasks", ())),
        display=display,
    )


def problem_to_json(problem: PlanningProblem) -> dict:
    return {
        "types": [{"name": n, "parent": p}
                  for n, p in problem.types.parents.items() if p is not None],
        "objects": [{"name": n, "type": t} for n, t in problem.objects.items()],
        "state_variables": [
            {"name": s.name, "params": list(s.params), "value_type": s.value_type}
            for s in problem.state_variables],
        "tasks": [{"name": t.name, "params": list(t.params)} for t in problem.tasks],
        "chronicles": [template_to_json(t) for t in problem.templates],
        "initial": template_to_json(problem.initial),
    }


def problem_from_json(data: dict) -> PlanningProblem:
    return PlanningProblem(
        types=TypeTree.from_edges((t["name"], t["parent"]) for t in data["types"]),
        objects={o["name"]: o["type"] for o in data["objects"]},
        state_variables=tuple(
            StateVariableSchema(s["name"], tuple(s["params"]), s["value_type"])
            for s in data["state_variables"]),
        tasks=tuple(TaskSignature(t["name"], tuple(t["params"])) for t in data["tasks"]),
        templates=tuple(template_from_json(t) for t in data["chronicles"]),
        initial=template_from_json(data["initial"]),
    )


def dump_problem(problem: PlanningProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_json(problem), fh, indent=2)


def load_problem(path) -> PlanningProblem:
    with open(path) as fh:
        return problem_from_json(json.load(fh))
