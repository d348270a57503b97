"""Makespan-optimal search over chronicle decompositions.

The initial chronicle's subtasks become independent chains.  Search proceeds
by decision epochs: at each node one chain either commits its next primitive
action (found by lazily descending method decompositions) or finishes through
zero-action methods.  Actions are committed in nondecreasing start order,
which is complete for left-shifted schedules.  Branch-and-bound on the
incumbent makespan plus dominance memoization over (pending chains, state)
keep the search exact and finite within the decomposition depth bound.

Deterministic tie-breaking: among equal makespans prefer fewer actions, then
the lexicographically smallest multiset of action signatures.
"""
from __future__ import annotations

import heapq
import itertools
import math
import threading
import time as _time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from .chronicles import (
    ACTION,
    BOOLEAN,
    INITIAL,
    ChronicleTemplate,
    PlanningProblem,
    SvRef,
    recursive_tasks,
)
from .stn import SimpleTemporalNetwork

ZERO = Fraction(0)

Atom = tuple  # (state variable name, *ground arguments)


class SolverError(Exception):
    pass


@dataclass(frozen=True)
class ScheduledAction:
    id: int
    name: str
    params: tuple[str, ...]  # achieved-task arguments, fully bound
    vehicle: str | None
    start: Fraction
    end: Fraction
    chain: str  # key of the initial subtask this action refines
    path: tuple[str, ...]  # decomposition lineage: task/method labels
    display_verb: str | None = None
    display_targets: tuple[str, ...] = ()
    is_move: bool = False

    @property
    def duration(self) -> Fraction:
        return self.end - self.start

    def signature(self) -> str:
        return f"{self.name}({', '.join(self.params)})"


@dataclass(frozen=True)
class Plan:
    status: str  # optimal | feasible | timeout | cancelled | infeasible
    actions: tuple[ScheduledAction, ...] = ()
    makespan: Fraction | None = None
    optimal: bool = False
    variant: str | None = None
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def found(self) -> bool:
        return self.makespan is not None

    def lex_key(self) -> tuple[str, ...]:
        return tuple(sorted(a.signature() for a in self.actions))


@dataclass
class SolveConfig:
    depth: int | None = None  # default: 2 x number of locations
    optimal: bool = True
    time_budget: float | None = None
    cancel: threading.Event | None = None
    on_incumbent: Callable[[Plan], None] | None = None
    memo_cap: int = 8


@dataclass(frozen=True)
class SearchNode:
    """Committed prefix of a search branch, for bound computations."""

    actions: tuple[ScheduledAction, ...]


def lower_bound(node: SearchNode) -> Fraction:
    """Earliest feasible makespan of the node's committed actions.

    Builds a temporal network with the committed start anchors, duration
    constraints and per-chain precedence, then asks for the earliest value of
    the makespan timepoint.  Admissible: completions only add constraints.
    """
    stn = SimpleTemporalNetwork()
    stn.add_timepoint("makespan")
    by_chain: dict[str, list[ScheduledAction]] = {}
    for a in node.actions:
        by_chain.setdefault(a.chain, []).append(a)
    for chain_actions in by_chain.values():
        chain_actions.sort(key=lambda a: (a.start, a.id))
        prev_end = None
        for a in chain_actions:
            s, e = f"s{a.id}", f"e{a.id}"
            stn.add_timepoint(s)
            stn.add_timepoint(e)
            stn.add_constraint("__origin__", s, lower=a.start, upper=a.start)
            stn.add_constraint(s, e, lower=a.duration, upper=a.duration)
            stn.add_constraint(e, "makespan", lower=ZERO)
            if prev_end is not None:
                stn.add_constraint(prev_end, s, lower=ZERO)
            prev_end = e
    return stn.earliest("makespan")


# ---------------------------------------------------------------------------
# ground model


class _Ground:
    """A fully bound action template, ready for fast applicability checks."""

    __slots__ = ("name", "task_args", "duration", "conds", "effects", "mono",
                 "vehicle", "display_verb", "display_targets", "is_move", "sig",
                 "allowed", "mv_to", "mv_frm", "uncond")

    def __init__(self, name, task_args, duration, conds, effects, mono,
                 vehicle, display_verb, display_targets, is_move):
        self.allowed = True
        self.mv_to = None
        self.mv_frm = None
        self.uncond = False
        self.name = name
        self.task_args = task_args
        self.duration = duration
        self.conds = conds      # ((atom, value, at_start), ...)
        self.effects = effects  # ((atom, value), ...)
        self.mono = mono        # monotone subset of effects
        self.vehicle = vehicle
        self.display_verb = display_verb
        self.display_targets = display_targets
        self.is_move = is_move
        self.sig = f"{name}({', '.join(str(a) for a in task_args)})"


def _is_free(term) -> bool:
    return isinstance(term, str) and term.startswith("?")


class _Model:
    """Preprocessed problem: static state, ground actions, indices."""

    def __init__(self, problem: PlanningProblem):
        self.problem = problem
        self.recursive = recursive_tasks(problem)
        self.sv_map = problem.sv_map()
        self.defaults = {
            s.name: (False if s.value_type == BOOLEAN else None)
            for s in problem.state_variables
        }

        written = {e.sv for t in problem.templates if t.kind == ACTION
                   for e in t.effects}
        self.static_svs = {s.name for s in problem.state_variables
                           if s.name not in written}

        # monotone fluents: every action effect writes one constant value
        effect_values: dict[str, set] = {}
        for t in problem.templates:
            if t.kind != ACTION:
                continue
            for e in t.effects:
                effect_values.setdefault(e.sv, set()).add(
                    e.value if isinstance(e.value, bool) else "<var>")
        self.monotone = {sv: next(iter(vals)) for sv, vals in effect_values.items()
                         if len(vals) == 1 and isinstance(next(iter(vals)), bool)}

        self.static: dict[Atom, object] = {}
        self.init_values: dict[Atom, object] = {}
        for e in problem.initial.effects:
            atom = (e.sv, *e.args)
            if e.sv in self.static_svs:
                self.static[atom] = e.value
            else:
                self.init_values[atom] = e.value

        self.goals: list[tuple[Atom, object]] = [
            ((c.sv, *c.args), c.value)
            for c in problem.initial.conditions if c.sv not in self.static_svs
        ]

        methods_first_closed = lambda t: (
            any(st.task in self.recursive for st in t.subtasks), t.name)
        self.achievers: dict[str, list[ChronicleTemplate]] = {}
        for t in problem.templates:
            if t.task is not None:
                self.achievers.setdefault(t.task[0], []).append(t)
        for name, tpls in self.achievers.items():
            actions = sorted((t for t in tpls if t.kind == ACTION),
                             key=lambda t: t.name)
            methods = sorted((t for t in tpls if t.kind != ACTION),
                             key=methods_first_closed)
            self.achievers[name] = actions + methods

        self.ground: dict[str, list[_Ground]] = {}
        for t in problem.templates:
            if t.kind == ACTION:
                self.ground[t.name] = sorted(self._ground_template(t),
                                             key=lambda g: g.sig)

        self.readable: set[Atom] = set()
        for gas in self.ground.values():
            for ga in gas:
                for atom, _value, _at_start in ga.conds:
                    if atom[0] in self.monotone:
                        self.readable.add(atom)
        for atom, _value in self.goals:
            if atom[0] in self.monotone:
                self.readable.add(atom)

        self.by_task: dict[tuple, _Ground] = {}
        for gas in self.ground.values():
            for ga in gas:
                self.by_task[(ga.name, ga.task_args)] = ga

        self.locations = len(problem.objects_of_type("Location"))

        # all temporal arithmetic runs on integers scaled by the lcm of the
        # duration denominators; exact rationals are restored on output
        dens = [ga.duration.denominator
                for gas in self.ground.values() for ga in gas]
        self.scale = math.lcm(*dens) if dens else 1
        for gas in self.ground.values():
            for ga in gas:
                ga.duration = int(ga.duration * self.scale)

        self._analyze_moves()

        # index ground actions by their first at-start condition so the
        # search only scans the ones matching the current state
        self.ground_idx: dict[str, tuple[list[Atom], dict, list]] = {}
        for name, gas in self.ground.items():
            atoms: list[Atom] = []
            buckets: dict[tuple, list] = {}
            loose: list[_Ground] = []
            for ga in gas:
                key_cond = next(((a, v) for a, v, s in ga.conds if s), None)
                if key_cond is None:
                    loose.append(ga)
                    continue
                atom, value = key_cond
                if atom not in atoms:
                    atoms.append(atom)
                buckets.setdefault((atom, value), []).append(ga)
            self.ground_idx[name] = (atoms, buckets, loose)

    def _analyze_moves(self) -> None:
        """Relevance analysis for position changes.

        A move is a displayed is_move action; its position atom is the one it
        both reads at start and writes.  Anchors of a vehicle are the places
        where it can do something that matters: required positions of its
        useful non-move actions, goal positions, and constant targets of the
        root subtasks.  A move with no dynamic conditions besides its own
        position can always be rerouted along a duration-shortest path to an
        anchor, so moves off every such path are discarded.  Conditional
        moves (e.g. on foot, gated by exploration) are kept as is.
        """
        edges: dict[str, list[tuple[str, str, Fraction]]] = {}
        pos_atom: dict[str, Atom] = {}
        unconditional: dict[int, tuple[str, str, str]] = {}
        non_moves: dict[str, list[_Ground]] = {}
        for gas in self.ground.values():
            for ga in gas:
                if ga.vehicle is None:
                    continue
                if not ga.is_move:
                    non_moves.setdefault(ga.vehicle, []).append(ga)
                eff_atoms = {atom for atom, _v in ga.effects}
                frm = atom = None
                for c_atom, c_value, _s in ga.conds:
                    if c_atom in eff_atoms:
                        atom, frm = c_atom, c_value
                        break
                if atom is None:
                    continue
                to = dict(ga.effects)[atom]
                pos_atom.setdefault(ga.vehicle, atom)
                edges.setdefault(ga.vehicle, []).append((frm, to, ga.duration))
                if ga.is_move:
                    ga.mv_to = to
                    ga.mv_frm = frm
                    if all(c_atom in eff_atoms for c_atom, _v, _s in ga.conds):
                        ga.uncond = True
                        unconditional[id(ga)] = (ga.vehicle, frm, to)

        anchors: dict[str, set[str]] = {v: set() for v in edges}
        for vehicle, gas in non_moves.items():
            atom = pos_atom.get(vehicle)
            for ga in gas:
                if ga.mono and not any(a in self.readable for a, _v in ga.mono):
                    continue
                for c_atom, c_value, _s in ga.conds:
                    if c_atom == atom:
                        anchors.setdefault(vehicle, set()).add(c_value)
        for atom, value in self.goals:
            for vehicle, p in pos_atom.items():
                if atom == p:
                    anchors.setdefault(vehicle, set()).add(value)
        vehicles = set(pos_atom)
        self.chain_targets: dict[str, tuple[str, str]] = {}
        for st in self.problem.initial.subtasks:
            veh = [a for a in st.args if a in vehicles]
            locs = [a for a in st.args
                    if isinstance(a, str) and a not in vehicles and
                    any(a == e[0] or a == e[1] for es in edges.values() for e in es)]
            if len(veh) == 1 and len(locs) == 1:
                anchors.setdefault(veh[0], set()).add(locs[0])
                self.chain_targets[st.key] = (veh[0], locs[0])

        self.goal_targets = [
            (vehicle, atom, value)
            for atom, value in self.goals
            for vehicle, p in pos_atom.items() if atom == p]

        # fwd[vehicle][x][y] = shortest travel duration from x to y, over the
        # vehicle's complete move graph (dynamic gating ignored: admissible)
        self.fwd: dict[str, dict[str, dict[str, Fraction]]] = {}
        self.pos_atom = pos_atom
        for vehicle, es in edges.items():
            adj: dict[str, list[tuple[str, Fraction]]] = {}
            nodes = set()
            for frm, to, dur in es:
                adj.setdefault(frm, []).append((to, dur))
                nodes.add(frm)
                nodes.add(to)
            table: dict[str, dict[str, Fraction]] = {}
            for src in nodes:
                dist = {src: 0}
                frontier = [(0, src)]
                while frontier:
                    d, node = heapq.heappop(frontier)
                    if d > dist.get(node, d):
                        continue
                    for to, dur in adj.get(node, ()):
                        nd = d + dur
                        if to not in dist or nd < dist[to]:
                            dist[to] = nd
                            heapq.heappush(frontier, (nd, to))
                table[src] = dist
            self.fwd[vehicle] = table

        # dist[vehicle][anchor][x] = shortest duration from x to the anchor
        self.dist: dict[str, dict[str, dict[str, Fraction]]] = {}
        for vehicle in edges:
            table = self.fwd[vehicle]
            self.dist[vehicle] = {
                anchor: {x: d[anchor] for x, d in table.items() if anchor in d}
                for anchor in anchors.get(vehicle, ())}

        # must-visit places per vehicle, for time-feasibility estimates
        self.targets: dict[str, set[str]] = {}
        for vehicle, atom, value in self.goal_targets:
            self.targets.setdefault(vehicle, set()).add(value)
        for vehicle, target in self.chain_targets.values():
            self.targets.setdefault(vehicle, set()).add(target)

        # per vehicle: its non-move actions with a cumulative payload, as
        # (required position, duration, payload atoms); used to decide whether
        # a reposition can still precede something worthwhile
        self.non_move_specs: dict[str, list[tuple[str, Fraction, tuple]]] = {}
        for vehicle, gas in non_moves.items():
            atom = pos_atom.get(vehicle)
            seen_specs = set()
            for ga in gas:
                if not ga.mono or not any(a in self.readable for a, _v in ga.mono):
                    continue
                frm = next((v for a, v, _s in ga.conds if a == atom), None)
                if frm is None:
                    continue
                spec = (frm, ga.duration, ga.mono)
                if spec not in seen_specs:
                    seen_specs.add(spec)
                    self.non_move_specs.setdefault(vehicle, []).append(spec)

        # providers[atom]: who can flip the monotone atom, as (vehicle,
        # required position, duration)
        self.providers: dict[Atom, list[tuple[str, str, Fraction]]] = {}
        for vehicle, specs in self.non_move_specs.items():
            for frm, dur, mono in specs:
                for atom, _value in mono:
                    self.providers.setdefault(atom, []).append(
                        (vehicle, frm, dur))

        # per vehicle: move edges annotated with their dynamic gates (the
        # conditions beyond the vehicle's own position), for time estimates
        self.move_graph: dict[str, dict[str, list]] = {}
        for gas in self.ground.values():
            for ga in gas:
                if not ga.is_move or ga.vehicle is None or ga.mv_to is None:
                    continue
                atom = pos_atom.get(ga.vehicle)
                frm = next((v for a, v, _s in ga.conds if a == atom), None)
                if frm is None:
                    continue
                gates = tuple((a, v) for a, v, _s in ga.conds if a != atom)
                by_from = self.move_graph.setdefault(ga.vehicle, {})
                entry = (ga.mv_to, ga.duration, gates)
                edges_out = by_from.setdefault(frm, [])
                if entry not in edges_out:
                    edges_out.append(entry)

        # readers[atom]: conditional moves gated by the monotone atom, as
        # (vehicle, from, to, duration, other gates); lets the search ask
        # whether flipping the atom can still enable a move under the bound
        self.readers: dict[Atom, list[tuple]] = {}
        for gas in self.ground.values():
            for ga in gas:
                if not ga.is_move or ga.vehicle is None:
                    continue
                atom = pos_atom.get(ga.vehicle)
                eff = dict(ga.effects)
                if atom is None or atom not in eff:
                    continue
                frm = next((v for a, v, _s in ga.conds if a == atom), None)
                if frm is None:
                    continue
                gates = tuple((a, v) for a, v, _s in ga.conds if a != atom)
                for c_atom, _v, _s in ga.conds:
                    if c_atom[0] in self.monotone:
                        others = tuple(g for g in gates if g[0] != c_atom)
                        self.readers.setdefault(c_atom, []).append(
                            (ga.vehicle, frm, eff[atom], ga.duration, others))

        for gas in self.ground.values():
            for ga in gas:
                info = unconditional.get(id(ga))
                if info is None:
                    continue
                vehicle, frm, to = info
                tables = self.dist.get(vehicle, {})
                ok = False
                for dist in tables.values():
                    df, dt = dist.get(frm), dist.get(to)
                    if df is not None and dt is not None and dt + ga.duration == df:
                        ok = True
                        break
                ga.allowed = ok

    def default(self, atom: Atom):
        return self.defaults.get(atom[0])

    def _ground_template(self, tpl: ChronicleTemplate) -> Iterator[_Ground]:
        problem = self.problem
        ovars = [v for v in tpl.variables if not v.is_temporal]
        names = [v.name for v in ovars]
        domains = [problem.objects_of_type(v.sort) for v in ovars]
        for combo in itertools.product(*domains):
            b = dict(zip(names, combo))
            resolve = lambda term: b.get(term, term) if isinstance(term, str) else term

            duration = ZERO
            ok = True
            for x in tpl.constraints:
                if x.kind == "eq":
                    ok = resolve(x.a) == resolve(x.b)
                elif x.kind == "neq":
                    ok = resolve(x.a) != resolve(x.b)
                elif x.kind == "diff_eq" and x.earlier == tpl.start and x.later == tpl.end:
                    amount = x.amount
                    if isinstance(amount, SvRef):
                        atom = (amount.sv, *(resolve(a) for a in amount.args))
                        value = self.static.get(atom)
                        if value is None:
                            ok = False
                        else:
                            duration = value
                    else:
                        duration = amount
                if not ok:
                    break
            if not ok:
                continue

            conds = []
            for c in tpl.conditions:
                atom = (c.sv, *(resolve(a) for a in c.args))
                value = resolve(c.value)
                if c.sv in self.static_svs:
                    if self.static.get(atom, self.defaults.get(c.sv)) != value:
                        ok = False
                        break
                else:
                    at_start = c.start == tpl.start and c.end == tpl.start
                    conds.append((atom, value, at_start))
            if not ok:
                continue

            effects = tuple(((e.sv, *(resolve(a) for a in e.args)), resolve(e.value))
                            for e in tpl.effects)
            mono = tuple((atom, value) for atom, value in effects
                         if atom[0] in self.monotone)
            display = tpl.display
            vehicle = None
            targets: tuple[str, ...] = ()
            verb = None
            is_move = False
            if display is not None:
                vehicle = b.get(display.vehicle_param)
                targets = tuple(str(b.get(p, p)) for p in display.target_params)
                verb = display.verb
                is_move = display.is_move
            assert tpl.task is not None
            task_args = tuple(resolve(a) for a in tpl.task[1])
            yield _Ground(tpl.name, task_args, duration, tuple(conds), effects,
                          mono, vehicle, verb, targets, is_move)


# ---------------------------------------------------------------------------
# search


class _Stop(Exception):
    def __init__(self, status: str):
        self.status = status


class _Cand:
    __slots__ = ("ga", "start", "end", "new_stack", "reads", "path", "chain")

    def __init__(self, ga, start, end, new_stack, reads, path, chain):
        self.ga = ga
        self.start = start
        self.end = end
        self.new_stack = new_stack
        self.reads = reads
        self.path = path
        self.chain = chain


def _canon(stack, with_budget: bool = False) -> tuple:
    ren: dict[str, str] = {}
    out = []
    for name, args, budget, _path in stack:
        cargs = []
        for a in args:
            if type(a) is str and a[0] == "?":
                cargs.append(ren.setdefault(a, f"?{len(ren)}"))
            else:
                cargs.append(a)
        if with_budget:
            out.append((name, tuple(cargs), budget))
        else:
            out.append((name, tuple(cargs)))
    return tuple(out)


class _Search:
    def __init__(self, model: _Model, config: SolveConfig, depth: int,
                 t0: float | None = None, seed: Plan | None = None,
                 node_cap: int | None = None, sweep: bool = False):
        self.node_cap = node_cap
        self.sweep = sweep
        self.m = model
        self.cfg = config
        self.depth = depth

        self.val: dict[Atom, object] = dict(model.init_values)
        self.tend: dict[Atom, Fraction] = {}
        self.rend: dict[Atom, Fraction] = {}
        self.chains: list[list] = []  # [stack, time]
        self.chain_keys: list[str] = []
        for st in model.problem.initial.subtasks:
            self.chains.append([((st.task, st.args, depth, (f"{st.task}({', '.join(map(str, st.args))})",)),), 0])
            self.chain_keys.append(st.key)

        self.committed: list[ScheduledAction] = []
        self.last_start = 0
        self.max_end = 0
        self.nodes = 0
        self.fresh = itertools.count()

        self.best: Plan | None = None
        self.best_mk: int | None = None
        self.best_count = 0
        self.best_lex: tuple | None = None
        if seed is not None and seed.makespan is not None:
            self.best = seed
            self.best_mk = int(seed.makespan * model.scale)
            self.best_count = len(seed.actions)
            self.best_lex = tuple(sorted(a.signature() for a in seed.actions))

        self.anchors: dict[str, set] = {}
        self.state_ver = 0
        self._gated_cache: dict[tuple, dict] = {}
        self.memo: dict[tuple, list] = {}
        self.t0 = _time.monotonic() if t0 is None else t0
        self.B: int | None = None
        self.next_B: int | None = None
        self.lb_proof = False

        self.bounds: list[tuple[str, Atom, str, int | None]] = [
            (vehicle, atom, target, None)
            for vehicle, atom, target in model.goal_targets]
        for ci, key in enumerate(self.chain_keys):
            tgt = model.chain_targets.get(key)
            if tgt is not None:
                vehicle, target = tgt
                atom = model.pos_atom.get(vehicle)
                if atom is not None:
                    self.bounds.append((vehicle, atom, target, ci))

    # -- candidate generation ------------------------------------------------

    def _chain_candidates(self, ci: int, out: list) -> None:
        stack, ctime = self.chains[ci]
        seen: set = set()

        def descend(stack, floor, reads):
            key = (_canon(stack, with_budget=True), floor)
            if key in seen:
                return
            seen.add(key)
            if not stack:
                out.append(_Cand(None, floor, floor, (), reads, (), ci))
                return
            name, args, budget, path = stack[0]
            rest = stack[1:]
            for tpl in self.m.achievers.get(name, ()):
                if tpl.kind == ACTION:
                    self._actions_for(tpl, stack[0], rest, floor, reads, out, ci)
                else:
                    for expanded in self._expand_method(tpl, stack[0], rest,
                                                        floor, reads):
                        descend(*expanded)

        descend(stack, ctime, ())

    def _actions_for(self, tpl, item, rest, floor, reads, out, ci):
        name, args, _budget, path = item
        val, tend, rend = self.val, self.tend, self.rend
        default = self.m.default
        atoms, buckets, loose = self.m.ground_idx[tpl.name]
        gas = loose
        for key_atom in atoms:
            bucket = buckets.get((key_atom, val.get(key_atom, default(key_atom))))
            if bucket:
                gas = gas + bucket if gas else bucket
        for ga in gas:
            if not ga.allowed:
                continue
            sub = None
            ok = True
            for pat, v in zip(args, ga.task_args):
                if type(pat) is str and pat[0] == "?":
                    if sub is None:
                        sub = {}
                    prev = sub.get(pat)
                    if prev is None:
                        sub[pat] = v
                    elif prev != v:
                        ok = False
                        break
                elif pat != v:
                    ok = False
                    break
            if not ok:
                continue

            start = floor
            for atom, value, _at_start in ga.conds:
                if val.get(atom, default(atom)) != value:
                    ok = False
                    break
                t = tend.get(atom)
                if t is not None and t > start:
                    start = t
            if not ok:
                continue
            for atom, _value in ga.effects:
                t = tend.get(atom)
                if t is not None and t > start:
                    start = t
                t = rend.get(atom)
                if t is not None and t > start:
                    start = t
            if start < self.last_start:
                continue
            end = start + ga.duration
            if self.B is not None and end > self.B:
                self._reject(end)
                continue
            if self.best_mk is not None:
                if end > self.best_mk:
                    continue
                if end == self.best_mk and len(self.committed) + 1 > self.best_count:
                    continue
            # an action whose only cumulative contribution is already present,
            # never read, or can no longer enable anything under the bound can
            # always be replaced by a plain move, so skip it
            bound = self.best_mk if self.best_mk is not None else self.B
            if ga.mono and not ga.is_move and bound is not None:
                req = None
                for atom, value in ga.mono:
                    if atom not in self.m.readable or \
                            val.get(atom, default(atom)) == value:
                        continue
                    r = self._mono_req(atom, end)
                    if r is not None and (req is None or r < req):
                        req = r
                if req is None:
                    continue
                if req > bound:
                    self._reject(req)
                    continue
            # an ungated reposition can always be rerouted along a shortest
            # path to somewhere the vehicle is still needed; drop it if it
            # lies on no such path
            if ga.uncond:
                anchors = self.anchors.get(ga.vehicle)
                if not anchors:
                    continue
                fw = self.m.fwd[ga.vehicle]
                dfrm = fw.get(ga.mv_frm, {})
                dto = fw.get(ga.mv_to, {})
                for a in anchors:
                    d0 = dfrm.get(a)
                    d1 = dto.get(a)
                    if d0 is not None and d1 is not None and \
                            d0 == ga.duration + d1:
                        break
                else:
                    continue
            # a reposition is only worthwhile if the vehicle can still reach
            # an active target or perform a useful action within the bound
            if ga.is_move and ga.mv_to is not None and bound is not None:
                req = self._move_req(ga, end)
                if req is None:
                    continue
                if req > bound:
                    self._reject(req)
                    continue

            if sub:
                new_rest = tuple(self._subst_item(it, sub) for it in rest)
            else:
                new_rest = rest
            apath = path + (ga.sig,)
            out.append(_Cand(ga, start, end, new_rest, reads, apath, ci))

    def _target_est(self, vehicle: str, atom: Atom, target) -> int | None:
        """Admissible earliest time the vehicle's position can settle on the
        target: a shortest-path sweep where gated edges wait for the earliest
        possible enabling flip, each estimated independently."""
        if self.val.get(atom) is None:
            return 0
        return self._gated_dists(vehicle).get(target)

    def _gated_dists(self, vehicle: str) -> dict:
        """Gate-aware earliest settle time at every location reachable by the
        vehicle from its current position, cached per search state."""
        ck = (self.state_ver, vehicle)
        got = self._gated_cache.get(ck)
        if got is not None:
            return got
        m = self.m
        atom = m.pos_atom.get(vehicle)
        cur = self.val.get(atom) if atom is not None else None
        dist: dict = {}
        if cur is not None:
            t0 = self.tend.get(atom, 0)
            by_from = m.move_graph.get(vehicle, {})
            gate_cache: dict[tuple, int | None] = {}

            def gate_time(catom, cvalue) -> int | None:
                gk = (catom, cvalue)
                hit = gate_cache.get(gk)
                if hit is not None or gk in gate_cache:
                    return hit
                best = self._gate_est(catom, cvalue)
                gate_cache[gk] = best
                return best

            dist[cur] = t0
            frontier = [(t0, cur)]
            while frontier:
                T, f = heapq.heappop(frontier)
                if T > dist.get(f, T):
                    continue
                for to, dur, gates in by_from.get(f, ()):
                    g = T
                    usable = True
                    for catom, cvalue in gates:
                        e = gate_time(catom, cvalue)
                        if e is None:
                            usable = False
                            break
                        if e > g:
                            g = e
                    if not usable:
                        continue
                    arr = g + dur
                    if to not in dist or arr < dist[to]:
                        dist[to] = arr
                        heapq.heappush(frontier, (arr, to))
        if len(self._gated_cache) > 64:
            self._gated_cache.clear()
        self._gated_cache[ck] = dist
        return dist

    def _gate_est(self, catom, cvalue) -> int | None:
        """Earliest instant the gate atom could possibly hold its required
        value: now if it already does, else the best provider's flip time."""
        if self.val.get(catom, self.m.default(catom)) == cvalue:
            # holds already, but a read cannot start before the write settles
            return self.tend.get(catom, 0)
        m = self.m
        best: int | None = None
        for pv, pfrm, pdur in m.providers.get(catom, ()):
            pcur = self.val.get(m.pos_atom[pv])
            if pcur is None:
                continue
            d = m.fwd[pv].get(pcur, {}).get(pfrm)
            if d is None:
                continue
            e = self.tend.get(m.pos_atom[pv], 0) + d + pdur
            if best is None or e < best:
                best = e
        return best

    def _reject(self, value: Fraction) -> None:
        if self.next_B is None or value < self.next_B:
            self.next_B = value

    def _live_anchors(self) -> dict[str, set]:
        """Places each vehicle can still usefully be: active targets plus the
        required positions of non-moves whose payload can still enable
        something under the bound.  Times only grow down a branch, so a
        position useless here stays useless in every descendant."""
        m = self.m
        bound = self.best_mk if self.best_mk is not None else self.B
        out: dict[str, set] = {}
        for vehicle, _atom, target, ci in self.bounds:
            if ci is not None and not self.chains[ci][0]:
                continue
            out.setdefault(vehicle, set()).add(target)
        for vehicle, specs in m.non_move_specs.items():
            patom = m.pos_atom[vehicle]
            pos = self.val.get(patom)
            if pos is None:
                continue
            tendv = self.tend.get(patom, 0)
            fw = m.fwd[vehicle].get(pos, {})
            for frm, dur, mono in specs:
                useful = False
                for atom, value in mono:
                    if atom not in m.readable or \
                            self.val.get(atom, m.default(atom)) == value:
                        continue
                    if bound is None:
                        useful = True
                        break
                    d1 = fw.get(frm)
                    if d1 is None:
                        continue
                    r = self._mono_req(atom, tendv + d1 + dur)
                    if r is None:
                        continue
                    if r > bound:
                        self._reject(r)
                        continue
                    useful = True
                    break
                if useful:
                    out.setdefault(vehicle, set()).add(frm)
        return out

    def _move_req(self, ga: _Ground, end: Fraction) -> Fraction | None:
        """Minimal makespan bound under which this reposition can still
        precede an active target or a useful action.  None if never."""
        m = self.m
        vehicle = ga.vehicle
        fwd = m.fwd.get(vehicle, {}).get(ga.mv_to, {})
        req: Fraction | None = None
        for bvehicle, _batom, target, bci in self.bounds:
            if bvehicle != vehicle:
                continue
            if bci is not None and not self.chains[bci][0]:
                continue
            d2 = fwd.get(target)
            if d2 is not None and (req is None or end + d2 < req):
                req = end + d2
        default = m.default
        for frm, dur, mono in m.non_move_specs.get(vehicle, ()):
            d1 = fwd.get(frm)
            if d1 is None:
                continue
            flip = end + d1 + dur
            if req is not None and flip >= req:
                continue
            for atom, value in mono:
                if atom not in m.readable or \
                        self.val.get(atom, default(atom)) == value:
                    continue
                r = self._mono_req(atom, flip)
                if r is not None and (req is None or r < req):
                    req = r
        return req

    def _mono_req(self, atom: Atom, end: Fraction) -> Fraction | None:
        """Minimal makespan bound under which flipping the atom at `end` can
        still enable a gated move.  None if no gated move can ever follow."""
        readers = self.m.readers.get(atom)
        if readers is None:
            return end
        m = self.m
        req: Fraction | None = None
        for vehicle, frm, to, dur, others in readers:
            pos = m.pos_atom[vehicle]
            cur = self.val.get(pos)
            if cur is None:
                continue
            arrive = self._gated_dists(vehicle).get(frm)
            if arrive is None:
                continue
            # travel may overlap waiting for the flip, so take the max of
            # the flip instant, the earliest gate-aware arrival, and the
            # move's remaining gates (each estimated independently)
            base = arrive if arrive > end else end
            usable = True
            for catom, cvalue in others:
                e = self._gate_est(catom, cvalue)
                if e is None:
                    usable = False
                    break
                if e > base:
                    base = e
            if not usable:
                continue
            est = base + dur
            r = est
            fwd_to = m.fwd[vehicle].get(to, {})
            for bvehicle, _batom, target, bci in self.bounds:
                if bvehicle != vehicle:
                    continue
                if bci is not None and not self.chains[bci][0]:
                    continue
                d2 = fwd_to.get(target)
                if d2 is None:
                    r = None
                    break
                if est + d2 > r:
                    r = est + d2
            if r is not None and (req is None or r < req):
                req = r
        return req

    def _expand_method(self, tpl, item, rest, floor, reads):
        name, args, budget, path = item
        recursive = self.m.recursive
        if name in recursive and budget <= 0 and \
                any(st.task in recursive for st in tpl.subtasks):
            return None

        binding: dict[str, object] = {}
        argsub: dict[str, object] = {}
        assert tpl.task is not None
        var_map = tpl.var_map()
        for pat, arg in zip(tpl.task[1], args):
            if isinstance(pat, str) and pat in var_map:
                prev = binding.get(pat)
                if prev is None:
                    binding[pat] = arg
                elif prev != arg:
                    return None
            elif _is_free(arg):
                argsub[arg] = pat
            elif pat != arg:
                return None

        yield from self._method_conds(tpl, item, rest, 0, binding, argsub,
                                      floor, reads)

    def _method_conds(self, tpl, item, rest, i, binding, argsub, floor, reads):
        var_map = tpl.var_map()
        while i < len(tpl.conditions):
            c = tpl.conditions[i]
            i += 1
            atom_args = []
            open_slots = []  # positions still held by a variable or free symbol
            for a in c.args:
                r = binding.get(a, a) if isinstance(a, str) else a
                if isinstance(r, str) and not (r in var_map or _is_free(r)):
                    r = argsub.get(r, r)
                if isinstance(r, str) and (r in var_map or _is_free(r)):
                    open_slots.append(len(atom_args))
                atom_args.append(r)
            if open_slots:
                # a static table can pin down the open arguments; branch on
                # every matching entry
                if c.sv not in self.m.static_svs:
                    return
                for satom, sval in self.m.static.items():
                    if satom[0] != c.sv or len(satom) != len(atom_args) + 1:
                        continue
                    if any(k not in open_slots and satom[1 + k] != atom_args[k]
                           for k in range(len(atom_args))):
                        continue
                    b2, a2 = dict(binding), dict(argsub)
                    for k in open_slots:
                        sym = atom_args[k]
                        if sym in var_map:
                            b2[sym] = satom[1 + k]
                        else:
                            a2[sym] = satom[1 + k]
                    if not self._cond_value(tpl, c, sval, b2, a2):
                        continue
                    yield from self._method_conds(tpl, item, rest, i, b2, a2,
                                                  floor, reads)
                return
            atom = (c.sv, *atom_args)
            if c.sv in self.m.static_svs:
                cur = self.m.static.get(atom, self.m.default(atom))
            else:
                cur = self.val.get(atom, self.m.default(atom))
            if not self._cond_value(tpl, c, cur, binding, argsub):
                return
            if c.sv not in self.m.static_svs:
                rtime = self.tend.get(atom, 0)
                if floor > rtime:
                    rtime = floor
                else:
                    floor = rtime
                reads = reads + ((atom, rtime),)
        got = self._method_finish(tpl, item, rest, binding, argsub, floor, reads)
        if got is not None:
            yield got

    @staticmethod
    def _cond_value(tpl, c, cur, binding, argsub) -> bool:
        var_map = tpl.var_map()
        want = c.value
        if isinstance(want, str):
            want = binding.get(want, want)
            want = argsub.get(want, want) if isinstance(want, str) else want
        if isinstance(want, str) and (want in var_map or _is_free(want)):
            if cur is None:
                return False
            if want in var_map:
                binding[want] = cur
            else:
                argsub[want] = cur
            return True
        return cur == want

    def _method_finish(self, tpl, item, rest, binding, argsub,
                       new_floor, new_reads):
        name, args, budget, path = item
        recursive = self.m.recursive
        var_map = tpl.var_map()
        for x in tpl.constraints:
            # ordering constraints are enforced by chain serialization; object
            # constraints are checked once both sides are bound
            if x.kind in ("eq", "neq"):
                a = binding.get(x.a, x.a) if isinstance(x.a, str) else x.a
                b = binding.get(x.b, x.b) if isinstance(x.b, str) else x.b
                if isinstance(a, str) and (a in var_map or _is_free(a)):
                    continue
                if isinstance(b, str) and (b in var_map or _is_free(b)):
                    continue
                if (a == b) != (x.kind == "eq"):
                    return None

        task_label = f"{name}({', '.join(str(argsub.get(a, a)) for a in args)})"
        child_path = path[:-1] + (task_label, tpl.name)

        new_items = []
        for st in tpl.subtasks:
            st_args = []
            for a in st.args:
                if isinstance(a, str) and a in var_map:
                    v = binding.get(a)
                    if v is None:
                        v = f"?x{next(self.fresh)}"
                        binding[a] = v
                    st_args.append(v)
                else:
                    st_args.append(argsub.get(a, a) if isinstance(a, str) else a)
            child_budget = budget - 1 if (name in recursive and st.task in recursive) \
                else budget
            label = f"{st.task}({', '.join(map(str, st_args))})"
            new_items.append((st.task, tuple(st_args), child_budget,
                              child_path + (label,)))

        if argsub:
            rest = tuple(self._subst_item(it, argsub) for it in rest)
        return tuple(new_items) + rest, new_floor, new_reads

    @staticmethod
    def _subst_item(item, sub):
        name, args, budget, path = item
        if not any(isinstance(a, str) and a in sub for a in args):
            return item
        return (name, tuple(sub.get(a, a) if isinstance(a, str) else a for a in args),
                budget, path)

    # -- state mutation -------------------------------------------------------

    def _apply(self, cand: _Cand) -> list:
        self.state_ver += 1
        journal: list = []
        chain = self.chains[cand.chain]
        journal.append(("chain", cand.chain, chain[0], chain[1]))
        chain[0] = cand.new_stack
        chain[1] = cand.end

        rend = self.rend
        for atom, rtime in cand.reads:
            old = rend.get(atom)
            if old is None or rtime > old:
                journal.append(("rend", atom, old))
                rend[atom] = rtime

        ga = cand.ga
        if ga is not None:
            for atom, value, at_start in ga.conds:
                rtime = cand.start if at_start else cand.end
                old = rend.get(atom)
                if old is None or rtime > old:
                    journal.append(("rend", atom, old))
                    rend[atom] = rtime
            val, tend = self.val, self.tend
            for atom, value in ga.effects:
                journal.append(("val", atom, val.get(atom, self), tend.get(atom)))
                val[atom] = value
                tend[atom] = cand.end
            journal.append(("meta", self.last_start, self.max_end))
            self.last_start = cand.start
            if cand.end > self.max_end:
                self.max_end = cand.end
            self.committed.append(ScheduledAction(
                id=len(self.committed), name=ga.name,
                params=tuple(str(a) for a in ga.task_args),
                vehicle=ga.vehicle, start=Fraction(cand.start, self.m.scale),
                end=Fraction(cand.end, self.m.scale),
                chain=self.chain_keys[cand.chain], path=cand.path,
                display_verb=ga.display_verb,
                display_targets=ga.display_targets, is_move=ga.is_move))
            journal.append(("pop",))
        return journal

    def _undo(self, journal: list) -> None:
        self.state_ver += 1
        for entry in reversed(journal):
            kind = entry[0]
            if kind == "chain":
                _, ci, stack, t = entry
                self.chains[ci][0] = stack
                self.chains[ci][1] = t
            elif kind == "rend":
                _, atom, old = entry
                if old is None:
                    del self.rend[atom]
                else:
                    self.rend[atom] = old
            elif kind == "val":
                _, atom, oldv, oldt = entry
                if oldv is self:
                    del self.val[atom]
                else:
                    self.val[atom] = oldv
                if oldt is None:
                    del self.tend[atom]
                else:
                    self.tend[atom] = oldt
            elif kind == "meta":
                _, self.last_start, self.max_end = entry
            else:  # pop
                self.committed.pop()

    # -- main loop ------------------------------------------------------------

    def _root_lb(self) -> int | None:
        lb = 0
        for vehicle, atom, target, _ci in self.bounds:
            est = self._target_est(vehicle, atom, target)
            if est is None:
                return None
            if est > lb:
                lb = est
        return lb

    def run(self) -> Plan:
        # iterative bounding on makespan: search with an upper bound, and on
        # failure restart with the smallest bound value that was rejected.
        # The first bound admitting a plan equals the optimal makespan, and
        # exhausting that iteration settles the deterministic tie-breaks.
        status = "optimal"
        root_lb = self._root_lb()
        if root_lb is None:
            wall = _time.monotonic() - self.t0
            return Plan(status="infeasible", nodes=self.nodes, wall_time=wall)
        self.root_lb = root_lb
        if self.cfg.optimal and self.best_mk is not None \
                and self.best_mk <= root_lb:
            # the incumbent already meets an admissible lower bound
            self.lb_proof = True
            wall = _time.monotonic() - self.t0
            return replace(self.best, status="optimal", optimal=True,
                           nodes=self.nodes, wall_time=wall)
        self.B = root_lb if self.best_mk is None else max(root_lb, self.best_mk)
        try:
            if self.sweep:
                # single pass with the bound pinned at the root lower bound;
                # any leaf inside it is optimal, exhaustion proves nothing
                self.next_B = None
                self._search()
                wall = _time.monotonic() - self.t0
                return Plan(status="exhausted", nodes=self.nodes,
                            wall_time=wall)
            while True:
                self.next_B = None
                self.memo.clear()
                self._search()
                if self.best_mk is not None and self.B >= self.best_mk:
                    break  # exhausted a bound that covers the incumbent
                if self.next_B is None:
                    break
                # grow geometrically past the minimal rejected value; the
                # iteration that finds a plan still exhausts under the
                # incumbent bound, so inflation cannot skip the optimum
                self.B = max(self.next_B, self.B + self.B // 16)
        except _Stop as stop:
            status = stop.status
        wall = _time.monotonic() - self.t0
        if self.best is None:
            final = "infeasible" if status == "optimal" else status
            return Plan(status=final, nodes=self.nodes, wall_time=wall)
        return replace(self.best, status=status, optimal=status == "optimal",
                       nodes=self.nodes, wall_time=wall)

    def _checkpoint(self) -> None:
        if self.cfg.cancel is not None and self.cfg.cancel.is_set():
            raise _Stop("cancelled")
        if self.cfg.time_budget is not None and \
                _time.monotonic() - self.t0 > self.cfg.time_budget:
            raise _Stop("timeout")
        if self.node_cap is not None and self.nodes > self.node_cap:
            raise _Stop("capped")

    def _node_lb(self) -> tuple[int, bool] | None:
        lb = self.max_end
        incomplete = False
        for stack, ctime in self.chains:
            if ctime > lb:
                lb = ctime
            if stack:
                incomplete = True
        for vehicle, atom, target, ci in self.bounds:
            if ci is not None and not self.chains[ci][0]:
                continue
            est = self._target_est(vehicle, atom, target)
            if est is None:
                return None  # required position unreachable
            if est > lb:
                lb = est
        return lb, incomplete

    def _search(self) -> None:
        self.nodes += 1
        if self.nodes % 256 == 0:
            self._checkpoint()

        got = self._node_lb()
        if got is None:
            return
        lb, incomplete = got
        if self.B is not None and lb > self.B:
            if self.next_B is None or lb < self.next_B:
                self.next_B = lb
            return
        if self.best_mk is not None:
            if lb > self.best_mk:
                return
            if lb == self.best_mk and len(self.committed) > self.best_count:
                return

        if not incomplete:
            self._leaf()
            return

        key = (tuple(_canon(stack) for stack, _t in self.chains),
               frozenset(self.val.items()))
        # budgets live in the dominance vector, not the key: a state that
        # differs only by lower remaining budget admits fewer completions
        vec = (self.last_start, tuple(t for _s, t in self.chains),
               len(self.committed), dict(self.tend), dict(self.rend),
               tuple(item[2] for stack, _t in self.chains for item in stack))
        entries = self.memo.get(key)
        if entries is not None:
            for old in entries:
                if self._dominates(old, vec):
                    return
            if len(entries) < self.cfg.memo_cap:
                entries[:] = [e for e in entries if not self._dominates(vec, e)]
                entries.append(vec)
        else:
            self.memo[key] = [vec]

        self.anchors = self._live_anchors()
        cands: list[_Cand] = []
        for ci in range(len(self.chains)):
            if self.chains[ci][0]:
                self._chain_candidates(ci, cands)
        # probe each child's lower bound so the dive follows the critical
        # path first; actions before chain completions, since finishing a
        # chain stays available and mostly leads to dead ends early on
        scored = []
        for cand in cands:
            journal = self._apply(cand)
            got = self._node_lb()
            self._undo(journal)
            if got is None:
                continue
            clb = got[0]
            if self.B is not None and clb > self.B:
                self._reject(clb)
                continue
            if self.best_mk is not None and clb > self.best_mk:
                continue
            scored.append((cand.ga is None, clb, cand.start, cand.end,
                           cand.ga.sig if cand.ga else "", cand.chain, cand))
        scored.sort(key=lambda s: s[:6])
        for entry in scored:
            cand = entry[6]
            journal = self._apply(cand)
            try:
                self._search()
            finally:
                self._undo(journal)

    @staticmethod
    def _dominates(a, b) -> bool:
        if a[0] > b[0] or a[2] > b[2]:
            return False
        for ta, tb in zip(a[1], b[1]):
            if ta > tb:
                return False
        for d_a, d_b in ((a[3], b[3]), (a[4], b[4])):
            for atom, t in d_a.items():
                if t > d_b.get(atom, 0):
                    return False
        for ba, bb in zip(a[5], b[5]):
            if ba < bb:
                return False
        return True

    def _leaf(self) -> None:
        for atom, value in self.m.goals:
            if self.val.get(atom, self.m.default(atom)) != value:
                return
        mk = self.max_end
        count = len(self.committed)
        lex = tuple(sorted(a.signature() for a in self.committed))
        if self.best_mk is not None:
            cur = (self.best_mk, self.best_count, self.best_lex)
            if (mk, count, lex) >= cur:
                return
        improved = self.best_mk is None or mk < self.best_mk
        self.best = Plan(status="feasible", actions=tuple(self.committed),
                         makespan=Fraction(mk, self.m.scale), optimal=False)
        self.best_mk, self.best_count, self.best_lex = mk, count, lex
        if improved and self.cfg.on_incumbent is not None:
            self.cfg.on_incumbent(self.best)
        if improved and not self.cfg.optimal:
            raise _Stop("feasible")
        if mk <= self.root_lb:
            # matches an admissible lower bound, so nothing can beat it
            self.lb_proof = True
            raise _Stop("optimal")


# ---------------------------------------------------------------------------
# public entry points


def solve(problem: PlanningProblem, config: SolveConfig | None = None) -> Plan:
    """Minimal-makespan plan for the problem, or an infeasible/timeout verdict.

    When no explicit depth is given the solver deepens the decomposition
    budget one level at a time, carrying the incumbent across levels, and
    stops once an extra level brings no improvement (or the incumbent meets
    an admissible lower bound, which settles optimality outright).
    """
    cfg = config or SolveConfig()
    model = _Model(problem)
    if cfg.depth is not None:
        return _Search(model, cfg, cfg.depth).run()

    cap_depth = max(4, 2 * model.locations)
    t0 = _time.monotonic()
    nodes = 0

    def interrupted(plan: Plan, best: Plan | None) -> Plan:
        wall = _time.monotonic() - t0
        if best is not None:
            return replace(best, status=plan.status, optimal=False,
                           nodes=nodes, wall_time=wall)
        return replace(plan, nodes=nodes, wall_time=wall)

    # phase zero: probe each depth with the makespan bound pinned at the
    # root lower bound; the first leaf found under it meets an admissible
    # bound and is optimal outright.  Probes carry a small node allowance:
    # a capped probe proves nothing and the next depth covers a superset of
    # its plans, so probing just moves on.  Once the phase's overall
    # allowance runs out the general driver below takes over.
    sweep_budget = 25000
    for depth in range(1, cap_depth + 1):
        if sweep_budget <= 0:
            break
        search = _Search(model, cfg, depth, t0=t0,
                         node_cap=min(2500, sweep_budget), sweep=True)
        plan = search.run()
        nodes += search.nodes
        sweep_budget -= search.nodes
        if plan.status in ("timeout", "cancelled"):
            return interrupted(plan, None)
        if plan.found or plan.status == "infeasible":
            # infeasibility here comes from an unreachable required target,
            # which no amount of extra depth can fix
            return replace(plan, nodes=nodes,
                           wall_time=_time.monotonic() - t0)

    # phase one: deepen with a node allowance per level until some level
    # yields an incumbent; a level cut off by the allowance proves nothing,
    # so if a whole round was inconclusive the allowance is raised
    best: Plan | None = None
    found_depth = 0
    node_cap = 4096
    while best is None:
        any_capped = False
        for depth in range(1, cap_depth + 1):
            search = _Search(model, cfg, depth, t0=t0,
                             node_cap=node_cap * depth)
            plan = search.run()
            nodes += search.nodes
            if plan.status in ("timeout", "cancelled"):
                return interrupted(plan, None)
            if plan.status == "capped":
                any_capped = True
            if plan.found:
                best = plan
                found_depth = depth
                if not cfg.optimal or search.lb_proof:
                    return replace(best, status=plan.status,
                                   optimal=search.lb_proof, nodes=nodes,
                                   wall_time=_time.monotonic() - t0)
                break
        if best is None:
            if not any_capped:
                return Plan(status="infeasible", nodes=nodes,
                            wall_time=_time.monotonic() - t0)
            node_cap *= 4

    # phase two: exhaust each level under the incumbent bound, carrying the
    # incumbent as a seed, until one level past the last improvement brings
    # nothing better
    depth = 1
    while True:
        search = _Search(model, cfg, depth, t0=t0, seed=best)
        plan = search.run()
        nodes += search.nodes
        if plan.status in ("timeout", "cancelled"):
            return interrupted(plan, best)
        improved = plan.found and \
            (plan.makespan, len(plan.actions), plan.lex_key()) < \
            (best.makespan, len(best.actions), best.lex_key())
        if improved:
            best = plan
            found_depth = depth
        if search.lb_proof or (depth > found_depth and not improved) \
                or depth >= cap_depth:
            return replace(best, status="optimal", optimal=True,
                           nodes=nodes, wall_time=_time.monotonic() - t0)
        depth += 1


def solve_incumbent_stream(problem: PlanningProblem,
                           config: SolveConfig | None = None) -> Iterator[Plan]:
    """Yields each strictly improving incumbent, then the final verdict."""
    config = config or SolveConfig()
    incumbents: list[Plan] = []
    prev = config.on_incumbent

    def collect(plan: Plan):
        incumbents.append(plan)
        if prev is not None:
            prev(plan)

    config.on_incumbent = collect
    final = solve(problem, config)
    seen = None
    for plan in incumbents:
        if seen is None or plan.makespan < seen:
            seen = plan.makespan
            if plan.makespan != final.makespan or plan.lex_key() != final.lex_key():
                yield plan
    yield final


# ---------------------------------------------------------------------------
# fixed-sequence rescheduling (used by plan edits)


def reschedule(problem: PlanningProblem,
               chains: Mapping[str, list[tuple[str, tuple[str, ...]]]],
               paths: Mapping[str, list[tuple[str, ...]]] | None = None,
               ) -> tuple[Plan | None, str | None]:
    """Left-shift schedule for fixed per-chain action sequences.

    ``chains`` maps an initial-subtask key to the ordered (action name,
    task arguments) list it must execute.  Returns (plan, None) on success or
    (None, reason) naming the first unsupportable condition.
    """
    model = _Model(problem)
    ground = []
    for key, seq in chains.items():
        for i, (name, args) in enumerate(seq):
            ga = model.by_task.get((name, tuple(args)))
            if ga is None:
                return None, f"unknown ground action {name}({', '.join(args)})"
            ground.append((key, i, ga))
    pending: dict[str, list] = {}
    for key, i, ga in sorted(ground, key=lambda x: (x[0], x[1])):
        pending.setdefault(key, []).append(ga)
    for key in chains:
        pending.setdefault(key, [])

    val = dict(model.init_values)
    tend: dict[Atom, Fraction] = {}
    rend: dict[Atom, Fraction] = {}
    ctimes = {key: 0 for key in pending}
    done: list[ScheduledAction] = []
    idx = {key: 0 for key in pending}

    def earliest(key: str, ga: _Ground):
        start = ctimes[key]
        for atom, value, _at_start in ga.conds:
            if val.get(atom, model.default(atom)) != value:
                return None, (atom, value)
            t = tend.get(atom)
            if t is not None and t > start:
                start = t
        for atom, _value in ga.effects:
            for table in (tend, rend):
                t = table.get(atom)
                if t is not None and t > start:
                    start = t
        return start, None

    blocked_reason = None
    while any(idx[k] < len(pending[k]) for k in pending):
        choices = []
        blocked_reason = None
        for key in sorted(pending):
            if idx[key] >= len(pending[key]):
                continue
            ga = pending[key][idx[key]]
            start, why = earliest(key, ga)
            if start is None:
                if blocked_reason is None:
                    atom, value = why
                    blocked_reason = (
                        f"condition {atom[0]}({', '.join(map(str, atom[1:]))})"
                        f"={value} is not satisfied for {ga.sig}")
                continue
            choices.append((start, key, ga))
        if not choices:
            return None, blocked_reason or "no applicable action"
        start, key, ga = min(choices, key=lambda c: (c[0], c[1], c[2].sig))
        end = start + ga.duration
        for atom, value, at_start in ga.conds:
            rtime = start if at_start else end
            if rend.get(atom, 0) < rtime:
                rend[atom] = rtime
        for atom, value in ga.effects:
            val[atom] = value
            tend[atom] = end
        ctimes[key] = end
        path = ()
        if paths is not None and key in paths:
            seq_paths = paths[key]
            if idx[key] < len(seq_paths):
                path = tuple(seq_paths[idx[key]])
        done.append(ScheduledAction(
            id=len(done), name=ga.name,
            params=tuple(str(a) for a in ga.task_args), vehicle=ga.vehicle,
            start=Fraction(start, model.scale),
            end=Fraction(end, model.scale), chain=key, path=path,
            display_verb=ga.display_verb, display_targets=ga.display_targets,
            is_move=ga.is_move))
        idx[key] += 1

    for atom, value in model.goals:
        if val.get(atom, model.default(atom)) != value:
            return None, (f"objective {atom[0]}({', '.join(map(str, atom[1:]))})"
                          f"={value} is not achieved")
    mk = max((a.end for a in done), default=ZERO)
    return Plan(status="feasible", actions=tuple(done), makespan=mk,
                optimal=False), None


# ---------------------------------------------------------------------------
# serialization


def action_to_json(a: ScheduledAction) -> dict:
    return {
        "id": a.id, "name": a.name, "params": list(a.params),
        "vehicle": a.vehicle, "start": str(a.start), "end": str(a.end),
        "chain": a.chain, "path": list(a.path),
        "display": {"verb": a.display_verb, "targets": list(a.display_targets),
                    "is_move": a.is_move},
    }


def action_from_json(data: dict) -> ScheduledAction:
    d = data.get("display", {})
    return ScheduledAction(
        id=data["id"], name=data["name"], params=tuple(data["params"]),
        vehicle=data.get("vehicle"), start=Fraction(data["start"]),
        end=Fraction(data["end"]), chain=data.get("chain", ""),
        path=tuple(data.get("path", ())),
        display_verb=d.get("verb"), display_targets=tuple(d.get("targets", ())),
        is_move=d.get("is_move", False))


def plan_to_json(plan: Plan) -> dict:
    return {
        "status": plan.status,
        "makespan": None if plan.makespan is None else str(plan.makespan),
        "optimal": plan.optimal,
        "variant": plan.variant,
        "nodes": plan.nodes,
        "wall_time": plan.wall_time,
        "actions": [action_to_json(a) for a in plan.actions],
    }


def plan_from_json(data: dict) -> Plan:
    return Plan(
        status=data["status"],
        makespan=None if data.get("makespan") is None else Fraction(data["makespan"]),
        optimal=data.get("optimal", False),
        variant=data.get("variant"),
        nodes=data.get("nodes", 0),
        wall_time=data.get("wall_time", 0.0),
        actions=tuple(action_from_json(a) for a in data.get("actions", ())))
