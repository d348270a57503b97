"""Simple temporal network over rational timepoints.

Constraints are binary differences ``l <= tj - ti <= u`` stored as weighted
edges of a distance graph (edge u->v with weight w means ``tv - tu <= w``).
Consistency is decided by negative-cycle detection; additions are incremental
and can be rolled back to a mark, which is what the solver's backtracking
needs.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable

Time = Fraction

ORIGIN = "__origin__"


class InconsistentNetwork(Exception):
    pass


class SimpleTemporalNetwork:
    def __init__(self):
        # potentials form a feasible schedule whenever the network is consistent
        self._potential: dict[Hashable, Fraction] = {ORIGIN: Fraction(0)}
        self._out: dict[Hashable, dict[Hashable, Fraction]] = {ORIGIN: {}}
        self._in: dict[Hashable, dict[Hashable, Fraction]] = {ORIGIN: {}}
        self._journal: list[tuple] = []

    # -- construction -------------------------------------------------------

    def add_timepoint(self, name: Hashable, nonnegative: bool = True) -> None:
        if name in self._potential:
            return
        self._potential[name] = Fraction(0)
        self._out[name] = {}
        self._in[name] = {}
        self._journal.append(("tp", name))
        if nonnegative:
            self.add_edge(name, ORIGIN, Fraction(0))  # origin - t <= 0, i.e. t >= 0

    def add_edge(self, u: Hashable, v: Hashable, w: Fraction) -> None:
        """Add ``tv - tu <= w``; raises InconsistentNetwork on a negative cycle."""
        w = Fraction(w)
        old = self._out[u].get(v)
        if old is not None and old <= w:
            return
        self._out[u][v] = w
        self._in[v][u] = w
        self._journal.append(("edge", u, v, old))
        self._restore_potentials(u, v, w)

    def add_constraint(self, ti: Hashable, tj: Hashable,
                       lower: Fraction | None = None,
                       upper: Fraction | None = None) -> None:
        """``lower <= tj - ti <= upper`` (either bound may be None)."""
        if upper is not None:
            self.add_edge(ti, tj, Fraction(upper))
        if lower is not None:
            self.add_edge(tj, ti, -Fraction(lower))

    # -- rollback ------------------------------------------------------------

    def mark(self) -> int:
        return len(self._journal)

    def rollback(self, mark: int) -> None:
        while len(self._journal) > mark:
            entry = self._journal.pop()
            if entry[0] == "edge":
                _, u, v, old = entry
                if old is None:
                    del self._out[u][v]
                    del self._in[v][u]
                else:
                    self._out[u][v] = old
                    self._in[v][u] = old
            elif entry[0] == "tp":
                _, name = entry
                del self._potential[name]
                del self._out[name]
                del self._in[name]
            else:  # potential update
                _, name, old = entry
                self._potential[name] = old

    # -- queries -------------------------------------------------------------

    def timepoints(self) -> Iterable[Hashable]:
        return (t for t in self._potential if t != ORIGIN)

    def is_consistent(self) -> bool:
        # consistency is maintained incrementally; reaching here means yes
        return True

    def schedule(self) -> dict[Hashable, Fraction]:
        """A feasible assignment (not necessarily earliest)."""
        base = self._potential[ORIGIN]
        return {t: self._potential[t] - base for t in self.timepoints()}

    def earliest(self, t: Hashable) -> Fraction:
        """Earliest consistent value of ``t`` (relative to the origin).

        Equals the negated shortest distance from ``t`` to the origin in the
        distance graph; computed by Bellman-Ford on demand.
        """
        dist: dict[Hashable, Fraction] = {t: Fraction(0)}
        frontier = [t]
        n = len(self._potential)
        for _ in range(n + 1):
            if not frontier:
                break
            nxt = []
            for u in frontier:
                du = dist[u]
                for v, w in self._out[u].items():
                    cand = du + w
                    if v not in dist or cand < dist[v]:
                        dist[v] = cand
                        nxt.append(v)
            frontier = nxt
        if t not in dist or ORIGIN not in dist:
            return Fraction(0)
        return -dist[ORIGIN]

    # -- internals -----------------------------------------------------------

    def _restore_potentials(self, u: Hashable, v: Hashable, w: Fraction) -> None:
        """Incremental consistency restoration after tightening edge u->v.

        Relaxes potentials outward from ``v``; revisiting the source ``u``
        with a decreased potential closes a negative cycle.
        """
        pot = self._potential
        if pot[v] <= pot[u] + w:
            return
        start_mark = len(self._journal)
        self._journal.append(("pot", v, pot[v]))
        pot[v] = pot[u] + w
        queue = [v]
        while queue:
            x = queue.pop()
            px = pot[x]
            for y, wy in self._out[x].items():
                cand = px + wy
                if cand < pot[y]:
                    if y == v:
                        # negative cycle: undo potential changes and the edge
                        self.rollback(start_mark)
                        del self._out[u][v]
                        del self._in[v][u]
                        # journal still holds the edge entry; fix it up
                        for i in range(len(self._journal) - 1, -1, -1):
                            e = self._journal[i]
                            if e[0] == "edge" and e[1] == u and e[2] == v:
                                old = e[3]
                                if old is not None:
                                    self._out[u][v] = old
                                    self._in[v][u] = old
                                del self._journal[i]
                                break
                        raise InconsistentNetwork(
                            f"negative cycle adding {v} - {u} <= {w}")
                    self._journal.append(("pot", y, pot[y]))
                    pot[y] = cand
                    queue.append(y)
