"""Wall-time comparison of the natural and optimized models."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .domain import MissionState, ModelVariant, compile, scenario_fixture
from .solver import Plan, SolveConfig, solve


@dataclass(frozen=True)
class BenchmarkCell:
    step: int
    variant: str
    status: str
    makespan: Fraction | None
    times: tuple[float, ...]

    @property
    def median_time(self) -> float:
        return statistics.median(self.times) if self.times else float("nan")


@dataclass(frozen=True)
class BenchmarkReport:
    cells: tuple[BenchmarkCell, ...]
    repetitions: int

    def cell(self, step: int, variant: str) -> BenchmarkCell:
        for c in self.cells:
            if c.step == step and c.variant == variant:
                return c
        raise KeyError((step, variant))

    def reduction(self, step: int) -> float | None:
        """Relative time saved by the optimized model, in [0, 1]."""
        nat = self.cell(step, "natural")
        opt = self.cell(step, "optimized")
        if nat.status != "optimal" or opt.status != "optimal":
            return None
        if nat.median_time == 0:
            return 0.0
        return 1.0 - opt.median_time / nat.median_time

    def rows(self) -> list[dict]:
        out = []
        for c in self.cells:
            red = self.reduction(c.step) if c.variant == "optimized" else None
            out.append({
                "step": c.step, "variant": c.variant, "status": c.status,
                "makespan": None if c.makespan is None else str(c.makespan),
                "median_time": c.median_time,
                "reduction": red,
            })
        return out


def run_benchmark(steps=(1, 2, 3),
                  variants=(ModelVariant.natural(), ModelVariant.optimized()),
                  repetitions: int = 3,
                  time_budget: float = 120.0,
                  missions: dict[int, MissionState] | None = None,
                  ) -> BenchmarkReport:
    """Solves each (step, variant) cell to optimality and times it.

    A timeout is recorded in the cell's status, not raised.  The reported
    time per cell is the median over ``repetitions`` runs.
    """
    cells = []
    for step in steps:
        mission = missions[step] if missions else scenario_fixture(step)
        for variant in variants:
            problem = compile(mission, variant)
            times = []
            last: Plan | None = None
            for _ in range(repetitions):
                t0 = time.monotonic()
                last = solve(problem, SolveConfig(time_budget=time_budget))
                times.append(time.monotonic() - t0)
            cells.append(BenchmarkCell(
                step=step, variant=variant.label, status=last.status,
                makespan=last.makespan, times=tuple(times)))
    return BenchmarkReport(cells=tuple(cells), repetitions=repetitions)


def format_report(report: BenchmarkReport) -> str:
    lines = [f"{'step':>4}  {'variant':<10} {'status':<10} "
             f"{'makespan':>10} {'median s':>9}  reduction"]
    for row in report.rows():
        red = "" if row["reduction"] is None else f"{row['reduction']:.1%}"
        mk = row["makespan"] or "-"
        lines.append(f"{row['step']:>4}  {row['variant']:<10} "
                     f"{row['status']:<10} {mk:>10} "
                     f"{row['median_time']:>9.2f}  {red}")
    return "\n".join(lines)
