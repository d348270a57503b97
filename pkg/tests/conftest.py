"""Shared fixtures: compiled problems and solved plans are expensive, so
they are computed once per session and reused across test modules."""
from __future__ import annotations

import pytest

from fleetplan.domain import ModelVariant, compile, scenario_fixture
from fleetplan.solver import SolveConfig, solve

STEPS = (1, 2, 3)
VARIANTS = ("natural", "optimized")


@pytest.fixture(scope="session")
def fixture_problems():
    """Compiled planning problems for every (step, variant) cell."""
    return {
        (step, label): compile(scenario_fixture(step), ModelVariant.from_label(label))
        for step in STEPS for label in VARIANTS
    }


@pytest.fixture(scope="session")
def fixture_plans(fixture_problems):
    """Optimal plans for every (step, variant) cell, solved once."""
    return {
        key: solve(problem, SolveConfig(time_budget=120.0))
        for key, problem in fixture_problems.items()
    }
