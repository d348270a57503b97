from fractions import Fraction

import pytest

from fleetplan.domain import ModelVariant, compile, scenario_fixture
from fleetplan.pipeline import (
    DisplayAction,
    TimelineView,
    collapse_lane,
    reallocate,
    simplified_to_json,
    simplify,
    timeline,
    _friendly_condition,
)
from fleetplan.solver import reschedule

F = Fraction


def problem_for(step=1, variant="natural"):
    return compile(scenario_fixture(step), ModelVariant.from_label(variant))


def fly_chain_plan(problem):
    chains = {"k1": [("fly", ("UAV1", "L1", "L5")),
                     ("fly", ("UAV1", "L5", "L10")),
                     ("fly", ("UAV1", "L10", "L12"))]}
    plan, reason = reschedule(problem, chains)
    assert reason is None
    return plan


def disp(verb, vehicle, targets, start, end):
    return DisplayAction(verb, vehicle, tuple(targets), F(start), F(end))


class TestSimplify:
    def test_three_move_chain_collapses(self):
        plan = fly_chain_plan(problem_for())
        sp = simplify(plan)
        lane = sp.lane("UAV1")
        assert len(lane) == 1
        move = lane[0]
        assert move.verb == "Move"
        assert move.targets[-1] == "L12"
        assert (move.start, move.end) == (F(0), F(315))
        assert move.label() == "Move UAV1 to L12"

    def test_single_move_untouched(self):
        lane = collapse_lane([disp("Move", "UAV1", ("L5",), 0, 100)])
        assert len(lane) == 1

    def test_non_move_breaks_run(self):
        lane = collapse_lane([
            disp("Move", "UAV1", ("L5",), 0, 100),
            disp("Explore", "UAV1", ("L5", "L10"), 100, 210),
            disp("Move", "UAV1", ("L12",), 210, 315)])
        assert [a.verb for a in lane] == ["Move", "Explore", "Move"]

    def test_collapse_idempotent(self):
        items = [disp("Move", "UAV1", ("L5",), 0, 100),
                 disp("Move", "UAV1", ("L10",), 100, 210),
                 disp("Explore", "UAV1", ("L10", "L12"), 210, 315),
                 disp("Move", "UAV1", ("L10",), 315, 420)]
        once = collapse_lane(items)
        assert collapse_lane(once) == once

    def test_preserves_makespan_vehicles_and_non_moves(self):
        problem = problem_for(1, "optimized")
        chains = {
            "k1": [("explore_air", ("UAV1", "L1", "L2")),
                   ("fly", ("UAV1", "L2", "L6")),
                   ("fly", ("UAV1", "L6", "L8"))],
            "k2": [("explore_ground", ("UGV1", "L1", "L2"))],
            "k3": [("walk", ("H", "L1", "L2"))],
        }
        plan, reason = reschedule(problem_for(1), chains)
        assert reason is None
        sp = simplify(plan)
        assert sp.makespan == plan.makespan
        assert {v for v, _ in sp.lanes} == {a.vehicle for a in plan.actions}
        raw_non_moves = sorted(a.name for a in plan.actions if not a.is_move)
        shown_non_moves = sorted(
            a.verb for a in sp.actions if a.verb != "Move")
        assert len(raw_non_moves) == len(shown_non_moves)

    def test_json_shape(self):
        sp = simplify(fly_chain_plan(problem_for()))
        data = simplified_to_json(sp)
        assert data["makespan"] == "315"
        assert data["lanes"][0]["actions"][0]["label"] == "Move UAV1 to L12"


class TestTimeline:
    def test_valid_lanes_accepted(self):
        sp = simplify(fly_chain_plan(problem_for()))
        view = timeline(sp)
        assert view.makespan == sp.makespan

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            TimelineView(
                lanes=(("UAV1", (disp("Move", "UAV1", ("L5",), 0, 100),
                                 disp("Move", "UAV1", ("L10",), 90, 200))),),
                makespan=F(200))


class TestReallocate:
    def test_move_to_other_robot(self):
        problem = problem_for()
        chains = {"k1": [("fly", ("UAV1", "L1", "L5"))]}
        plan, reason = reschedule(problem, chains)
        assert reason is None
        # the edge is open to ground robots too; rebinding turns fly into roll
        new_plan, reason = reallocate(problem, plan, 0, "UGV1")
        assert reason is None
        assert [a.name for a in new_plan.actions] == ["roll"]
        roll = new_plan.actions[0]
        assert roll.vehicle == "UGV1"
        assert roll.params == ("UGV1", "L1", "L5")
        assert new_plan.makespan == 100

    def test_explore_air_to_ground(self):
        problem = problem_for()
        chains = {"k1": [("explore_air", ("UAV1", "L1", "L5"))]}
        plan, reason = reschedule(problem, chains)
        assert reason is None
        new_plan, reason = reallocate(problem, plan, 0, "UGV1")
        assert reason is None
        assert [a.name for a in new_plan.actions] == ["explore_ground"]
        assert new_plan.actions[0].vehicle == "UGV1"
        assert new_plan.actions[0].duration == plan.actions[0].duration

    def test_humans_cannot_explore(self):
        problem = problem_for()
        chains = {"k1": [("explore_air", ("UAV1", "L1", "L5"))]}
        plan, _ = reschedule(problem, chains)
        new_plan, reason = reallocate(problem, plan, 0, "H")
        assert new_plan is None
        assert reason == "type-inadmissible"

    def test_broken_support_gets_friendly_message(self):
        from fleetplan.domain import (
            HUMANS, UAV, UGV, MissionState, NavigationGraph, Vehicle)
        modes = {HUMANS: F(10), UAV: F(5), UGV: F(5)}
        graph = NavigationGraph(
            {"L1": (0.0, 0.0), "L2": (5.0, 0.0)},
            {("L1", "L2"): dict(modes), ("L2", "L1"): dict(modes)})
        mission = MissionState(
            graph, (Vehicle("H", HUMANS, "L1"), Vehicle("UAV1", UAV, "L1"),
                    Vehicle("UGV1", UGV, "L1"), Vehicle("UGV2", UGV, "L1")),
            (), objective_location="L2")
        problem = compile(mission)
        chains = {
            "k1": [("explore_air", ("UAV1", "L1", "L2"))],
            "k2": [("explore_ground", ("UGV1", "L1", "L2"))],
            "k3": [("walk", ("H", "L1", "L2"))],
        }
        plan, reason = reschedule(problem, chains)
        assert reason is None
        target = next(a for a in plan.actions if a.name == "explore_air")
        # handing the air survey to a second ground robot leaves the edge
        # unexplored by air, which blocks the walk
        new_plan, reason = reallocate(problem, plan, target.id, "UGV2")
        assert new_plan is None
        assert reason == "path L1->L2 not explored by air"

    def test_unknown_action_id(self):
        problem = problem_for()
        plan = fly_chain_plan(problem)
        new_plan, reason = reallocate(problem, plan, 99, "UGV1")
        assert new_plan is None and "no action with id" in reason

    def test_unknown_vehicle(self):
        problem = problem_for()
        plan = fly_chain_plan(problem)
        new_plan, reason = reallocate(problem, plan, 0, "GHOST")
        assert new_plan is None and "unknown vehicle" in reason


class TestFriendlyMessages:
    def test_known_conditions(self):
        cases = {
            "condition explored_air(L1, L5)=True is not satisfied for walk(H, L1, L5)":
                "path L1->L5 not explored by air",
            "condition explored_ground(L1, L5)=True is not satisfied for walk(H, L1, L5)":
                "path L1->L5 not explored by ground",
            "condition obstacle(L1, L5)=False is not satisfied for walk(H, L1, L5)":
                "obstacle on path L1->L5 not secured",
            "condition path(L1, L9)=True is not satisfied for fly(UAV1, L1, L9)":
                "no path L1->L9",
            "condition loc(UAV1)=L5 is not satisfied for fly(UAV1, L5, L10)":
                "UAV1 is not at L5",
        }
        for raw, pretty in cases.items():
            assert _friendly_condition(raw) == pretty

    def test_unknown_messages_pass_through(self):
        assert _friendly_condition("something else") == "something else"
