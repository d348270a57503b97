from fractions import Fraction

from fleetplan.domain import (
    UAV,
    MissionState,
    ModelVariant,
    NavigationGraph,
    Vehicle,
    compile,
    scenario_fixture,
)
from fleetplan.solver import (
    Plan,
    ScheduledAction,
    SearchNode,
    SolveConfig,
    lower_bound,
    plan_from_json,
    plan_to_json,
    reschedule,
    solve,
    solve_incumbent_stream,
)

F = Fraction


def line_mission(objective="L2", edges=True):
    graph = NavigationGraph(
        {"L1": (0.0, 0.0), "L2": (5.0, 0.0)},
        {("L1", "L2"): {UAV: F(5)}, ("L2", "L1"): {UAV: F(5)}} if edges else {})
    return MissionState(graph, (Vehicle("UAV1", UAV, "L1"),), (),
                        objective_location=objective, objective_vehicle="UAV1")


class TestSolve:
    def test_already_at_goal(self):
        plan = solve(compile(line_mission(objective="L1")))
        assert plan.found
        assert plan.makespan == 0
        assert plan.optimal
        assert plan.actions == ()

    def test_single_move(self):
        plan = solve(compile(line_mission()))
        assert plan.status == "optimal"
        assert plan.makespan == 5
        assert [a.name for a in plan.actions] == ["fly"]
        a = plan.actions[0]
        assert (a.start, a.end, a.vehicle) == (F(0), F(5), "UAV1")
        assert a.is_move and a.display_verb == "Move"

    def test_infeasible_when_disconnected(self):
        plan = solve(compile(line_mission(edges=False)))
        assert plan.status == "infeasible"
        assert not plan.found

    def test_explicit_depth(self):
        plan = solve(compile(line_mission()), SolveConfig(depth=3))
        assert plan.found and plan.makespan == 5

    def test_first_solution_mode(self):
        plan = solve(compile(line_mission()), SolveConfig(optimal=False))
        assert plan.found
        assert plan.makespan == 5

    def test_variants_agree_on_micro_instance(self):
        from fleetplan.instances import micro_mission
        mission = micro_mission(3)
        nat = solve(compile(mission, ModelVariant.natural()))
        opt = solve(compile(mission, ModelVariant.optimized()))
        assert nat.makespan == opt.makespan


class TestLowerBound:
    def test_empty_prefix(self):
        assert lower_bound(SearchNode(())) == 0

    def test_single_action(self):
        a = ScheduledAction(0, "fly", ("UAV1", "L1", "L2"), "UAV1",
                            F(3), F(8), "k1", ())
        assert lower_bound(SearchNode((a,))) == 8

    def test_chain_sequencing(self):
        a = ScheduledAction(0, "fly", ("UAV1", "L1", "L2"), "UAV1",
                            F(0), F(5), "k1", ())
        b = ScheduledAction(1, "fly", ("UAV1", "L2", "L1"), "UAV1",
                            F(5), F(10), "k1", ())
        c = ScheduledAction(2, "roll", ("UGV1", "L1", "L2"), "UGV1",
                            F(0), F(4), "k2", ())
        assert lower_bound(SearchNode((a, b, c))) == 10

    def test_bound_never_exceeds_solved_makespan(self):
        for step in (1, 2):
            plan = solve(compile(scenario_fixture(step),
                                 ModelVariant.optimized()),
                         SolveConfig(time_budget=120.0))
            for k in range(len(plan.actions) + 1):
                assert lower_bound(SearchNode(plan.actions[:k])) <= plan.makespan


class TestIncumbentStream:
    def test_trivial_single_optimal(self):
        plans = list(solve_incumbent_stream(compile(line_mission(objective="L1"))))
        assert len(plans) == 1
        assert plans[0].optimal and plans[0].makespan == 0

    def test_infeasible_stream(self):
        plans = list(solve_incumbent_stream(compile(line_mission(edges=False))))
        assert len(plans) == 1
        assert plans[0].status == "infeasible"

    def test_final_is_best(self):
        plans = list(solve_incumbent_stream(compile(line_mission())))
        assert plans[-1].optimal
        assert plans[-1].makespan == 5
        makespans = [p.makespan for p in plans]
        assert makespans == sorted(makespans, reverse=True)


class TestReschedule:
    def test_fly_chain(self):
        problem = compile(scenario_fixture(1), ModelVariant.natural())
        chains = {"k1": [("fly", ("UAV1", "L1", "L5")),
                         ("fly", ("UAV1", "L5", "L10")),
                         ("fly", ("UAV1", "L10", "L12"))]}
        plan, reason = reschedule(problem, chains)
        assert reason is None
        assert plan.makespan == 315
        assert [a.start for a in plan.actions] == [F(0), F(100), F(210)]

    def test_unsupported_condition_reported(self):
        problem = compile(scenario_fixture(1), ModelVariant.natural())
        chains = {"k1": [("walk", ("H", "L1", "L5"))]}
        plan, reason = reschedule(problem, chains)
        assert plan is None
        assert reason.startswith("condition ")
        assert "is not satisfied" in reason

    def test_unmet_objective_reported(self):
        problem = compile(line_mission(), ModelVariant.optimized())
        plan, reason = reschedule(problem, {"k1": []})
        assert plan is None
        assert "is not achieved" in reason

    def test_unknown_action_reported(self):
        problem = compile(line_mission())
        plan, reason = reschedule(problem, {"k1": [("fly", ("UAV1", "L1", "L9"))]})
        assert plan is None
        assert "unknown ground action" in reason

    def test_parallel_chains_shift_on_shared_state(self):
        problem = compile(scenario_fixture(1), ModelVariant.natural())
        chains = {
            "k1": [("explore_air", ("UAV1", "L1", "L5"))],
            "k2": [("explore_ground", ("UGV1", "L1", "L5"))],
            "k3": [("walk", ("H", "L1", "L5"))],
        }
        plan, reason = reschedule(problem, chains)
        assert reason is None
        walk = next(a for a in plan.actions if a.name == "walk")
        # the walk must wait for both explorations of the edge to finish
        assert walk.start == 100
        assert plan.makespan == 300


class TestSerialization:
    def test_plan_roundtrip(self):
        plan = solve(compile(line_mission()))
        again = plan_from_json(plan_to_json(plan))
        assert again.makespan == plan.makespan
        assert again.actions == plan.actions
        assert again.status == plan.status

    def test_roundtrip_preserves_fractions(self):
        a = ScheduledAction(0, "fly", ("UAV1", "L1", "L2"), "UAV1",
                            F(1, 3), F(7, 3), "k1", ("goto",),
                            display_verb="Move", display_targets=("L2",),
                            is_move=True)
        plan = Plan(status="feasible", actions=(a,), makespan=F(7, 3))
        again = plan_from_json(plan_to_json(plan))
        assert again.actions[0] == a
        assert again.makespan == F(7, 3)
