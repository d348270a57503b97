from fractions import Fraction

from fleetplan.domain import ModelVariant, compile, scenario_fixture
from fleetplan.solver import Plan, ScheduledAction, SolveConfig, reschedule, solve
from fleetplan.validator import validate_plan

F = Fraction


def problem_for(step=1, variant="natural"):
    return compile(scenario_fixture(step), ModelVariant.from_label(variant))


def act(i, name, params, vehicle, start, end, chain="k1"):
    return ScheduledAction(i, name, params, vehicle, F(start), F(end), chain, ())


class TestValidPlans:
    def test_solver_output_validates(self):
        problem = problem_for(1, "optimized")
        plan = solve(problem, SolveConfig(time_budget=120.0))
        assert validate_plan(problem, plan) == []

    def test_rescheduled_plan_validates(self):
        problem = problem_for(1)
        chains = {
            "k2": [("explore_air", ("UAV1", "L1", "L5"))],
            "k3": [("explore_ground", ("UGV1", "L1", "L5"))],
            "k1": [("walk", ("H", "L1", "L5"))],
        }
        plan, reason = reschedule(problem, chains)
        assert reason is None
        # chains k2/k3 end as robots elsewhere; their freedom tasks close,
        # and the walk is fully supported by the explorations
        violations = validate_plan(problem, plan)
        assert [v for v in violations if "walk" in v] == []


class TestViolations:
    def test_unfound_plan_rejected(self):
        problem = problem_for(1)
        out = validate_plan(problem, Plan(status="infeasible"))
        assert out and "no schedule" in out[0]

    def test_walk_on_unexplored_edge(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(200),
                    actions=(act(0, "walk", ("H", "L1", "L5"), "H", 0, 200),))
        out = validate_plan(problem, plan)
        assert any("explored_air(L1, L5)=true unsupported" in v for v in out)
        assert any("explored_ground(L1, L5)=true unsupported" in v for v in out)

    def test_overlapping_transitions(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(150), actions=(
            act(0, "fly", ("UAV1", "L1", "L5"), "UAV1", 0, 100, "k1"),
            act(1, "fly", ("UAV1", "L1", "L2"), "UAV1", 50, 180, "k2")))
        out = validate_plan(problem, plan)
        assert any(v.startswith("conflicting transitions on loc(UAV1)")
                   for v in out)

    def test_chain_order_enforced(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(210), actions=(
            act(0, "fly", ("UAV1", "L1", "L5"), "UAV1", 0, 100),
            act(1, "fly", ("UAV1", "L5", "L10"), "UAV1", 90, 200)))
        out = validate_plan(problem, plan)
        assert any("starts before" in v for v in out)

    def test_wrong_duration(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(90),
                    actions=(act(0, "fly", ("UAV1", "L1", "L5"), "UAV1", 0, 90),))
        out = validate_plan(problem, plan)
        assert any("duration" in v for v in out)

    def test_wrong_vehicle_type(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(100),
                    actions=(act(0, "fly", ("UGV1", "L1", "L5"), "UGV1", 0, 100),))
        out = validate_plan(problem, plan)
        assert any("not of type UAV" in v for v in out)

    def test_missing_goal_chain(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(0), actions=())
        out = validate_plan(problem, plan)
        assert any("goto(H, L8) is not achieved" in v for v in out)

    def test_action_outside_horizon(self):
        problem = problem_for(1)
        plan = Plan(status="feasible", makespan=F(50),
                    actions=(act(0, "fly", ("UAV1", "L1", "L5"), "UAV1", 0, 100),))
        out = validate_plan(problem, plan)
        assert any("outside [0, 50]" in v for v in out)

    def test_secured_obstacle_allows_walk(self):
        problem = problem_for(3)
        chains = {
            "k2": [("explore_air", ("UAV1", "L1", "L5")),
                   ("secure_OB_L5", ("UAV1", "OB_L5"))],
            "k3": [("explore_ground", ("UGV1", "L1", "L5"))],
            "k1": [("walk", ("H", "L1", "L5"))],
        }
        plan, reason = reschedule(problem, chains)
        assert reason is None
        walk = next(a for a in plan.actions if a.name == "walk")
        secure = next(a for a in plan.actions if a.name == "secure_OB_L5")
        assert walk.start >= secure.end
        out = validate_plan(problem, plan)
        assert [v for v in out if "walk" in v or "obstacle" in v] == []

    def test_unsecured_obstacle_blocks_walk(self):
        problem = problem_for(2)
        plan = Plan(status="feasible", makespan=F(200),
                    actions=(act(0, "walk", ("H", "L1", "L5"), "H", 0, 200),))
        out = validate_plan(problem, plan)
        assert any("obstacle(L1, L5)=false unsupported" in v for v in out)
