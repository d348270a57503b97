import json
from dataclasses import replace
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from fleetplan.chronicles import (
    ACTION,
    INITIAL,
    METHOD,
    ChronicleError,
    ChronicleTemplate,
    Condition,
    DecompositionNode,
    Effect,
    Subtask,
    TypeMismatchError,
    TypeTree,
    UnknownTaskError,
    Variable,
    ground_task,
    instantiate,
    merge_instance,
    problem_from_json,
    problem_to_json,
    recursive_tasks,
    validate_problem,
)
from fleetplan.domain import ModelVariant, compile, scenario_fixture, tree_size


@pytest.fixture(scope="module")
def natural():
    return compile(scenario_fixture(1), ModelVariant.natural())


@pytest.fixture(scope="module")
def optimized():
    return compile(scenario_fixture(1), ModelVariant.optimized())


def template(problem, name):
    return next(t for t in problem.templates if t.name == name)


class TestTypeTree:
    def test_subtyping(self):
        tree = TypeTree.from_edges([("Vehicle", "Object"), ("UAV", "Robot"),
                                    ("Robot", "Vehicle")])
        assert tree.is_subtype("UAV", "Vehicle")
        assert tree.is_subtype("UAV", "Object")
        assert tree.is_subtype("UAV", "UAV")
        assert not tree.is_subtype("Vehicle", "UAV")
        assert tree.violations() == []

    def test_cycle_detected(self):
        tree = TypeTree({"Object": None, "A": "B", "B": "A"})
        assert any("cycle" in v for v in tree.violations())

    def test_unknown_supertype(self):
        tree = TypeTree({"Object": None, "A": "Ghost"})
        assert any("unknown supertype" in v for v in tree.violations())


class TestInstantiate:
    def test_walk_condition_resolves(self, natural):
        walk = template(natural, "walk")
        inst = instantiate(walk, {"h": "H", "f": "L1", "t": "L2"}, natural)
        assert inst.conditions()[0] == Condition("s", "s", "loc", ("H",), "L1")
        assert inst.effects()[0] == Effect("s", "e", "loc", ("H",), "L2")

    def test_fly_rejects_ground_vehicle(self, natural):
        fly = template(natural, "fly")
        with pytest.raises(TypeMismatchError):
            instantiate(fly, {"a": "UGV1"}, natural)

    def test_unknown_variable_rejected(self, natural):
        fly = template(natural, "fly")
        with pytest.raises(ChronicleError):
            instantiate(fly, {"nope": "UAV1"}, natural)

    def test_temporal_variable_needs_number(self, natural):
        fly = template(natural, "fly")
        with pytest.raises(TypeMismatchError):
            instantiate(fly, {"s": "L1"}, natural)
        inst = instantiate(fly, {"s": Fraction(3)}, natural)
        assert inst.binding["s"] == 3

    def test_identity_instantiation(self, natural):
        fly = template(natural, "fly")
        inst = instantiate(fly, {}, natural)
        assert inst.conditions() == fly.conditions
        assert inst.subtasks() == fly.subtasks
        assert len(inst.free_variables()) == len(fly.object_vars())

    def test_merge_is_homomorphic(self, natural):
        fly = template(natural, "fly")
        b1 = {"a": "UAV1"}
        b2 = {"f": "L1", "t": "L2"}
        direct = instantiate(fly, {**b1, **b2}, natural)
        merged = merge_instance(instantiate(fly, b1, natural), b2, natural)
        assert direct == merged

    def test_merge_rejects_conflicting_rebinding(self, natural):
        fly = template(natural, "fly")
        inst = instantiate(fly, {"a": "UAV1"}, natural)
        with pytest.raises(ChronicleError):
            merge_instance(inst, {"a": "UGV1"}, natural)


class TestValidateProblem:
    def test_fixture_is_well_formed(self, natural, optimized):
        assert validate_problem(natural) == []
        assert validate_problem(optimized) == []

    def test_action_with_subtasks_flagged(self, natural):
        fly = template(natural, "fly")
        bad = replace(fly, subtasks=(Subtask("k1", "s", "e", "goto", ("a", "t")),))
        broken = replace(natural, templates=(*natural.templates, replace(bad, name="bad")))
        assert any("action has subtasks" in v for v in validate_problem(broken))

    def test_duplicate_initial_flagged(self, natural):
        extra = replace(natural.initial, name="initial2")
        broken = replace(natural, templates=(*natural.templates, extra))
        assert "initial chronicle not unique" in validate_problem(broken)

    def test_method_with_effects_flagged(self, natural):
        noop = template(natural, "goto_noop")
        bad = replace(noop, name="bad_m", effects=template(natural, "fly").effects)
        broken = replace(natural, templates=(*natural.templates, bad))
        assert any("method has effects" in v for v in validate_problem(broken))

    def test_unknown_state_variable_flagged(self, natural):
        fly = template(natural, "fly")
        bad = replace(fly, name="bad_a",
                      conditions=(Condition("s", "s", "ghost", ("a",), "f"),))
        broken = replace(natural, templates=(*natural.templates, bad))
        assert any("unknown state variable" in v for v in validate_problem(broken))


class TestDecomposition:
    def test_goto_is_recursive(self, natural):
        assert "goto" in recursive_tasks(natural)
        assert "explore" not in recursive_tasks(natural)

    def test_depth_zero_keeps_only_closed_methods(self, natural):
        tree = ground_task("goto", ("v", "t"), natural, 0)
        # the task node plus the noop method; recursive methods are removed
        assert tree.size() == 2
        assert tree.count("method") == 1

    def test_negative_depth_rejected(self, natural):
        with pytest.raises(ValueError):
            ground_task("goto", ("v", "t"), natural, -1)

    def test_unknown_task_rejected(self, natural):
        with pytest.raises(UnknownTaskError):
            ground_task("ghost", (), natural, 1)

    def test_enumerated_sizes_match_closed_forms(self, natural, optimized):
        for n in range(1, 5):
            opt = ground_task("goto", ("v", "t"), optimized, n)
            assert opt.size() == tree_size(ModelVariant.optimized(), n) == 2 + 10 * n
        for n in (1, 2):
            nat = ground_task("goto", ("v", "t"), natural, n)
            assert nat.size() == tree_size(ModelVariant.natural(), n) == 2 + 3 * 4 ** n

    def test_natural_expansion_recurrence(self, natural):
        # each extra level expands three recursive leaves, adding a method,
        # an action and a fresh task subtree under each
        sizes = [ground_task("goto", ("v", "t"), natural, n).size()
                 for n in range(0, 5)]
        assert sizes[0] == 2
        for prev, cur in zip(sizes, sizes[1:]):
            assert cur == 8 + 3 * prev

    def test_node_counters(self):
        leaf = DecompositionNode("action", "a", None)
        root = DecompositionNode("task", "t", None, [
            DecompositionNode("method", "m", None, [leaf, leaf])])
        assert root.size() == 4
        assert root.count("action") == 2
        assert root.count("task") == 1


class TestJsonInterchange:
    def test_roundtrip_preserves_problem(self, natural):
        data = problem_to_json(natural)
        again = problem_from_json(data)
        assert problem_to_json(again) == data
        assert again.objects == natural.objects
        assert again.initial == natural.initial
        assert again.templates == natural.templates

    def test_output_matches_schema(self, natural, optimized):
        schema = json.loads(
            resources.files("fleetplan.schemas")
            .joinpath("problem.schema.json").read_text())
        for problem in (natural, optimized):
            jsonschema.validate(problem_to_json(problem), schema)

    def test_roundtrip_is_json_serializable(self, natural):
        text = json.dumps(problem_to_json(natural))
        assert problem_from_json(json.loads(text)) is not None
