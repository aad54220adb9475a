"""Tests for angelic forest collection and repair constraints."""
import pytest

from repairforge.config import AngelicBounds
from repairforge.errors import EvalBudgetExceeded, InfeasibleLocation, NoRepairableLocation, UnsupportedLocation
from repairforge.lang import parse_expression
from repairforge.lang.ast import Hole, ValueKind
from repairforge.lang.patching import FixLocation, LocationKind, location_at
from repairforge.services.angelic import (
    RepairConstraint,
    angelic_domain,
    build_repair_constraint,
    collect_forest,
    install_probe,
    replay_path,
)
from repairforge.services.fault_localization import candidate_locations, suspiciousness
from repairforge.services.interpreter import Verdict, run_suite
from repairforge.services.synthesis import check_candidate

REPAIRABLE = ["triangle", "square", "sum_to", "withdraw"]


def _constraint(program, suite, line, **bounds):
    pp = install_probe(program, location_at(program, line))
    return pp, build_repair_constraint(pp, suite, AngelicBounds(**bounds))


def test_probe_installation(triangle):
    program, _ = triangle
    pp = install_probe(program, location_at(program, 6))
    assert pp.hole == Hole(live_vars=("a", "b", "c"), kind=ValueKind.BOOLEAN)
    assert pp.original == parse_expression("a == b || b == c")
    assert pp.original_program == program
    with pytest.raises(UnsupportedLocation):
        install_probe(program, FixLocation(line=6, kind=LocationKind.RETURN_EXPR))


def test_triangle_line6_constraint(triangle):
    program, suite = triangle
    _, rc = _constraint(program, suite, 6)
    assert rc.value_kind is ValueKind.BOOLEAN
    assert rc.original == "a == b || b == c"
    assert rc.unreached_tests == ["t1", "t2"]

    forced = {forest.test_name: [path.forced_values for path in forest.passing_paths] for forest in rc.forests}
    assert forced == {"t3": [[True]], "t4": [[True]], "t5": [[True]], "t6": [[False]]}
    assert rc.forests[1].passing_paths[0].steps[0].env == {"a": 2, "b": 3, "c": 2}


def test_constraint_distinguishes_fix_from_bug(triangle):
    program, suite = triangle
    _, rc = _constraint(program, suite, 6)
    assert check_candidate(parse_expression("a == b || b == c || a == c"), rc)
    assert not check_candidate(parse_expression("a == b || b == c"), rc)


def test_integer_constraint(triangle):
    program, suite = triangle
    _, rc = _constraint(program, suite, 8)
    assert rc.value_kind is ValueKind.INTEGER
    forced = {forest.test_name: [path.forced_values for path in forest.passing_paths] for forest in rc.forests}
    assert forced == {"t4": [[2]], "t6": [[3]]}
    assert rc.named_constants["SCALENE"] == 3


def test_unreached_failing_test_is_infeasible(triangle):
    program, suite = triangle
    pp = install_probe(program, location_at(program, 3))
    with pytest.raises(InfeasibleLocation) as exc:
        build_repair_constraint(pp, suite)
    assert exc.value.test_name == "t4"


def test_angelic_domain(triangle, square):
    program, suite = triangle
    pp = install_probe(program, location_at(program, 6))
    assert angelic_domain(pp, suite.cases[0]) == [True, False]

    program, suite = square
    pp = install_probe(program, location_at(program, 2))
    domain = angelic_domain(pp, suite.cases[1])
    assert domain == sorted(set(domain))
    assert {-8, 8, 3, 9, 6}.issubset(domain)


def test_loop_condition_forest(sum_to):
    program, suite = sum_to
    _, rc = _constraint(program, suite, 4)
    forced = {forest.test_name: [path.forced_values for path in forest.passing_paths] for forest in rc.forests}
    assert forced["zero"] == [[False]]
    assert forced["one"] == [[True, False]]
    assert forced["four"] == [[True, True, True, True, False]]
    assert check_candidate(parse_expression("i <= n"), rc)
    assert not check_candidate(parse_expression("i < n"), rc)


def test_eval_budget_exceeded(sum_to):
    program, suite = sum_to
    pp = install_probe(program, location_at(program, 4))
    four = next(case for case in suite.cases if case.name == "four")
    with pytest.raises(EvalBudgetExceeded):
        collect_forest(pp, four, AngelicBounds(max_evals=3))


def test_max_paths_caps_forest(withdraw):
    program, suite = withdraw
    pp = install_probe(program, location_at(program, 5))
    rejected = next(case for case in suite.cases if case.name == "rejected")
    forest = collect_forest(pp, rejected, AngelicBounds(max_paths=1))
    assert [path.forced_values for path in forest.passing_paths] == [[-1]]


def test_constraint_json_round_trip(triangle):
    program, suite = triangle
    _, rc = _constraint(program, suite, 6)
    assert RepairConstraint.model_validate_json(rc.model_dump_json()) == rc


@pytest.mark.parametrize("name", REPAIRABLE)
def test_every_recorded_path_replays(corpus, name):
    program, suite = corpus(name)
    try:
        locations = candidate_locations(suspiciousness(run_suite(program, suite)), program)
    except NoRepairableLocation:
        pytest.skip("nothing to localize")

    replayed = 0
    for location in locations:
        pp = install_probe(program, location)
        try:
            rc = build_repair_constraint(pp, suite, AngelicBounds(max_replays=2048))
        except (InfeasibleLocation, EvalBudgetExceeded):
            continue
        tests = {case.name: case for case in suite.cases}
        for forest in rc.forests:
            for path in forest.passing_paths:
                assert replay_path(pp, tests[forest.test_name], path) is Verdict.PASS
                replayed += 1
    assert replayed > 0
