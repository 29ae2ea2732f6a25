"""Identity suite: generator determinism, acceptance run, counterexample minimisation"""

import json

import pytest

from bundles import (
    DiskBundle, Double, FiberProduct, Handle, MorseBundle, SphereBundle, UnionVertical,
    depth, fiber_dim, validate,
)
from chern import VirtualBundle
from errors import InvalidMinimizeCall
from script import ExprDef, parse, run
from torsion import TorsionEvaluator, fr_theory, mmm_theory
from verify import (
    CHECKS, CheckContext, ExprSpec, ExpressionGenerator, default_theories, gen_expr,
    get_check, handle_decomposition, minimize, random_theories, replay_script, run_suite,
    summary_records,
)

x = VirtualBundle.line("x")


class FlippedHandles(TorsionEvaluator):
    """Evaluator with the sign of every critical point contribution reversed"""

    def handle_term(self, handle):
        return -super().handle_term(handle)


@pytest.fixture(scope="module")
def acceptance_reports():
    theories = default_theories([1, 2], custom_count=10, seed=0)
    return run_suite(ExprSpec(seed=0, max_depth=4), theories, samples=200)


def test_generator_is_deterministic():
    spec = ExprSpec(seed=42, max_depth=4)
    assert gen_expr(spec) == gen_expr(ExprSpec(seed=42, max_depth=4))
    assert ExpressionGenerator(spec).sample(25) == ExpressionGenerator(spec).sample(25)


def test_generated_expressions_are_valid_and_bounded():
    spec = ExprSpec(seed=7, max_depth=3)
    for expr in ExpressionGenerator(spec).sample(150):
        assert validate(expr) == []
        assert depth(expr) <= 3
        assert fiber_dim(expr) <= spec.max_dim


def test_depth_one_gives_a_sphere_or_disk():
    for seed in range(20):
        assert isinstance(gen_expr(ExprSpec(seed=seed, max_depth=1)), (SphereBundle, DiskBundle))


def test_spec_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ExprSpec(max_depth=0)
    with pytest.raises(ValueError):
        ExprSpec(root_pool=())


def test_random_theories_are_decomposable():
    from torsion import decompose

    for theory in random_theories(10, 2, seed=3):
        decompose(theory)
    assert random_theories(4, 1, seed=3) == random_theories(4, 1, seed=3)


def test_check_names_are_unique():
    names = [check.name for check in CHECKS]
    assert len(names) == len(set(names))
    assert get_check("additivity_axiom").per_theory


def test_acceptance_suite_passes(acceptance_reports):
    failures = [r for r in acceptance_reports if not r.passed]
    assert failures == [], "\n".join(f"{r.name}: {r.lhs} != {r.rhs}\n{r.counterexample}" for r in failures)
    assert [r.name for r in acceptance_reports] == sorted(r.name for r in acceptance_reports)


@pytest.mark.parametrize("name", [
    "additivity_axiom", "boundary_definition", "product_formula", "stability",
    "four_piece_exchange", "duality_exercise", "uniqueness", "m2k_cross_validation",
    "transfer_axiom", "mmm_parity", "even_odd_sum",
])
def test_acceptance_checks_see_enough_samples(acceptance_reports, name):
    report = next(r for r in acceptance_reports if r.name == name)
    assert report.samples >= 200


def test_summary_records_are_json(acceptance_reports):
    records = summary_records(acceptance_reports)
    assert len(records) == len(CHECKS)
    for record in records:
        assert set(record) == {"name", "citation", "samples", "status"}
        json.dumps(record)


def test_corrupted_morse_rule_is_caught_and_minimised():
    spec = ExprSpec(seed=3, max_depth=2, weights={"morse": 1})
    checks = [get_check("m2k_cross_validation"), get_check("relative_additivity")]
    reports = run_suite(spec, [fr_theory(1), mmm_theory(1)], samples=30,
                        evaluator_factory=FlippedHandles, checks=checks)
    assert [r.status for r in reports] == ["fail", "fail"]
    for report in reports:
        script = parse(report.counterexample)
        expr = next(s.expr for s in script.statements if isinstance(s, ExprDef))
        assert depth(expr) <= 2
        assert isinstance(expr, MorseBundle)
        assert run(script).exit_code == 0


def test_minimize_shrinks_to_the_faulty_leaf():
    morse = MorseBundle(None, (Handle(0, VirtualBundle.trivial(0), x),))
    wrapped = FiberProduct(Double(UnionVertical(morse, morse)), DiskBundle(VirtualBundle.trivial(1)))
    context = CheckContext(FlippedHandles)
    smallest = minimize(wrapped, "relative_additivity", mmm_theory(1), context)
    assert smallest == morse
    assert minimize(morse, "relative_additivity", mmm_theory(1), context) == morse


def test_minimize_refuses_passing_expressions():
    morse = MorseBundle(None, (Handle(0, VirtualBundle.trivial(0), x),))
    with pytest.raises(InvalidMinimizeCall):
        minimize(morse, get_check("relative_additivity"), fr_theory(1))


def test_handle_decomposition_has_one_piece_per_handle():
    base = SphereBundle(x + VirtualBundle.trivial(1), 2)
    morse = MorseBundle(base, (Handle(1, VirtualBundle.trivial(1), x), Handle(2, x, VirtualBundle.trivial(1))))
    chain = handle_decomposition(morse)
    assert validate(chain) == []
    assert fiber_dim(chain) == 3


def test_replay_script_reproduces_the_value():
    morse = MorseBundle(None, (Handle(0, VirtualBundle.trivial(0), x),))
    text = replay_script(morse, mmm_theory(1), "relative_additivity")
    assert text.splitlines()[:2] == ["# counterexample for relative_additivity", "root x"]
    assert run(parse(text)).lines == ["x^2"]
