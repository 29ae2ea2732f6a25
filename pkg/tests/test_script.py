"""Script language: tokenizer, parser diagnostics, rendering and the runner"""

import pytest

from bundles import SphereBundle
from chern import VirtualBundle
from errors import ParseError, SemanticError
from script import (
    ExprDef, Query, RootDecl, Script, TheoryDef, parse, render, run_text, tokenize,
)
from torsion import fr_theory
from verify import ExprSpec, ExpressionGenerator, generic_theories, random_theories


def test_first_sphere_value():
    result = run_text("root x; vb l = line(x); S = sphere(l, n=1); theory F = fr(1); query tau(F, S)")
    assert result.lines == ["1/2*z3*x^2"]
    assert result.exit_code == 0


def test_undefined_expression_is_a_semantic_error():
    with pytest.raises(SemanticError) as info:
        parse("root x\ntheory F = fr(1)\nquery tau(F, E)")
    assert info.value.line == 3
    assert "E is not defined" in str(info.value)
    assert info.value.statement == "query tau(F, E)"


def test_hatcher_difference_torsion_vanishes():
    text = "root x\nquery tdelta(custom(1, 1/2*z3, -1/2*z3), hatcher(line(x), n=4, total=10))"
    assert run_text(text).lines == ["0"]


def test_newlines_inside_brackets_do_not_end_statements():
    kinds = [t.kind for t in tokenize("a = (1,\n2)\nb")]
    assert kinds == ["NAME", "OP", "OP", "NUMBER", "OP", "NUMBER", "OP", "SEP", "NAME", "EOF"]
    assert [t.kind for t in tokenize("# only a comment")] == ["EOF"]


def test_parse_error_position_and_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse("root x\nS = sphere(line(x) n=1)")
    assert (info.value.line, info.value.column) == (2, 20)
    assert info.value.expected == ["','"]


def test_unexpected_character():
    with pytest.raises(ParseError) as info:
        parse("root x $")
    assert (info.value.line, info.value.column) == (1, 8)


def test_unknown_query_lists_the_known_ones():
    with pytest.raises(ParseError) as info:
        parse("query foo(1)")
    assert "tau" in info.value.expected


@pytest.mark.parametrize("text", [
    "root x\nroot x",
    "root z3",
    "theory fr = fr(1)",
    "vb l = line(x)",
    "root x\nS = sphere(line(x), n=4)",
    "root x; theory F = fr(1); query tau(F, F)",
    "root x; S = sphere(line(x) + trivial(1), n=2); query transfer(S, y^2)",
    "root x; S = sphere(line(x) + trivial(1), n=2); query transfer(S, x)",
    "theory C = custom(0, 1, 1)",
    "E = dv(trivial(n=4, chi=1, d0=1, d1=1))",
])
def test_semantic_errors(text):
    with pytest.raises(SemanticError):
        parse(text)


def test_several_roots_in_one_statement():
    script = parse("root x, y")
    assert script.statements == [RootDecl("x"), RootDecl("y")]


def test_failing_query_is_reported_and_skipped():
    result = run_text("query decompose(custom(1, z5, 1)); query chi(sphere(trivial(3), n=2))")
    assert result.lines == ["2"]
    assert result.exit_code == 2
    assert result.errors[0].startswith("line 1: decompose:")


def test_degree_zero_and_transfer_queries():
    text = "root x; S = sphere(line(x) + trivial(1), n=2); query m2k(S, 0); query transfer(S, x^2)"
    assert run_text(text).lines == ["2", "2*x^2"]


def test_render_is_canonical_text():
    x = VirtualBundle.line("x")
    sphere = SphereBundle(x + VirtualBundle.trivial(1), 2)
    script = Script([
        RootDecl("x"),
        ExprDef("S", sphere),
        Query("tau", (fr_theory(1), sphere)),
    ])
    assert render(script) == (
        "root x\n"
        "S = sphere(line(x) + trivial(1), n=2)\n"
        "query tau(fr(1), sphere(line(x) + trivial(1), n=2))\n"
    )


def test_generated_scripts_survive_render_and_parse():
    expressions = ExpressionGenerator(ExprSpec(seed=11, max_depth=3)).sample(500)
    theories = generic_theories(250, 1, seed=11) + random_theories(250, 2, seed=11)
    for expr, theory in zip(expressions, theories):
        script = Script([
            RootDecl("x"),
            RootDecl("y"),
            TheoryDef("T", theory),
            ExprDef("E", expr),
            Query("tau", (theory, expr)),
            Query("m2k", (expr, theory.k)),
        ])
        assert parse(render(script)) == script
