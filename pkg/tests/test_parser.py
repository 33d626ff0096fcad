"""Expression and theory-source parsing, including error reporting."""

import math
from fractions import Fraction

import pytest

from regbel import And, App, Atom, Fluent, Num, TheoryError, Var, parse_theory
from regbel.parser import (
    ParseError, parse_action_sequence, parse_formula, parse_term,
    parse_theory_source,
)
from regbel.syntax import ActionTerm, Const, num

DISCRETE_SRC = """
fluent h : int in [0, 20]
action fwd(z: int) { h := max(0, h - z) }
action grasp(o: obj) {}
sensor sonar(z: int) on h { if abs(h - z) <= 1 then 1/3 else 0 }
prior { if 2 <= h <= 11 then 1/10 else 0 }
"""


def test_numeric_literals():
    assert parse_term("0.1") == Num(Fraction(1, 10))
    assert parse_term("1/3") == Num(Fraction(1, 3))
    assert parse_term("-4") == Num(Fraction(-4))
    assert parse_term("pi") == Num(math.pi)


def test_chained_comparison_desugars_to_conjunction():
    phi = parse_formula("4 <= h <= 6", fluents={"h"})
    h = Fluent("h", None)
    assert phi == And((Atom("<=", num(4), h), Atom("<=", h, num(6))))


def test_bar_syntax_is_abs():
    assert parse_term("|x - 3|") == App("abs", (App("-", (Var("x"), num(3))),))


def test_parenthesized_formula_vs_term_backtracking():
    phi = parse_formula("(x <= 1 or y <= 2) and x = y")
    assert isinstance(phi, And)


def test_action_sequence_execution_order():
    sit = parse_action_sequence("fwd(4); fwd(-4)")
    assert sit.actions == (ActionTerm("fwd", (num(4),)),
                           ActionTerm("fwd", (num(-4),)))
    assert parse_action_sequence("").actions == ()


def test_action_sequence_object_argument():
    sit = parse_action_sequence("grasp(obj5)")
    assert sit.actions == (ActionTerm("grasp", (Const("obj5"),)),)


def test_fwd_effect_case():
    theory = parse_theory_source(DISCRETE_SRC)
    fwd = theory.actions["fwd"]
    assert list(fwd.effects) == ["h"]
    assert fwd.effects["h"] == App(
        "max", (num(0), App("-", (Fluent("h", None), Var("z")))))


def test_sonar_sensor_declaration():
    theory = parse_theory_source(DISCRETE_SRC)
    sonar = theory.sensors["sonar"]
    assert sonar.target == "h"
    assert sonar.param.name == "z"
    assert sonar.error == parse_term("if abs(h - z) <= 1 then 1/3 else 0",
                                     fluents={"h"})


def test_empty_action_body_is_frame_only():
    theory = parse_theory_source(DISCRETE_SRC)
    assert theory.actions["grasp"].effects == {}


def test_precondition_clause():
    theory = parse_theory_source("""
fluent h : real in [0, 10]
action back(z: real) requires h >= z { h := h - z }
prior { if 1 <= h <= 9 then 1/8 else 0 }
""")
    assert theory.actions["back"].precondition == Atom(
        ">=", Fluent("h", None), Var("z"))


def test_set_domain():
    theory = parse_theory_source("""
fluent mode : set {1, 3/2, 7}
prior { if mode = 1 then 1/2 else 1/4 }
""")
    assert theory.fluents[0].domain.values() == [Fraction(1), Fraction(3, 2),
                                                 Fraction(7)]


@pytest.mark.parametrize("bad", [
    "fluent h : int in [0, 5]\nfluent h : int in [0, 5]\nprior { 1 }",
    "fluent h : int in [0, 5]\naction a() { g := 1 }\nprior { 1 }",
    "fluent h : int in [0, 5]\nsensor s(z: real) on g { 1 }\nprior { 1 }",
    "fluent h : int in [0, 5]",
    "prior { 1 }",
    "fluent h : int in [0, 5]\nprior { 1 }\nprior { 1 }",
])
def test_bad_theory_sources_are_rejected(bad):
    with pytest.raises(ParseError):
        parse_theory_source(bad)


@pytest.mark.parametrize("bad", ["h <= ", "(x = 1", "exists (x = 1)", "1 ** 2"])
def test_bad_formulas_are_rejected(bad):
    with pytest.raises(ParseError):
        parse_formula(bad, fluents={"h"})


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_term("3 + $")
    assert "line 1" in str(exc.value) or "$" in str(exc.value)


def test_validate_rejects_negative_prior():
    theory = parse_theory("""
fluent h : int in [0, 5]
prior { 0 - 1/10 }
""")
    assert any("negative" in d for d in theory.diagnostics)


def test_validate_rejects_extra_fluent_in_likelihood():
    theory = parse_theory("""
fluent h : int in [0, 5]
fluent g : int in [0, 5]
sensor s(z: int) on h { if g <= z then 1 else 0 }
prior { 1/36 }
""")
    assert any("extra fluent" in d for d in theory.diagnostics)


def test_validate_rejects_zero_mass_prior():
    theory = parse_theory("""
fluent h : int in [0, 5]
prior { 0 }
""")
    assert any("zero" in d for d in theory.diagnostics)


def test_undeclared_action_lookup_fails():
    theory = parse_theory(DISCRETE_SRC)
    with pytest.raises(TheoryError):
        theory.ssa_rhs("h", ActionTerm("jump", (num(1),)))
