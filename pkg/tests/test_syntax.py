import pytest

from gfsg.syntax import (
    And, Eq, Exists, Forall, Iff, Implies, Not, Or, ParseError, Pred,
    Signature, SpecialKind, analyze_block, fragment_of, free_vars,
    node_count, parse_problem, pretty, swap_xy, validate_guardedness,
)

LAMBDA_TEXT = """
sig { unary P, Q, S; equiv E1, E2; }
formula {
    exists x (P(x) & S(x));
    forall x (S(x) -> !exists y (E2(x,y) & x != y));
    forall x (P(x) -> exists y (E1(x,y) & x != y & Q(y)));
    forall x (Q(x) -> exists y (E2(x,y) & x != y & P(y)));
    forall x forall y (E1(x,y) -> ((P(x) & P(y)) -> x = y));
    forall x forall y (E2(x,y) -> ((Q(x) & Q(y)) -> x = y));
}
"""


def test_parse_trivial_problem():
    p = parse_problem("sig{unary P; equiv E;} formula{ exists x (P(x) & P(x)); }")
    assert p.signature.unary == ("P",)
    assert p.signature.special == (("E", SpecialKind.EQUIV),)
    assert p.sentence == Exists("x", And(Pred("P", ("x",)), Pred("P", ("x",))))
    assert not p.equality_used


def test_parse_lambda():
    p = parse_problem(LAMBDA_TEXT)
    assert len(p.signature.unary) == 3
    assert len(p.signature.special) == 2
    assert p.equality_used
    assert validate_guardedness(p) == []
    assert fragment_of(p) == "EG"


def test_pretty_parse_roundtrip():
    p = parse_problem(LAMBDA_TEXT)
    text = f"sig {{ unary P, Q, S; equiv E1, E2; }} formula {{ {pretty(p.sentence)}; }}"
    q = parse_problem(text)
    assert q.sentence == p.sentence


def test_parse_operators_and_precedence():
    p = parse_problem(
        "sig{unary P, Q, R;} formula{ forall x (P(x) -> Q(x) & R(x) | P(x)); }")
    body = p.sentence.body
    # & binds tighter than |, which binds tighter than ->
    assert isinstance(body, Implies)
    assert isinstance(body.right, Or)
    assert isinstance(body.right.left, And)


def test_parse_iff_and_not():
    p = parse_problem("sig{unary P, Q;} formula{ forall x (P(x) -> (P(x) <-> !Q(x))); }")
    inner = p.sentence.body.right
    assert isinstance(inner, Iff)
    assert inner.right == Not(Pred("Q", ("x",)))


def test_implicit_conjunction_of_sentences():
    p = parse_problem("sig{unary P;} formula{ exists x P(x); exists y P(y); }")
    assert isinstance(p.sentence, And)


def test_comments_are_skipped():
    p = parse_problem("# header\nsig{unary P;} # mid\nformula{ exists x P(x); }\n# tail\n")
    assert isinstance(p.sentence, Exists)


def test_parse_errors_have_positions():
    with pytest.raises(ParseError) as err:
        parse_problem("sig{unary P;} formula{ exists x (P(x) & ); }")
    assert err.value.line == 1

    with pytest.raises(ParseError, match="undeclared"):
        parse_problem("sig{unary P;} formula{ exists x Q(x); }")

    with pytest.raises(ParseError, match="arity"):
        parse_problem("sig{unary P;} formula{ exists x P(x,y); }")

    with pytest.raises(ParseError, match="must be x or y"):
        parse_problem("sig{unary P;} formula{ exists z P(z); }")

    with pytest.raises(ParseError, match="free variables"):
        parse_problem("sig{unary P;} formula{ P(x); }")

    with pytest.raises(ParseError, match="declared twice"):
        parse_problem("sig{unary P; binary P;} formula{ exists x P(x); }")


def test_unguarded_special_use_is_a_violation():
    p = parse_problem(
        "sig{trans S, S2;} formula{ forall x forall y (S(x,y) -> S2(x,y)); }")
    violations = validate_guardedness(p)
    assert len(violations) == 1
    assert "S2(x, y)" in violations[0]


def test_symmetry_axiom_is_rejected():
    p = parse_problem(
        "sig{trans S;} formula{ forall x forall y (S(x,y) -> S(y,x)); }")
    violations = validate_guardedness(p)
    assert len(violations) == 1
    assert "S(y, x)" in violations[0]


def test_unguarded_universal_is_a_violation():
    p = parse_problem("sig{unary P, Q;} formula{ forall x (P(x) | Q(x)); }")
    violations = validate_guardedness(p)
    assert any("unguarded" in v for v in violations)


def test_flattened_guard_conjunction_is_accepted():
    p = parse_problem(
        "sig{unary P, Q; binary R;} formula{ forall x forall y (R(x,y) & P(x) -> Q(y)); }")
    assert validate_guardedness(p) == []
    shape = analyze_block(p.sentence)
    assert shape.guard == Pred("R", ("x", "y"))
    assert isinstance(shape.rest, Implies)


def test_trivial_reflexive_guard_does_not_count_as_equality():
    p = parse_problem("sig{unary P;} formula{ forall x (x = x -> P(x)); }")
    assert not p.equality_used
    assert validate_guardedness(p) == []
    q = parse_problem("sig{unary P;} formula{ forall x (x = x -> exists y (x = y & P(y))); }")
    assert q.equality_used


def test_self_guarded_single_atom_exists():
    p = parse_problem("sig{trans T;} formula{ !exists x T(x,x); }")
    assert validate_guardedness(p) == []


def test_fragments():
    assert fragment_of(parse_problem(LAMBDA_TEXT)) == "EG"
    p = parse_problem("sig{unary P; equiv E;} formula{ exists x P(x); }")
    assert fragment_of(p) == "EG_NO_EQ"
    p = parse_problem("sig{unary P; trans T;} formula{ exists x P(x); }")
    assert fragment_of(p) == "TG"
    p = parse_problem("sig{unary P; preord T;} formula{ exists x P(x); }")
    assert fragment_of(p) == "TRG"
    p = parse_problem("sig{unary P; peq T;} formula{ exists x P(x); }")
    assert fragment_of(p) == "TSG"
    p = parse_problem("sig{unary P; porder T;} formula{ exists x P(x); }")
    assert fragment_of(p) == "PG"
    p = parse_problem("sig{unary P; equiv E; trans T;} formula{ exists x P(x); }")
    assert fragment_of(p) == "MIXED"
    p = parse_problem("sig{unary P;} formula{ exists x P(x); }")
    assert fragment_of(p) == "EG_NO_EQ"


def test_free_vars_and_swap():
    f = Exists("y", And(Pred("R", ("x", "y")), Eq("x", "y")))
    assert free_vars(f) == {"x"}
    assert free_vars(swap_xy(f)) == {"y"}
    assert node_count(f) == 4


def test_signature_helpers():
    sig = Signature(("P",), ("R",), (("E", SpecialKind.EQUIV),))
    assert sig.arity("P") == 1
    assert sig.arity("R") == 2
    assert sig.arity("E") == 2
    assert sig.is_special("E") and not sig.is_special("R")
    ext = sig.with_extra_unary(("D1",))
    assert ext.declares("D1")
    assert sig.kind_of("E") is SpecialKind.EQUIV
