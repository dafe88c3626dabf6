"""Tests for explicit finite structures, checking, cliques, and JSON I/O."""

import pytest

from gfsg.syntax import parse_problem
from gfsg.normal_form import scottify
from gfsg.atomic_types import TypeContext
from gfsg.structures import (
    FiniteStructure,
    StructureBuilder,
    check_special,
    cliques,
    model_check,
)

from test_normal_form import LAMBDA


def _simple_sig(text: str):
    return parse_problem(text).signature


def test_from_relations_and_accessors():
    sig = _simple_sig("sig { unary P; binary R; equiv E; } formula { exists x P(x); }")
    s = FiniteStructure.from_relations(
        sig,
        3,
        {"P": [0, 2]},
        {"R": [(0, 1), (1, 1)], "E": [(0, 0), (1, 1), (2, 2), (0, 2), (2, 0)]},
    )
    assert s.holds_unary("P", 0) and not s.holds_unary("P", 1)
    assert s.holds_binary("R", 0, 1) and not s.holds_binary("R", 1, 0)
    assert s.holds_binary("R", 1, 1)
    assert s.holds_binary("E", 2, 0) and s.holds_binary("E", 0, 2)
    assert s.unary_set("P") == [0, 2]
    assert s.binary_pairs("R") == [(0, 1), (1, 1)]


def test_two_type_orientation():
    sig = _simple_sig("sig { binary R; } formula { exists x exists y (R(x,y) & R(x,y)); }")
    s = FiniteStructure.from_relations(sig, 2, {}, {"R": [(0, 1)]})
    ctx = s.context
    forward = s.two_type_of(0, 1)
    backward = s.two_type_of(1, 0)
    assert ctx.cross_value(forward, "R", True) and not ctx.cross_value(forward, "R", False)
    assert ctx.cross_value(backward, "R", False) and not ctx.cross_value(backward, "R", True)
    assert ctx.transpose(forward) == backward


def test_eval_fo():
    sig = _simple_sig("sig { unary P; binary R; } formula { exists x P(x); }")
    s = FiniteStructure.from_relations(sig, 3, {"P": [0]}, {"R": [(0, 1), (1, 2)]})
    p = parse_problem(
        "sig { unary P; binary R; } formula { exists x (P(x) & exists y (R(x,y) & !P(y))); }"
    )
    assert s.eval_fo(p.sentence)
    q = parse_problem(
        "sig { unary P; binary R; } formula { forall x forall y (R(x,y) -> P(x)); }"
    )
    assert not s.eval_fo(q.sentence)


def test_check_special_examples():
    sig = _simple_sig("sig { trans T; } formula { exists x (T(x,x) & T(x,x)); }")
    chain = FiniteStructure.from_relations(sig, 3, {}, {"T": [(0, 1), (1, 2)]})
    violations = check_special(chain)
    assert violations == ["T: transitivity broken on 0,1,2"]
    closed = FiniteStructure.from_relations(sig, 3, {}, {"T": [(0, 1), (1, 2), (0, 2)]})
    assert check_special(closed) == []

    esig = _simple_sig("sig { equiv E; } formula { exists x E(x,x); }")
    holey = FiniteStructure.from_relations(esig, 2, {}, {"E": [(0, 0)]})
    assert any("self-loop" in v for v in check_special(holey))
    asym = FiniteStructure.from_relations(esig, 2, {}, {"E": [(0, 0), (1, 1), (0, 1)]})
    assert any("absent" in v for v in check_special(asym))

    osig = _simple_sig("sig { porder O; } formula { exists x O(x,x); }")
    mutual = FiniteStructure.from_relations(
        osig, 2, {}, {"O": [(0, 0), (1, 1), (0, 1), (1, 0)]}
    )
    assert any("antisymmetry" in v for v in check_special(mutual))


def test_cliques():
    sig = _simple_sig("sig { equiv E; } formula { exists x E(x,x); }")
    identity = FiniteStructure.from_relations(sig, 3, {}, {"E": [(0, 0), (1, 1), (2, 2)]})
    assert cliques(identity, "E") == [(0,), (1,), (2,)]
    full = FiniteStructure.from_relations(
        sig, 3, {}, {"E": [(a, b) for a in range(3) for b in range(3)]}
    )
    assert cliques(full, "E") == [(0, 1, 2)]

    tsig = _simple_sig("sig { preord T; } formula { exists x T(x,x); }")
    chain = FiniteStructure.from_relations(
        tsig, 3, {}, {"T": [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)]}
    )
    assert cliques(chain, "T") == [(0,), (1,), (2,)]
    broken = FiniteStructure.from_relations(tsig, 3, {}, {"T": [(0, 1), (1, 2)]})
    with pytest.raises(ValueError):
        cliques(broken, "T")


def test_model_check_simple_positive():
    p = parse_problem("sig { unary P; } formula { exists x (P(x) & P(x)); }")
    nf = next(iter(scottify(p)))
    s = FiniteStructure.from_relations(nf.signature, 1, {"P": [0]}, {})
    assert model_check(s, nf) == []
    empty = FiniteStructure.from_relations(nf.signature, 1, {}, {})
    assert model_check(empty, nf) != []


def test_model_check_truncated_infinite_chain():
    # alternating P/Q chain: each witness must be a fresh element, so any
    # finite truncation leaves the final element without its witness
    p = parse_problem(LAMBDA)
    nf = next(iter(scottify(p)))
    n = 6
    e1 = [(a, a) for a in range(n)] + [(0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 4)]
    e2 = [(a, a) for a in range(n)] + [(1, 2), (2, 1), (3, 4), (4, 3)]
    marker = next(u for u in nf.signature.unary if u not in p.signature.unary)
    s = FiniteStructure.from_relations(
        nf.signature,
        n,
        {"P": [0, 2, 4], "Q": [1, 3, 5], "S": [0], marker: [1, 2, 3, 4]},
        {"E1": e1, "E2": e2},
    )
    assert check_special(s) == []
    violations = model_check(s, nf)
    assert violations and all("5" in v for v in violations)
    assert not s.eval_fo(p.sentence)


def test_builder_overwrite_assert():
    sig = _simple_sig("sig { binary R; } formula { exists x R(x,x); }")
    ctx = TypeContext(sig)
    b = StructureBuilder(ctx, 2)
    alpha = ctx.make_one_type()
    b.assign_one(0, alpha)
    b.assign_one(1, alpha)
    beta = ctx.make_two_type(alpha, alpha, [("R", True)])
    b.assign_pair(0, 1, beta)
    with pytest.raises(AssertionError):
        b.assign_pair(1, 0, ctx.binary_free(alpha, alpha))
    s = b.build()
    assert s.holds_binary("R", 0, 1) and not s.holds_binary("R", 1, 0)


def test_builder_fill_binary_free():
    sig = _simple_sig("sig { unary P; binary R; } formula { exists x P(x); }")
    ctx = TypeContext(sig)
    b = StructureBuilder(ctx, 3)
    for a in range(3):
        b.assign_one(a, ctx.make_one_type(unaries=["P"]))
    b.fill_missing_binary_free()
    s = b.build()
    assert s.binary_pairs("R") == []


def test_json_round_trip_and_determinism():
    sig = _simple_sig("sig { unary P; binary R; equiv E; } formula { exists x P(x); }")
    s = FiniteStructure.from_relations(
        sig, 3, {"P": [1]}, {"R": [(2, 0)], "E": [(0, 0), (1, 1), (2, 2)]}
    )
    text = s.to_json()
    again = FiniteStructure.from_json(text, sig)
    assert again.to_json() == text
    assert again.one_types == s.one_types and again.pairs == s.pairs
    doc = text
    assert '"domain": 3' in doc and '"E"' in doc


def test_json_validation_errors():
    sig = _simple_sig("sig { unary P; } formula { exists x P(x); }")
    with pytest.raises(ValueError):
        FiniteStructure.from_json('{"domain": 0, "unary": {}, "binary": {}}', sig)
    with pytest.raises(ValueError):
        FiniteStructure.from_json('{"domain": 2, "unary": {"Z": [0]}, "binary": {}}', sig)
    with pytest.raises(ValueError):
        FiniteStructure.from_json('{"domain": 2, "unary": {"P": [5]}, "binary": {}}', sig)
    with pytest.raises(ValueError):
        FiniteStructure.from_json(
            '{"domain": 2, "unary": {}, "binary": {"P": [[0]]}}', sig
        )


def test_restrict_and_with_signature():
    sig = _simple_sig("sig { unary P; binary R; } formula { exists x P(x); }")
    s = FiniteStructure.from_relations(
        sig, 4, {"P": [0, 3]}, {"R": [(0, 3), (1, 2), (3, 3)]}
    )
    sub = s.restrict([3, 0])
    assert sub.size == 2
    assert sub.holds_unary("P", 0) and sub.holds_unary("P", 1)
    assert sub.holds_binary("R", 1, 0) and sub.holds_binary("R", 0, 0)

    smaller = _simple_sig("sig { unary P; } formula { exists x P(x); }")
    reduced = s.with_signature(smaller)
    assert reduced.unary_set("P") == [0, 3]
    assert reduced.signature == smaller
