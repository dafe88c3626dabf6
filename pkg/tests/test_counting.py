"""Tests for counting types, class admissibility, and class surgery."""

import random

import pytest

from gfsg.counting import (
    ClassOracle,
    ClassSearchBudget,
    CountingType,
    EnrichedCountingType,
    class_pair_candidates,
    class_size_bound,
    class_witness_errors,
    counting_type_of,
    cut,
    cutting_admissible_check,
    directional_fe_conjuncts,
    enriched_type_of,
    extend_class,
    is_class_admissible,
    is_enriched_admissible,
    m_phi,
    strict_pair_type,
    sym_fe_conjuncts,
)
from gfsg.normal_form import Orientation, rewrite_one_var_conjuncts, scottify
from gfsg.structures import StructureBuilder
from gfsg.syntax import And, Eq, Iff, Implies, Not, Or, Pred, parse_problem
from problem_gen import random_problem
from test_syntax import LAMBDA_TEXT

PREORDER_TEXT = """
sig { unary P, Q; preord T; }
formula {
  exists x P(x);
  forall x (P(x) -> exists y (T(x,y) & Q(y)));
}
"""

UNIQUENESS_TEXT = """
sig { unary P; equiv E; }
formula {
  exists x P(x);
  forall x forall y (E(x,y) -> ((P(x) & P(y)) -> x = y));
}
"""

SELF_WITNESS_TEXT = """
sig { unary P; equiv E; }
formula {
  exists x P(x);
  forall x (P(x) -> exists y (E(x,y) & P(y)));
}
"""


def first_nf(text):
    p = parse_problem(text)
    return rewrite_one_var_conjuncts(next(iter(scottify(p))))


def oracle_for(text):
    return ClassOracle(first_nf(text))


# ---------------------------------------------------------------------------
# counting-type values


def make_types(oracle):
    ctx = oracle.context
    return ctx, ctx.all_one_types()


def test_counting_type_construction_and_accessors():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    a = ctx.make_one_type(["P"], ["E"])
    b = ctx.make_one_type([], ["E"])
    t = CountingType.of({a: 2, b: 1})
    assert t.count(a) == 2 and t.count(b) == 1
    assert t.total == 3
    assert set(t.support) == {a, b}
    assert t.mapping() == {a: 2, b: 1}
    # merging duplicate entries and dropping zeros
    t2 = CountingType.of([(a, 1), (a, 1), (b, 0), (b, 1)])
    assert t2.mapping() == {a: 2, b: 1}
    assert t2 == CountingType.of({a: 2, b: 1})


def test_counting_type_rejects_empty_and_negative():
    oracle = oracle_for(UNIQUENESS_TEXT)
    a = oracle.context.make_one_type(["P"], ["E"])
    with pytest.raises(ValueError):
        CountingType.of({})
    with pytest.raises(ValueError):
        CountingType.of({a: 0})
    with pytest.raises(ValueError):
        CountingType.of({a: -1})
    with pytest.raises(ValueError):
        CountingType.of({a: 3}, cap=0)


def test_counting_type_cap_clips():
    oracle = oracle_for(UNIQUENESS_TEXT)
    a = oracle.context.make_one_type(["P"], ["E"])
    b = oracle.context.make_one_type([], ["E"])
    t = CountingType.of({a: 9, b: 1}, cap=4)
    assert t.count(a) == 4 and t.count(b) == 1
    assert t.cap == 4


def test_cut_preserves_support_and_tightens_cap():
    oracle = oracle_for(UNIQUENESS_TEXT)
    a = oracle.context.make_one_type(["P"], ["E"])
    b = oracle.context.make_one_type([], ["E"])
    t = CountingType.of({a: 5, b: 1})
    c = cut(t, 2)
    assert c.mapping() == {a: 2, b: 1}
    assert c.cap == 2
    assert cut(c, 7).cap == 2  # looser cuts keep the tighter cap
    with pytest.raises(ValueError):
        cut(t, 0)


def test_extends_and_safely_extends():
    oracle = oracle_for(UNIQUENESS_TEXT)
    a = oracle.context.make_one_type(["P"], ["E"])
    b = oracle.context.make_one_type([], ["E"])
    small = CountingType.of({a: 1, b: 2})
    grown = CountingType.of({a: 1, b: 5})
    bad = CountingType.of({a: 2, b: 5})
    assert grown.extends(small)
    assert grown.safely_extends(small)
    assert bad.extends(small)
    assert not bad.safely_extends(small)  # a count of one grew
    assert not small.extends(CountingType.of({a: 1}))  # support differs
    assert small.bumped(b).mapping() == {a: 1, b: 3}


# ---------------------------------------------------------------------------
# size bounds


def test_m_phi_shape_and_lambda_values():
    nf = first_nf(LAMBDA_TEXT)
    bound = m_phi(nf)
    # 4 unary symbols (P, Q, S plus one fresh marker) and 2 constrained
    # symbols: 2^6 atomic 1-types.
    assert bound.a_count == 64
    assert bound.formula_size == nf.size() == 74
    assert bound.value == 3 * 64 * 74**3 == 77803008
    # one within-class witness conjunct per symbol, so the padded core keeps
    # at most 2 + 4 + 8 elements per 1-type
    assert bound.core_bound == 64 * (1 + 1 + 1)


def test_class_size_bound_padding():
    oracle = oracle_for(LAMBDA_TEXT)
    assert oracle.size_bound("E1") == 64 * (2 + 4 + 8)
    assert oracle.size_bound("E2") == 64 * (2 + 4 + 8)
    # no witness conjuncts at all still pads to two
    other = oracle_for("sig { unary P; equiv E; } formula { exists x P(x); }")
    assert other.size_bound("E") == other.context.one_count() * 14


# ---------------------------------------------------------------------------
# admissibility on handwritten formulas


def test_uniqueness_blocks_duplicate_types():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    at_p = ctx.make_one_type(["P"], ["E"])
    no_p = ctx.make_one_type([], ["E"])
    assert oracle.admissible(CountingType.of({at_p: 1}), "E") is True
    assert oracle.admissible(CountingType.of({at_p: 2}), "E") is False
    assert oracle.admissible(CountingType.of({at_p: 1, no_p: 2}), "E") is True
    w = oracle.witness(CountingType.of({at_p: 1, no_p: 2}), "E")
    assert w is not None and w.structure.size == 3
    assert not class_witness_errors(ctx, oracle.grouping, w)


def test_missing_self_loop_is_inadmissible():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    no_loop = ctx.make_one_type(["P"], [])
    assert oracle.admissible(CountingType.of({no_loop: 1}), "E") is False


def test_self_witnessing_singleton():
    oracle = oracle_for(SELF_WITNESS_TEXT)
    ctx = oracle.context
    at_p = ctx.make_one_type(["P"], ["E"])
    w = oracle.witness(CountingType.of({at_p: 1}), "E")
    assert w is not None and w.structure.size == 1


def test_lambda_class_admissibility():
    oracle = oracle_for(LAMBDA_TEXT)
    ctx = oracle.context
    # Fresh marker from the rewrite: _d1 records "has a proper E2-neighbour".
    plain_p = ctx.make_one_type(["P"], ["E1", "E2"])
    plain_q = ctx.make_one_type(["Q"], ["E1", "E2"])
    marked_p = ctx.make_one_type(["P", "_d1"], ["E1", "E2"])
    marked_q = ctx.make_one_type(["Q", "_d1"], ["E1", "E2"])
    # a lone P lacks its Q witness inside its E1-class
    assert oracle.admissible(CountingType.of({plain_p: 1}), "E1") is False
    assert oracle.admissible(CountingType.of({plain_p: 1, plain_q: 1}), "E1") is True
    # two P in one E1-class contradict the uniqueness conjunct
    assert oracle.admissible(CountingType.of({plain_p: 2}), "E1") is False
    # elements of a proper E2-class must carry the marker
    assert (
        oracle.admissible(CountingType.of({plain_p: 2, plain_q: 1}), "E2") is False
    )
    assert (
        oracle.admissible(CountingType.of({marked_p: 2, marked_q: 1}), "E2") is True
    )


def test_witness_is_deterministic():
    first = oracle_for(LAMBDA_TEXT)
    second = oracle_for(LAMBDA_TEXT)
    ctx = first.context
    marked_p = ctx.make_one_type(["P", "_d1"], ["E1", "E2"])
    marked_q = ctx.make_one_type(["Q", "_d1"], ["E1", "E2"])
    theta = CountingType.of({marked_p: 2, marked_q: 1})
    a = first.witness(theta, "E2")
    b = second.witness(theta, "E2")
    assert a.structure.to_json() == b.structure.to_json()


def test_budget_exhaustion_is_reported():
    nf = first_nf(LAMBDA_TEXT)
    oracle = ClassOracle(nf, budget=1)
    ctx = oracle.context
    marked_p = ctx.make_one_type(["P", "_d1"], ["E1", "E2"])
    marked_q = ctx.make_one_type(["Q", "_d1"], ["E1", "E2"])
    theta = CountingType.of({marked_p: 2, marked_q: 1})
    assert oracle.admissible(theta, "E2") is None
    with pytest.raises(ClassSearchBudget):
        is_class_admissible(ctx, oracle.grouping, theta, "E2", budget=1)


def test_status_caches_on_cut_types():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    no_p = ctx.make_one_type([], ["E"])
    small = CountingType.of({no_p: 2})
    big = CountingType.of({no_p: 2000})
    assert oracle.admissible(big, "E") is True
    # the huge type was decided through its cut
    assert oracle.witness(big, "E").structure.size == oracle.size_bound("E")


# ---------------------------------------------------------------------------
# class surgery


def test_extend_class_without_equality():
    # no equality anywhere: the self-loop closure preserves all conjuncts
    oracle = oracle_for(
        "sig { unary A, B; equiv E; } formula {"
        " exists x A(x);"
        " forall x (A(x) -> exists y (E(x,y) & B(y)));"
        " forall x forall y (E(x,y) -> !(A(x) & B(x) & A(y))); }"
    )
    ctx = oracle.context
    at_a = ctx.make_one_type(["A"], ["E"])
    at_b = ctx.make_one_type(["B"], ["E"])
    theta = CountingType.of({at_a: 1, at_b: 1})
    w = oracle.witness(theta, "E")
    assert w is not None
    grown = extend_class(ctx, w, at_b)
    assert grown.theta.mapping() == {at_a: 1, at_b: 2}
    assert not class_witness_errors(ctx, oracle.grouping, grown)
    again = extend_class(ctx, grown, at_b)
    assert again.theta.count(at_b) == 3
    assert not class_witness_errors(ctx, oracle.grouping, again)


def test_extend_class_with_equality_needs_a_donor():
    oracle = oracle_for(LAMBDA_TEXT)
    ctx = oracle.context
    marked_p = ctx.make_one_type(["P", "_d1"], ["E1", "E2"])
    marked_q = ctx.make_one_type(["Q", "_d1"], ["E1", "E2"])
    theta = CountingType.of({marked_p: 2, marked_q: 1})
    w = oracle.witness(theta, "E2")
    grown = extend_class(ctx, w, marked_p, require_two=True)
    assert grown.theta.mapping() == {marked_p: 3, marked_q: 1}
    assert grown.theta.safely_extends(theta)
    assert not class_witness_errors(ctx, oracle.grouping, grown)
    with pytest.raises(ValueError):
        extend_class(ctx, w, marked_q, require_two=True)  # only one donor
    with pytest.raises(ValueError):
        extend_class(ctx, w, ctx.make_one_type(["S"], ["E1", "E2"]))


def test_cutting_admissible_check_small():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    at_p = ctx.make_one_type(["P"], ["E"])
    no_p = ctx.make_one_type([], ["E"])
    theta = CountingType.of({at_p: 1, no_p: 5})
    assert cutting_admissible_check(ctx, oracle.grouping, theta, "E", 2)
    assert cutting_admissible_check(ctx, oracle.grouping, theta, "E", 8)


# ---------------------------------------------------------------------------
# directional pair types and enriched counting types


def test_strict_pair_type_on_preorder():
    oracle = oracle_for(PREORDER_TEXT)
    ctx = oracle.context
    trigger = ctx.make_one_type(["P", "_w2"], ["T"])
    witness = ctx.make_one_type(["Q"], ["T"])
    beta = oracle.strict_pair("T", trigger, witness, down=True)
    assert beta is not None
    assert ctx.cross_value(beta, "T", True) and not ctx.cross_value(beta, "T", False)
    up = oracle.strict_pair("T", trigger, witness, down=False)
    assert up is not None
    assert ctx.cross_value(up, "T", False) and not ctx.cross_value(up, "T", True)
    # the matrix filter rules out non-witnesses
    matrix = Pred("Q", ("y",))
    assert oracle.strict_pair("T", trigger, witness, True, matrix) is not None
    bare = ctx.make_one_type(["P"], ["T"])
    assert oracle.strict_pair("T", trigger, bare, True, matrix) is None


def test_strict_pair_type_impossible_on_equivalence():
    oracle = oracle_for(LAMBDA_TEXT)
    ctx = oracle.context
    marked_p = ctx.make_one_type(["P", "_d1"], ["E1", "E2"])
    marked_q = ctx.make_one_type(["Q", "_d1"], ["E1", "E2"])
    assert strict_pair_type(ctx, "E1", marked_p, marked_q, down=True) is None


def test_enriched_admissibility_on_preorder():
    oracle = oracle_for(PREORDER_TEXT)
    ctx = oracle.context
    trigger = ctx.make_one_type(["P", "_w2"], ["T"])
    witness = ctx.make_one_type(["Q"], ["T"])
    theta = CountingType.of({trigger: 1})
    assert len(directional_fe_conjuncts(oracle.grouping, "T", Orientation.DOWN)) == 1
    good = EnrichedCountingType.of(theta, above=(), below=(witness,))
    bad = EnrichedCountingType.of(theta, above=(), below=())
    assert is_enriched_admissible(oracle, good, "T") == "yes"
    assert is_enriched_admissible(oracle, bad, "T") == "no"
    # a non-witness below-type alone does not help
    bare = ctx.make_one_type(["P"], ["T"])
    weak = EnrichedCountingType.of(theta, above=(), below=(bare,))
    assert is_enriched_admissible(oracle, weak, "T") == "no"


def test_enriched_type_of_reads_strict_edges():
    oracle = oracle_for(PREORDER_TEXT)
    ctx = oracle.context
    trigger = ctx.make_one_type(["P", "_w2"], ["T"])
    witness = ctx.make_one_type(["Q"], ["T"])
    builder = StructureBuilder(ctx, 2)
    builder.assign_one(0, trigger)
    builder.assign_one(1, witness)
    builder.assign_pair(0, 1, ctx.make_two_type(trigger, witness, [("T", True)]))
    s = builder.build()
    top = enriched_type_of(s, "T", [0])
    bottom = enriched_type_of(s, "T", [1])
    assert top.below == (witness,) and top.above == ()
    assert bottom.above == (trigger,) and bottom.below == ()
    assert counting_type_of(s).mapping() == {trigger: 1, witness: 1}
    assert counting_type_of(s, [0], cap=1).mapping() == {trigger: 1}


def test_counting_type_of_rejects_empty_selection():
    oracle = oracle_for(UNIQUENESS_TEXT)
    ctx = oracle.context
    builder = StructureBuilder(ctx, 1)
    builder.assign_one(0, ctx.make_one_type(["P"], ["E"]))
    s = builder.build()
    with pytest.raises(ValueError):
        counting_type_of(s, [])


# ---------------------------------------------------------------------------
# randomized admissibility suite: witnesses, extension, cutting


def _mentions_proper_eq(f) -> bool:
    if isinstance(f, Eq):
        return f.left != f.right
    if isinstance(f, Not):
        return _mentions_proper_eq(f.sub)
    if isinstance(f, (And, Or, Implies, Iff)):
        return _mentions_proper_eq(f.left) or _mentions_proper_eq(f.right)
    return False


def _count_patterns(size):
    if size == 1:
        return [(1,), (2,), (3,)]
    return [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)]


def collect_admissible_pairs(seed=20240818, want=110, max_problems=400):
    """Admissible (oracle, theta, symbol, witness) tuples from random input."""
    from gfsg.syntax import SpecialKind

    rng = random.Random(seed)
    found = []
    problems = 0
    while len(found) < want and problems < max_problems:
        problems += 1
        p = random_problem(
            rng,
            max_unary=2,
            max_binary=1,
            max_special=1,
            depth=2,
            kinds=[SpecialKind.EQUIV, SpecialKind.PREORDER],
            n_sentences=rng.randint(1, 3),
        )
        if not p.signature.special:
            continue
        symbol = p.signature.special_names[0]
        try:
            disjuncts = list(scottify(p))
        except Exception:
            continue
        for nf in disjuncts[:2]:
            nf = rewrite_one_var_conjuncts(nf)
            oracle = ClassOracle(nf, budget=20_000)
            ctx = oracle.context
            looped = [
                a
                for a in ctx.all_one_types()
                if ctx.self_loop(a, symbol) and ctx.is_univ_admissible_1(a)
            ][:6]
            candidates = []
            for a in looped:
                for counts in _count_patterns(1):
                    candidates.append(CountingType.of({a: counts[0]}))
            for i, a in enumerate(looped):
                for b in looped[i + 1 :]:
                    for counts in _count_patterns(2):
                        candidates.append(
                            CountingType.of({a: counts[0], b: counts[1]})
                        )
            taken = 0
            for theta in candidates:
                if taken >= 3 or len(found) >= want:
                    break
                try:
                    if oracle.admissible(theta, symbol) is True:
                        found.append((oracle, theta, symbol))
                        taken += 1
                except Exception:
                    continue
    return found


def test_randomized_admissible_classes_verify_extend_and_cut():
    found = collect_admissible_pairs()
    assert len(found) >= 100, f"only found {len(found)} admissible pairs"
    checked_no_eq = 0
    checked_eq = 0
    for oracle, theta, symbol in found:
        ctx = oracle.context
        w = oracle.witness(theta, symbol)
        assert w is not None
        assert not class_witness_errors(ctx, oracle.grouping, w)
        assert theta.total <= 8
        # growing the class by one element
        conjuncts = oracle.grouping.phi_sym_S[symbol]
        eq_free = not any(
            _mentions_proper_eq(c.matrix)
            or (c.trigger is not None and _mentions_proper_eq(c.trigger))
            for c in conjuncts
        )
        target = w.theta.support[0]
        if eq_free:
            grown = extend_class(ctx, w, target)
            assert grown.theta.extends(w.theta)
            assert not class_witness_errors(ctx, oracle.grouping, grown)
            checked_no_eq += 1
        if w.theta.count(target) >= 2:
            grown = extend_class(ctx, w, target, require_two=True)
            assert grown.theta.safely_extends(w.theta)
            assert not class_witness_errors(ctx, oracle.grouping, grown)
            checked_eq += 1
        # cutting never destroys admissibility at small counts
        level = min(m_phi(oracle.nf).value, 8)
        try:
            assert cutting_admissible_check(
                ctx, oracle.grouping, theta, symbol, level, budget=20_000
            )
        except ClassSearchBudget:
            pass
    assert checked_no_eq >= 20
    assert checked_eq >= 10
