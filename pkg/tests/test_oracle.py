"""Tests for the bounded brute-force model finder.

Its verdicts are validated against the exhaustive structure enumeration from
the normal-form tests, which shares no code with the search.
"""

import random

import pytest

from gfsg.syntax import parse_problem
from gfsg.oracle import OracleTimeout, brute_force_find_model

from test_normal_form import EQUISAT_CASES, LAMBDA, satisfiable_sizes
from problem_gen import random_problem

TG_INFINITY = """
sig { unary P; trans T; }
formula {
  exists x P(x);
  forall x (P(x) -> exists y (T(x,y) & P(y)));
  !exists x T(x,x);
}
"""


def test_trivial_sat():
    p = parse_problem("sig { unary P; } formula { exists x (P(x) & P(x)); }")
    model = brute_force_find_model(p, 3)
    assert model is not None and model.size == 1
    assert model.satisfies_problem(p)


def test_minimality():
    p = parse_problem(
        """
        sig { unary P; binary R; }
        formula {
          exists x (P(x) & P(x));
          forall x (P(x) -> exists y (R(x,y) & !P(y)));
        }
        """
    )
    model = brute_force_find_model(p, 4)
    assert model is not None and model.size == 2


def test_lambda_has_no_small_models():
    p = parse_problem(LAMBDA)
    assert brute_force_find_model(p, 4) is None


def test_tg_infinity_axiom_has_no_small_models():
    p = parse_problem(TG_INFINITY)
    assert brute_force_find_model(p, 4) is None
    # dropping irreflexivity makes a one-element model possible
    relaxed = parse_problem(
        """
        sig { unary P; trans T; }
        formula {
          exists x P(x);
          forall x (P(x) -> exists y (T(x,y) & P(y)));
        }
        """
    )
    model = brute_force_find_model(relaxed, 4)
    assert model is not None and model.size == 1


def test_timeout_reported_distinctly():
    p = parse_problem(LAMBDA)
    with pytest.raises(OracleTimeout):
        brute_force_find_model(p, 6, time_limit=0.0)


@pytest.mark.parametrize("text", EQUISAT_CASES)
def test_agrees_with_exhaustive_enumeration_curated(text):
    p = parse_problem(text)
    sizes = satisfiable_sizes(p, 2)
    model = brute_force_find_model(p, 2)
    if sizes:
        assert model is not None and model.size == min(sizes)
        assert model.satisfies_problem(p)
    else:
        assert model is None


def test_agrees_with_exhaustive_enumeration_random():
    rng = random.Random(20240817)
    checked = 0
    for _ in range(60):
        p = random_problem(rng, max_unary=2, max_binary=1, max_special=1, depth=2)
        sizes = satisfiable_sizes(p, 2)
        model = brute_force_find_model(p, 2)
        if sizes:
            assert model is not None and model.size == min(sizes), p
            assert model.satisfies_problem(p)
        else:
            assert model is None, p
        checked += 1
    assert checked == 60


def test_returned_models_verify():
    rng = random.Random(99)
    for _ in range(40):
        p = random_problem(rng, max_unary=2, max_binary=1, max_special=2, depth=2)
        model = brute_force_find_model(p, 3)
        if model is not None:
            assert model.satisfies_problem(p)
