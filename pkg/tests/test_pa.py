import itertools
import random

import pytest
from hypothesis import given, strategies as st

from intvass import pa
from intvass.pa import (
    INT,
    NAT,
    And,
    Exists,
    Forall,
    FormulaError,
    Implies,
    MissingVariable,
    Not,
    NoneWithinBound,
    NotExistential,
    Or,
    Term,
    conj,
    evaluate,
    free_variables,
    ge_canonical,
    hoist_existentials,
    pretty,
    sat_bounded,
    size,
    term,
    to_prenex_pi2,
    var_eq,
)
from intvass.encode import phi_perm


def test_evaluate_simple_terms():
    assert evaluate(term({"x": 1}, ">=", 1), {"x": 0}) is False
    assert evaluate(term({"x": 2, "y": -1}, "=", 3), {"x": 2, "y": 1}) is True


def test_evaluate_missing_variable():
    with pytest.raises(MissingVariable):
        evaluate(term({"x": 1}, ">=", 0), {})


def test_evaluate_phi_perm():
    f = phi_perm(2)
    assert evaluate(f, {"sig1": 2, "sig2": 1}) is True
    assert evaluate(f, {"sig1": 1, "sig2": 1}) is False


def test_phi_perm_counts_exact_permutations():
    f = phi_perm(2)
    good = [a for a in pa.all_assignments(["sig1", "sig2"], 1, 2) if evaluate(f, a)]
    assert len(good) == 2


def test_empty_connectives():
    assert evaluate(And(()), {}) is True
    assert evaluate(Or(()), {}) is False


@given(
    st.lists(
        st.tuples(
            st.dictionaries(st.sampled_from("xyz"), st.integers(-3, 3), max_size=3),
            st.sampled_from([">=", "<=", "=", "!=", ">", "<"]),
            st.integers(-4, 4),
        ),
        min_size=1,
        max_size=4,
    ),
    st.dictionaries(st.sampled_from("xyz"), st.integers(-5, 5), min_size=3, max_size=3),
)
def test_sugar_elimination_preserves_truth(specs, assignment):
    f = conj([term(c, op, b) for c, op, b in specs])
    assert evaluate(f, assignment) == evaluate(ge_canonical(f), assignment)


def test_sat_bounded_finds_assignment():
    f = Exists((("x", NAT),), term({"x": 1}, ">=", 5))
    got = sat_bounded(f, 10)
    assert isinstance(got, dict) and got["x"] >= 5


def test_sat_bounded_respects_bound():
    f = Exists((("x", NAT),), term({"x": 1}, ">=", 5))
    got = sat_bounded(f, 3)
    assert isinstance(got, NoneWithinBound)
    assert got.bound == 3


def test_sat_bounded_integer_sorts_reach_negatives():
    f = Exists((("x", INT),), term({"x": 1}, "<=", -2))
    got = sat_bounded(f, 4)
    assert isinstance(got, dict) and got["x"] <= -2


def test_sat_bounded_soundness_random():
    rng = random.Random(1)
    for _ in range(20):
        parts = [
            term(
                {v: rng.randint(-2, 2) for v in ("x", "y")},
                rng.choice([">=", "=", "<=", "!="]),
                rng.randint(-3, 3),
            )
            for _ in range(3)
        ]
        f = Exists((("x", NAT), ("y", INT)), conj(parts))
        got = sat_bounded(f, 3)
        if isinstance(got, dict):
            _, matrix = hoist_existentials(f)
            assert evaluate(matrix, got)


def test_sat_bounded_rejects_universal():
    f = Forall((("x", NAT),), term({"x": 1}, ">=", 0))
    with pytest.raises(NotExistential):
        sat_bounded(f, 2)


def test_hoist_renames_clashes():
    inner1 = Exists((("u", NAT),), term({"u": 1, "x": 1}, ">=", 0))
    inner2 = Exists((("u", NAT),), term({"u": 1, "x": -1}, "<=", 0))
    bound, matrix = hoist_existentials(And((inner1, inner2)))
    names = [v for v, _ in bound]
    assert len(set(names)) == 2
    assert free_variables(And((inner1, inner2))) == {"x"}
    assert free_variables(matrix) == {"x"} | set(names)


# -- prenexing -------------------------------------------------------------------


def test_prenex_shape_example():
    # not (exists x. (exists u. x=u) and not (exists v. x=v))
    psi_a = Exists((("u", NAT),), term({"x": 1, "u": -1}, "=", 0))
    psi_b = Exists((("v", NAT),), term({"x": 1, "v": -1}, "=", 0))
    f = Not(Exists((("x", NAT),), And((psi_a, Not(psi_b)))))
    g = to_prenex_pi2(f)
    assert isinstance(g, Forall)
    assert [v for v, _ in g.bound] == ["x", "u"]
    assert isinstance(g.body, Exists)
    assert isinstance(g.body.body, Implies)


def test_prenex_rejects_bad_shape():
    with pytest.raises(FormulaError):
        to_prenex_pi2(term({"x": 1}, ">=", 0))


def test_prenex_keeps_truth_under_bounded_check():
    # small-domain equivalence check of the rename-and-pull step
    psi_a = Exists((("u", NAT),), term({"x": 1, "u": -1}, "=", 0))
    psi_b = Exists((("v", NAT),), term({"x": 1, "v": -2}, "=", 0))
    f = Not(Exists((("x", NAT),), And((psi_a, Not(psi_b)))))
    g = to_prenex_pi2(f)

    def truth_direct(bound):
        for x in range(bound + 1):
            in_a = any(x - u == 0 for u in range(bound + 1))
            in_b = any(x - 2 * v == 0 for v in range(bound + 1))
            if in_a and not in_b:
                return False
        return True

    def truth_prenex(bound):
        assert isinstance(g, Forall)
        names = [v for v, _ in g.bound]
        inner = g.body
        assert isinstance(inner, Exists)
        inner_names = [v for v, _ in inner.bound]
        for outer_vals in itertools.product(range(bound + 1), repeat=len(names)):
            env = dict(zip(names, outer_vals))
            if not any(
                evaluate(inner.body, {**env, **dict(zip(inner_names, vals))})
                for vals in itertools.product(range(bound + 1), repeat=len(inner_names))
            ):
                return False
        return True

    assert truth_direct(6) == truth_prenex(6) is False


# -- sizes -----------------------------------------------------------------------


def test_size_nodes_convention():
    assert size(term({"x": 1}, ">=", 1), "nodes") == 3


def test_size_unary_counts_constants():
    assert size(term({"x": 1}, ">=", 7), "unary") == 2 + 8 + 1


def test_phi_perm_size_is_quadratic():
    sizes = {k: size(phi_perm(k), "unary") for k in (2, 4, 8, 16)}
    # ratio s(2k)/s(k) approaches 4 for a quadratic
    assert 3.0 < sizes[16] / sizes[8] < 5.0
    assert sizes[16] > sizes[8] > sizes[4] > sizes[2]


def test_pretty_is_deterministic():
    f = Exists((("x", NAT),), And((term({"x": 1, "y": -2}, ">=", -1), Or(()))))
    assert pretty(f) == pretty(f)
    assert "∃x:nat" in pretty(f)


def test_var_eq_builder():
    assert var_eq("a", 3) == Term((("a", 1),), "=", 3)
