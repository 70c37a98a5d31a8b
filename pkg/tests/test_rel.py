"""Relation algebra: category laws, dagger structure, lattice ops, tabulation."""

import pytest
from hypothesis import given

import strategies as strat
from delmc import (
    CarrierMismatch,
    FiniteSet,
    InvariantViolation,
    NotAFunction,
    Rel,
    apply_function,
    check_modularity,
    closure_reflexive_transitive,
    compose,
    dagger,
    empty,
    function_from_mapping,
    identity,
    is_function,
    is_injective,
    is_jointly_monic,
    is_reflexive,
    is_surjective,
    is_symmetric,
    is_transitive,
    join,
    leq,
    meet,
    rel,
    tabulate,
    total,
)

AB = FiniteSet("ab", ("a1", "a2"))
CD = FiniteSet("cd", ("c1", "c2", "c3"))


def test_finite_set_rejects_duplicates():
    with pytest.raises(InvariantViolation):
        FiniteSet("bad", ("x", "x"))


def test_rel_rejects_pairs_outside_carriers():
    with pytest.raises(InvariantViolation):
        Rel(AB, CD, frozenset({("a1", "nope")}))
    with pytest.raises(InvariantViolation):
        Rel(AB, CD, frozenset({("nope", "c1")}))


def test_compose_requires_matching_middle_carrier():
    r = total(AB, CD)
    with pytest.raises(CarrierMismatch):
        compose(r, r)


def test_compose_on_known_example():
    r1 = rel(AB, CD, [("a1", "c1"), ("a2", "c2")])
    r2 = rel(CD, AB, [("c1", "a2"), ("c3", "a1")])
    assert compose(r1, r2) == rel(AB, AB, [("a1", "a2")])


@given(strat.composable_triples())
def test_compose_associative(triple):
    r1, r2, r3 = triple
    assert compose(compose(r1, r2), r3) == compose(r1, compose(r2, r3))


@given(strat.relations())
def test_identity_units(r):
    assert compose(identity(r.dom), r) == r
    assert compose(r, identity(r.cod)) == r


@given(strat.relations())
def test_dagger_involution(r):
    assert dagger(dagger(r)) == r
    assert dagger(r).dom == r.cod
    assert dagger(r).cod == r.dom


@given(strat.composable_pairs())
def test_dagger_contravariant(pair):
    r1, r2 = pair
    assert dagger(compose(r1, r2)) == compose(dagger(r2), dagger(r1))


@given(strat.modularity_triples())
def test_modular_law(triple):
    r1, r2, r3 = triple
    # r1;r2 ∧ r3  ≤  (r1 ∧ r3;r2†);r2
    lhs = meet(compose(r1, r2), r3)
    rhs = compose(meet(r1, compose(r3, dagger(r2))), r2)
    assert leq(lhs, rhs)
    assert check_modularity(r1, r2, r3)


@given(strat.relations())
def test_meet_join_lattice(r):
    t = total(r.dom, r.cod)
    e = empty(r.dom, r.cod)
    assert meet(r, t) == r
    assert join(r, e) == r
    assert meet(r, e) == e
    assert join(r, t) == t
    assert leq(e, r) and leq(r, t)


def test_meet_requires_same_carriers():
    with pytest.raises(CarrierMismatch):
        meet(total(AB, CD), total(CD, AB))


@given(strat.composable_pairs())
def test_composition_monotone(pair):
    r1, r2 = pair
    smaller = Rel(r1.dom, r1.cod, frozenset(list(r1.pairs)[: len(r1.pairs) // 2]))
    assert leq(compose(smaller, r2), compose(r1, r2))


def test_function_predicates():
    f = rel(AB, CD, [("a1", "c1"), ("a2", "c2")])
    assert is_function(f) and is_injective(f)
    assert not is_surjective(f)
    g = rel(AB, CD, [("a1", "c1")])
    assert not is_function(g)  # partial
    h = rel(AB, CD, [("a1", "c1"), ("a1", "c2"), ("a2", "c3")])
    assert not is_function(h)  # not single-valued
    onto = rel(CD, AB, [("c1", "a1"), ("c2", "a2"), ("c3", "a2")])
    assert is_function(onto) and is_surjective(onto) and not is_injective(onto)


def test_endo_predicates():
    x = FiniteSet("x", ("u", "v"))
    r = rel(x, x, [("u", "v")])
    assert not is_reflexive(r) and not is_symmetric(r) and is_transitive(r)
    assert is_reflexive(join(r, identity(x)))
    assert is_symmetric(join(r, dagger(r)))
    loop = rel(x, x, [("u", "v"), ("v", "u")])
    assert not is_transitive(loop)


def test_reflexive_transitive_closure():
    x = FiniteSet("x", ("u", "v", "w"))
    r = rel(x, x, [("u", "v"), ("v", "w")])
    star = closure_reflexive_transitive(r)
    assert is_reflexive(star) and is_transitive(star)
    assert leq(r, star)
    assert ("u", "w") in star.pairs
    # least such preorder: closing again adds nothing
    assert closure_reflexive_transitive(star) == star


@given(strat.relations())
def test_tabulation_recovers_relation(r):
    tab = tabulate(r)
    assert is_function(tab.r1) and is_function(tab.r2)
    assert compose(dagger(tab.r1), tab.r2) == r
    if len(tab.apex):
        assert is_jointly_monic(tab.r1, tab.r2)


def test_jointly_monic_requires_functions():
    x = FiniteSet("x", ("u", "v"))
    not_fn = rel(x, x, [("u", "u"), ("u", "v"), ("v", "v")])
    with pytest.raises(NotAFunction):
        is_jointly_monic(not_fn, identity(x))


def test_function_from_mapping_validates():
    f = function_from_mapping(AB, CD, {"a1": "c3", "a2": "c3"})
    assert apply_function(f, "a1") == "c3"
    with pytest.raises(NotAFunction):
        function_from_mapping(AB, CD, {"a1": "c1"})
    with pytest.raises(InvariantViolation):
        function_from_mapping(AB, CD, {"a1": "c1", "a2": "zzz"})


def test_apply_function_rejects_non_function_point():
    g = rel(AB, CD, [("a1", "c1"), ("a1", "c2"), ("a2", "c3")])
    with pytest.raises(NotAFunction):
        apply_function(g, "a1")
