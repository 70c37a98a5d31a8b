"""Powerset maps and the relation/map dualities."""

import pytest
from hypothesis import given

import strategies as strat
from delmc import (
    CapExceeded,
    FiniteSet,
    InvariantViolation,
    NotAPullback,
    Rel,
    Subset,
    all_subsets,
    apply,
    beck_chevalley_equation,
    check_adjunction,
    check_beck_chevalley,
    check_biduality_laws,
    compose,
    compose_maps,
    dagger,
    empty_subset,
    exists_map,
    forall_map,
    full_subset,
    function_from_mapping,
    leq,
    map_leq,
    maps_equal,
    preimage_map,
    rel,
    relation_from_join_map,
    relation_from_meet_map,
    verify_preserves_all_joins,
    verify_preserves_all_meets,
)
from delmc.powerset import JOIN, MEET, find_apply_witness

X = FiniteSet("x", ("u", "v"))
Y = FiniteSet("y", ("a", "b", "c"))
R = rel(X, Y, [("u", "a"), ("u", "b"), ("v", "c")])


def sub(carrier, *members):
    return Subset(carrier, frozenset(members))


def test_exists_map_hand_example():
    em = exists_map(R)
    assert em.kind == JOIN
    assert apply(em, sub(X, "u")) == sub(Y, "a", "b")
    assert apply(em, sub(X, "v")) == sub(Y, "c")
    assert apply(em, empty_subset(X)) == empty_subset(Y)
    assert apply(em, full_subset(X)) == full_subset(Y)


def test_forall_map_hand_example():
    fm = forall_map(R)
    assert fm.kind == MEET
    # a point of Y lands in the image iff all its R-predecessors were included
    assert apply(fm, sub(X, "u")) == sub(Y, "a", "b")
    assert apply(fm, empty_subset(X)) == empty_subset(Y)
    assert apply(fm, full_subset(X)) == full_subset(Y)
    # the box modality is the forall map along the dagger
    box = forall_map(dagger(R))
    assert apply(box, sub(Y, "a", "b")) == sub(X, "u")
    assert apply(box, sub(Y, "a")) == empty_subset(X)


def test_all_subsets_counts_powerset():
    subs = list(all_subsets(Y))
    assert len(subs) == 8
    assert len(set(subs)) == 8


@given(strat.relations())
def test_round_trip_through_maps(r):
    assert relation_from_join_map(exists_map(r)) == r
    assert relation_from_meet_map(forall_map(r)) == r


@given(strat.relations())
def test_exists_preserves_joins_forall_preserves_meets(r):
    assert verify_preserves_all_joins(exists_map(r))
    assert verify_preserves_all_meets(forall_map(r))


@given(strat.relations())
def test_adjunction(r):
    assert check_adjunction(r)


@given(strat.composable_pairs())
def test_compose_maps_functorial(pair):
    r1, r2 = pair
    assert compose_maps(exists_map(r1), exists_map(r2)) == exists_map(compose(r1, r2))
    # the meet-map functor is contravariant-free here: same application order
    assert compose_maps(forall_map(r1), forall_map(r2)) == forall_map(compose(r1, r2))


def test_compose_maps_rejects_mixed_kinds():
    with pytest.raises(InvariantViolation):
        compose_maps(exists_map(R), forall_map(dagger(R)))


@given(strat.composable_pairs())
def test_biduality_laws(pair):
    r1, r2 = pair
    rep = check_biduality_laws(r1, r2)
    assert rep.ok, rep.failures()


def test_order_isomorphism_covariant():
    smaller = rel(X, Y, [("u", "a")])
    bigger = rel(X, Y, [("u", "a"), ("v", "c")])
    assert leq(smaller, bigger)
    assert map_leq(exists_map(smaller), exists_map(bigger))
    assert not map_leq(exists_map(bigger), exists_map(smaller))


def test_order_antiisomorphism_contravariant():
    smaller = rel(X, Y, [("u", "a")])
    bigger = rel(X, Y, [("u", "a"), ("v", "c")])
    assert map_leq(forall_map(bigger), forall_map(smaller))
    assert not map_leq(forall_map(smaller), forall_map(bigger))


def test_maps_equal_and_witness():
    em = exists_map(R)
    assert maps_equal(em, em)
    other = exists_map(rel(X, Y, [("u", "a")]))
    w = find_apply_witness(em, other)
    assert w is not None
    assert apply(em, w) != apply(other, w)


def test_caps_guard_blowup():
    big = FiniteSet("big", tuple(f"e{i}" for i in range(13)))
    ident = Rel(big, big, frozenset((e, e) for e in big))
    with pytest.raises(CapExceeded):
        find_apply_witness(exists_map(ident), forall_map(ident))
    with pytest.raises(CapExceeded):
        check_adjunction(Rel(big, big, frozenset()), cap=10)


def test_preimage_map_kinds():
    f = function_from_mapping(X, Y, {"u": "a", "v": "a"})
    pj = preimage_map(f, JOIN)
    pm = preimage_map(f, MEET)
    assert pj.kind == JOIN and pm.kind == MEET
    # for functions both kinds compute the same inverse image
    for s in all_subsets(Y):
        assert apply(pj, s) == apply(pm, s)
    assert apply(pj, sub(Y, "a")) == full_subset(X)
    assert apply(pj, sub(Y, "b", "c")) == empty_subset(X)


def test_beck_chevalley_on_canonical_square():
    # pullback of f: X -> Z, g: Y -> Z
    Z = FiniteSet("z", ("z1", "z2"))
    f = function_from_mapping(X, Z, {"u": "z1", "v": "z2"})
    g = function_from_mapping(Y, Z, {"a": "z1", "b": "z1", "c": "z2"})
    apex = FiniteSet("pb", ("(u,a)", "(u,b)", "(v,c)"))
    p = rel(apex, X, [("(u,a)", "u"), ("(u,b)", "u"), ("(v,c)", "v")])
    q = rel(apex, Y, [("(u,a)", "a"), ("(u,b)", "b"), ("(v,c)", "c")])
    assert beck_chevalley_equation(p, q, f, g)
    assert check_beck_chevalley(p, q, f, g)


def test_check_beck_chevalley_rejects_non_pullback():
    Z = FiniteSet("z", ("z1", "z2"))
    f = function_from_mapping(X, Z, {"u": "z1", "v": "z2"})
    g = function_from_mapping(Y, Z, {"a": "z1", "b": "z1", "c": "z2"})
    # drop one apex point: still commutes, no longer a pullback
    apex = FiniteSet("pb", ("(u,a)", "(v,c)"))
    p = rel(apex, X, [("(u,a)", "u"), ("(v,c)", "v")])
    q = rel(apex, Y, [("(u,a)", "a"), ("(v,c)", "c")])
    with pytest.raises(NotAPullback):
        check_beck_chevalley(p, q, f, g)
    assert not beck_chevalley_equation(p, q, f, g)
