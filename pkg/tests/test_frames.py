"""Frame constructions: lifts, products, subframes, pullbacks, bisimulations."""

import random

import pytest
from hypothesis import given
import hypothesis.strategies as st

import strategies as strat
from delmc import (
    AgentMismatch,
    AgentSet,
    Atom,
    EmptyGroup,
    FiniteSet,
    FrameMap,
    KripkeFrame,
    KripkeModel,
    NotMonotone,
    Subset,
    UnknownAgent,
    all_subsets,
    apply,
    apply_function,
    check_pullback_preserves_bounded,
    common_knowledge_relation,
    compose,
    compose_maps,
    dagger,
    extension,
    forall_map,
    frame_map,
    function_from_mapping,
    identity,
    identity_map,
    initial_lift,
    is_bisimulation,
    is_bounded,
    is_monotone,
    is_reflexive,
    is_transitive,
    largest_preserved_check,
    leq,
    preimage_map,
    product,
    pullback,
    rel,
    subframe,
    total,
)
from delmc.generators import (
    random_bounded_map,
    random_formula,
    random_frame,
    random_model,
    random_monotone_map,
    random_relation,
    random_subset,
)
from delmc.powerset import MEET

A = AgentSet(("a",))
AB = AgentSet(("a", "b"))


def chain_frame():
    w = FiniteSet("w", ("w1", "w2", "w3"))
    return KripkeFrame.make(
        w,
        AB,
        {
            "a": rel(w, w, [("w1", "w2"), ("w2", "w1"), ("w1", "w1"), ("w2", "w2"), ("w3", "w3")]),
            "b": rel(w, w, [("w2", "w3"), ("w3", "w2"), ("w1", "w1"), ("w2", "w2"), ("w3", "w3")]),
        },
    )


def test_frame_rejects_foreign_relation_carrier():
    w = FiniteSet("w", ("w1",))
    v = FiniteSet("v", ("v1",))
    with pytest.raises(Exception):
        KripkeFrame.make(w, A, {"a": identity(v)})


def test_identity_map_is_bounded():
    f = chain_frame()
    m = identity_map(f)
    assert is_monotone(m) and is_bounded(m)


def test_initial_lift_empty_family_is_total():
    w = FiniteSet("w", ("w1", "w2"))
    f = initial_lift([], [], carrier=w, agents=A)
    assert f.rel("a") == total(w, w)


def test_initial_lift_computes_componentwise_preimage():
    f = chain_frame()
    z = FiniteSet("z", ("z1", "z2"))
    gfn = function_from_mapping(z, f.carrier, {"z1": "w1", "z2": "w3"})
    lifted = initial_lift([f], [gfn])
    for ag in AB:
        expected = frozenset(
            (x, y)
            for x in z
            for y in z
            if (apply_function(gfn, x), apply_function(gfn, y)) in f.rel(ag).pairs
        )
        assert lifted.rel(ag).pairs == expected
    assert is_monotone(FrameMap(lifted, f, gfn))


def test_initial_lift_universal_property_on_example():
    # maps into the lift are monotone exactly when all composites are
    f = chain_frame()
    z = FiniteSet("z", ("z1", "z2"))
    gfn = function_from_mapping(z, f.carrier, {"z1": "w1", "z2": "w2"})
    lifted = initial_lift([f], [gfn])
    rng = random.Random(7)
    for _ in range(50):
        zr = random_relation(rng, z, z)
        zframe = KripkeFrame.make(z, AB, {a: zr for a in AB})
        into_lift = is_monotone(FrameMap(zframe, lifted, identity(z)))
        composite = is_monotone(FrameMap(zframe, f, gfn))
        assert into_lift == composite


def test_largest_preserved_check():
    f = chain_frame()
    z = FiniteSet("z", ("z1", "z2"))
    gfn = function_from_mapping(z, f.carrier, {"z1": "w1", "z2": "w2"})
    lifted = initial_lift([f], [gfn])
    rng = random.Random(3)
    candidates = [random_relation(rng, z, z) for _ in range(20)]
    assert largest_preserved_check(lifted, [f], [gfn], candidates)


def test_product_projections_and_lift():
    f1 = chain_frame()
    w = FiniteSet("v", ("v1", "v2"))
    f2 = KripkeFrame.make(w, AB, {"a": identity(w), "b": total(w, w)})
    prod, p1, p2 = product(f1, f2)
    assert len(prod.carrier) == len(f1.carrier) * len(f2.carrier)
    assert is_monotone(p1) and is_monotone(p2)
    # pairing: any frame with monotone maps to both factors maps monotonely in
    z = FiniteSet("z", ("z1",))
    zf = KripkeFrame.make(z, AB, {a: identity(z) for a in AB})
    g1 = function_from_mapping(z, f1.carrier, {"z1": "w2"})
    g2 = function_from_mapping(z, f2.carrier, {"z1": "v1"})
    paired = function_from_mapping(z, prod.carrier, {"z1": "(w2,v1)"})
    assert compose(paired, p1.fn) == g1
    assert compose(paired, p2.fn) == g2
    assert is_monotone(FrameMap(zf, prod, paired))


def test_product_requires_same_agents():
    f1 = chain_frame()
    w = FiniteSet("v", ("v1",))
    f2 = KripkeFrame.make(w, A, {"a": identity(w)})
    with pytest.raises(AgentMismatch):
        product(f1, f2)


def test_subframe_restricts_relations():
    f = chain_frame()
    sub, incl = subframe(f, Subset(f.carrier, frozenset({"w1", "w2"})))
    assert tuple(sub.carrier) == ("w1", "w2")
    assert is_monotone(incl)
    for ag in AB:
        assert sub.rel(ag).pairs == frozenset(
            (x, y) for (x, y) in f.rel(ag).pairs if x in {"w1", "w2"} and y in {"w1", "w2"}
        )


def test_pullback_square_commutes_and_is_fibered():
    base = chain_frame()
    rng = random.Random(11)
    f = random_monotone_map(rng, 3, base, prefix="y")
    g = random_monotone_map(rng, 2, base, prefix="z")
    apex, p1, p2 = pullback(f, g)
    assert compose(p1.fn, f.fn) == compose(p2.fn, g.fn)
    assert is_monotone(p1) and is_monotone(p2)
    expected = {
        (w, v)
        for w in f.src.carrier
        for v in g.src.carrier
        if apply_function(f.fn, w) == apply_function(g.fn, v)
    }
    assert len(apex.carrier) == len(expected)


def test_pullback_requires_monotone_legs():
    base = chain_frame()
    y = FiniteSet("y", ("y1", "y2"))
    # force a non-monotone map: y1 -> y2 upstairs but w1 not related to w3
    yf = KripkeFrame.make(y, AB, {a: total(y, y) for a in AB})
    bad = frame_map(yf, base, {"y1": "w1", "y2": "w3"})
    good = frame_map(yf, base, {"y1": "w1", "y2": "w1"})
    assert not is_monotone(bad)
    with pytest.raises(NotMonotone):
        pullback(bad, good)


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_pullback_of_bounded_along_monotone_is_bounded(seed):
    rng = random.Random(seed)
    base = random_frame(rng, FiniteSet("b", ("b1", "b2", "b3")), AB)
    f = random_monotone_map(rng, rng.randrange(1, 4), base, prefix="y")
    g = random_bounded_map(rng, rng.randrange(1, 4), base, prefix="z")
    assert is_bounded(g)
    assert check_pullback_preserves_bounded(f, g)


def test_bounded_iff_box_square_commutes():
    rng = random.Random(5)
    base = chain_frame()
    bounded_map = random_bounded_map(rng, 3, base, prefix="y")
    merely_monotone = None
    for _ in range(200):
        cand = random_monotone_map(rng, 3, base, prefix="z")
        if not is_bounded(cand):
            merely_monotone = cand
            break
    assert merely_monotone is not None
    for m, expect in ((bounded_map, True), (merely_monotone, False)):
        pre = preimage_map(m.fn, MEET)
        agrees = all(
            compose_maps(forall_map(dagger(m.dst.rel(ag))), pre)
            == compose_maps(pre, forall_map(dagger(m.src.rel(ag))))
            for ag in m.src.agents
        )
        assert agrees == expect


def test_is_bisimulation_unit_cases():
    f = chain_frame()
    assert is_bisimulation(f, f, identity(f.carrier))
    assert is_bisimulation(f, f, rel(f.carrier, f.carrier, []))
    # w1 has an a-step to w2; w3's only a-step is the loop, so pairing
    # w1 with w3 breaks the forth condition
    bad = rel(f.carrier, f.carrier, [("w1", "w3")])
    assert not is_bisimulation(f, f, bad)


def test_graph_of_bounded_map_is_bisimulation():
    rng = random.Random(9)
    base = chain_frame()
    g = random_bounded_map(rng, 4, base, prefix="y")
    assert is_bisimulation(g.src, base, g.fn)


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_bisimulation_invariance(seed):
    # pull a model back along a bounded map; static truth transfers pointwise
    rng = random.Random(seed)
    target = random_model(rng, rng.randrange(1, 4), AB)
    g = random_bounded_map(rng, rng.randrange(1, 4), target.frame, prefix="y")
    pre = preimage_map(g.fn, MEET)
    pulled = KripkeModel.make(
        g.src, {p: apply(pre, target.val(p)) for p in target.atoms}
    )
    assert is_bisimulation(g.src, target.frame, g.fn)
    for _ in range(6):
        phi = random_formula(rng, ("p", "q"), tuple(AB), depth=3, allow_pal=False, allow_dynamic=False)
        src_ext = extension(pulled, phi)
        dst_ext = extension(target, phi)
        for w in g.src.carrier:
            assert (w in src_ext.members) == (apply_function(g.fn, w) in dst_ext.members)


def test_common_knowledge_chain():
    f = chain_frame()
    ck = common_knowledge_relation(f, ("a", "b"))
    assert is_reflexive(ck) and is_transitive(ck)
    assert ("w1", "w3") in ck.pairs  # reachable via a then b
    only_a = common_knowledge_relation(f, ("a",))
    assert ("w1", "w3") not in only_a.pairs
    with pytest.raises(EmptyGroup):
        common_knowledge_relation(f, ())
    with pytest.raises(UnknownAgent):
        common_knowledge_relation(f, ("zz",))
