"""First-order semantics on sheaves: interpretation, powers, pullback update."""

import random

import pytest
from hypothesis import given
import hypothesis.strategies as st

import fo_oracle
from delmc import (
    AgentSet,
    Atom,
    Box,
    DelBox,
    Dia,
    EventModel,
    Exists,
    FiniteSet,
    Forall,
    FormulaInContext,
    Fun,
    InvariantViolation,
    KripkeFrame,
    KripkeModel,
    KripkeSheaf,
    Pred,
    Subset,
    TermInContext,
    UnresolvedEventModel,
    Var,
    check_substitution_box_commutation,
    check_substitution_functoriality,
    check_transition_commutation,
    extension,
    fibered_power,
    frame_map,
    identity,
    interp_formula,
    interp_term,
    is_kripke_sheaf,
    pullback_update,
    rel,
    verify_quantifier_reduction,
)
from delmc.generators import (
    plant_non_sheaf,
    random_carrier,
    random_fo_event_model,
    random_fo_formula,
    random_frame,
    random_sheaf,
    random_sheaf_model,
)

A = AgentSet(("a",))


def tuple_form(power, ext):
    return {(power.world_of(lbl), power.tuple_of(lbl)) for lbl in ext.members}


def pair(w, e):
    return f"({w},{e})"


def random_small_model(rng, max_fiber=2):
    base = random_frame(rng, random_carrier(rng, rng.randrange(1, 4), prefix="w"), A)
    return random_sheaf_model(rng, random_sheaf(rng, base, max_fiber=max_fiber))


def test_interp_on_fixture(two_fibers):
    model = two_fibers
    x = Var("x")
    p_of_x = FormulaInContext(("x",), Pred("P", (x,)))
    power = model.power(1)
    assert tuple_form(power, interp_formula(model, p_of_x)) == {("w1", ("d1",))}
    p_of_fx = FormulaInContext(("x",), Pred("P", (Fun("f", (x,)),)))
    assert tuple_form(power, interp_formula(model, p_of_fx)) == set()
    some_p = FormulaInContext((), Exists("u", Pred("P", (Var("u"),))))
    base_power = model.power(0)
    assert tuple_form(base_power, interp_formula(model, some_p)) == {("w1", ())}
    # box over the base frame: w1 only reaches w2 where P is empty
    box_some = FormulaInContext((), Box("a", Exists("u", Pred("P", (Var("u"),)))))
    assert tuple_form(base_power, interp_formula(model, box_some)) == set()


def test_interp_term_on_fixture(two_fibers):
    model = two_fibers
    tic = TermInContext(("x",), Fun("f", (Var("x"),)))
    fm = interp_term(model, tic)
    assert fm("d1") == "d2"
    assert fm("d2") == "d2"
    assert fm("d3") == "d3"


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_interp_matches_oracle(seed):
    rng = random.Random(seed)
    model = random_small_model(rng)
    o = fo_oracle.from_sheaf_model(model)
    for n_ctx in (0, 1, 2):
        context = tuple(f"x{i}" for i in range(n_ctx))
        phi = random_fo_formula(rng, model, context, depth=2)
        got = tuple_form(model.power(n_ctx), interp_formula(model, FormulaInContext(context, phi)))
        assert got == fo_oracle.tuple_extension(o, context, phi)


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_interp_matches_oracle_dynamic(seed):
    rng = random.Random(seed)
    model = random_small_model(rng)
    ev = random_fo_event_model(rng, model, rng.randrange(1, 3))
    refs = [("E", e) for e in ev.events]
    registry = {"E": ev}
    oreg = {"E": fo_oracle.from_event_model(ev)}
    o = fo_oracle.from_sheaf_model(model)
    context = ("x",)
    phi = random_fo_formula(rng, model, context, depth=2, event_refs=refs)
    got = tuple_form(
        model.power(1), interp_formula(model, FormulaInContext(context, phi), registry)
    )
    assert got == fo_oracle.tuple_extension(o, context, phi, oreg)


def test_closed_formulas_match_propositional_semantics(two_fibers):
    # in an empty context, an arity-0 predicate behaves exactly like an atom
    # over the base frame
    model = two_fibers
    base = model.sheaf.base
    kmodel = KripkeModel.make(base, {"q": model.rel_interp_map["Q"]})
    shapes = [
        lambda q: q,
        lambda q: Box("a", q),
        lambda q: Dia("a", q),
        lambda q: Box("a", Dia("a", q)),
    ]
    for shape in shapes:
        fo_ext = interp_formula(model, FormulaInContext((), shape(Pred("Q", ()))))
        prop_ext = extension(kmodel, shape(Atom("q")))
        assert fo_ext.members == prop_ext.members


def test_pullback_update_matches_oracle(two_fibers, fo_event):
    model = two_fibers
    ev = fo_event
    upd = pullback_update(model, ev)
    o2 = fo_oracle.update(
        fo_oracle.from_sheaf_model(model), fo_oracle.from_event_model(ev), {}
    )
    new_sheaf = upd.updated.sheaf
    assert set(new_sheaf.base.carrier) == {pair(w, e) for (w, e) in o2["base_worlds"]}
    assert set(new_sheaf.total.carrier) == {pair(a, e) for (a, e) in o2["individuals"]}
    for ag in new_sheaf.base.agents:
        assert new_sheaf.base.rel(ag).pairs == {
            (pair(*x), pair(*y)) for (x, y) in o2["base_rel"][ag]
        }
        assert new_sheaf.total.rel(ag).pairs == {
            (pair(*x), pair(*y)) for (x, y) in o2["dom_rel"][ag]
        }
    for (a, e) in o2["individuals"]:
        assert new_sheaf.proj(pair(a, e)) == pair(*o2["pi"][(a, e)])


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_update_interp_matches_oracle(seed):
    rng = random.Random(seed)
    model = random_small_model(rng)
    ev = random_fo_event_model(rng, model, rng.randrange(1, 3))
    upd = pullback_update(model, ev)
    o2 = fo_oracle.update(
        fo_oracle.from_sheaf_model(model), fo_oracle.from_event_model(ev), {}
    )
    context = ("x",)
    phi = random_fo_formula(rng, upd.updated, context, depth=1)
    power = upd.updated.power(1)
    got = tuple_form(power, interp_formula(upd.updated, FormulaInContext(context, phi)))
    want = {
        (pair(*w), tuple(pair(*a) for a in combo))
        for (w, combo) in fo_oracle.tuple_extension(o2, context, phi)
    }
    assert got == want


def test_update_yields_sheaf_and_transitions(two_fibers, fo_event):
    upd = pullback_update(two_fibers, fo_event)
    new_sheaf = upd.updated.sheaf  # construction validates the sheaf conditions
    chk = is_kripke_sheaf(new_sheaf.total, new_sheaf.base, new_sheaf.proj)
    assert chk.is_sheaf and chk.characterization_agrees
    for e in fo_event.events:
        for n in (0, 1, 2):
            t = upd.transition(n, e)
            for (old, new) in t.pairs:
                got_old, got_e = upd.decompose_power_label(n, new)
                assert got_old == old and got_e == e


def test_fibered_power_round_trips(two_fibers):
    sheaf = two_fibers.sheaf
    for n in (0, 1, 2, 3):
        power = fibered_power(sheaf, n)
        for lbl in power.carrier:
            tup = power.tuple_of(lbl)
            w = power.world_of(lbl)
            assert len(tup) == n
            assert all(sheaf.proj(a) == w for a in tup)
            assert power.label_for(w, tup) == lbl
        # every in-fiber tuple is present
        count = sum(len(sheaf.fiber(w)) ** n for w in sheaf.base.carrier)
        assert len(power.carrier) == count


def test_power_zero_and_one_are_base_and_total(two_fibers):
    sheaf = two_fibers.sheaf
    assert fibered_power(sheaf, 0).frame == sheaf.base
    assert fibered_power(sheaf, 1).frame == sheaf.total


def test_kripke_sheaf_constructor_validates():
    w = FiniteSet("w", ("w1", "w2"))
    base = KripkeFrame.make(w, A, {"a": rel(w, w, [("w1", "w2"), ("w2", "w2")])})
    d = FiniteSet("d", ("d1", "d2"))
    # d1 sits over w1 but has no step into w2's fiber: boundedness fails
    total = KripkeFrame.make(d, A, {"a": rel(d, d, [("d2", "d2")])})
    proj = frame_map(total, base, {"d1": "w1", "d2": "w2"})
    with pytest.raises(InvariantViolation):
        KripkeSheaf(total, base, proj)


@pytest.mark.parametrize("mode", ["extra-successor", "missing-successor", "empty-fiber"])
def test_planted_defects_are_detected(mode):
    rng = random.Random(0)
    flags = {
        "extra-successor": "unique_lift",
        "missing-successor": "bounded",
        "empty-fiber": "surjective",
    }
    found = 0
    for _ in range(40):
        base = random_frame(rng, random_carrier(rng, rng.randrange(1, 4), prefix="w"), A)
        sheaf = random_sheaf(rng, base, max_fiber=3)
        try:
            total, b, proj = plant_non_sheaf(rng, sheaf, mode)
        except InvariantViolation:
            continue  # this sheaf had no room for the requested defect
        chk = is_kripke_sheaf(total, b, proj)
        assert not chk.is_sheaf
        assert not getattr(chk, flags[mode])
        assert chk.characterization_agrees
        found += 1
    assert found >= 5


def test_quantifier_shadowing_rejected(two_fibers):
    phi = FormulaInContext(("x",), Exists("x", Pred("P", (Var("x"),))))
    with pytest.raises(InvariantViolation):
        interp_formula(two_fibers, phi)


def test_unresolved_event_model(two_fibers):
    phi = FormulaInContext((), DelBox("nope", "e1", Pred("Q", ())))
    with pytest.raises(UnresolvedEventModel):
        interp_formula(two_fibers, phi)


def test_cyclic_preconditions_rejected(two_fibers):
    e = FiniteSet("e", ("e1",))
    frame = KripkeFrame.make(e, A, {"a": rel(e, e, [("e1", "e1")])})
    ev = EventModel.make(frame, {"e1": DelBox("LOOP", "e1", Pred("Q", ()))})
    phi = FormulaInContext((), DelBox("LOOP", "e1", Pred("Q", ())))
    with pytest.raises(InvariantViolation):
        interp_formula(two_fibers, phi, {"LOOP": ev})


def test_verify_quantifier_reduction_on_fixture(two_fibers, fo_event):
    phi = FormulaInContext(("x",), Pred("P", (Var("x"),)))
    rep = verify_quantifier_reduction(
        two_fibers, fo_event, "e1", phi, registry={"E": fo_event}, ref="E"
    )
    assert rep.ok, rep.failures()


def test_substitution_functoriality_smoke(two_fibers):
    phi = FormulaInContext(("x",), Pred("P", (Fun("f", (Var("x"),)),)))
    terms = [TermInContext(("z1", "z2"), Fun("f", (Var("z2"),)))]
    rep = check_substitution_functoriality(two_fibers, phi, terms)
    assert rep.ok, rep.failures()


def test_substitution_box_commutation_smoke(two_fibers, fo_event):
    phi = FormulaInContext(("x",), Pred("P", (Var("x"),)))
    terms = [TermInContext(("z1",), Fun("f", (Var("z1"),)))]
    rep = check_substitution_box_commutation(
        two_fibers, phi, terms, ev=fo_event, event="e1"
    )
    assert rep.ok, rep.failures()


def test_transition_commutation_smoke(two_fibers, fo_event):
    upd = pullback_update(two_fibers, fo_event)
    power1 = two_fibers.power(1)
    rep = check_transition_commutation(upd, power1.proj_to_base, 1, 0)
    assert rep.ok, rep.failures()
    rep2 = check_transition_commutation(upd, two_fibers.fn_interp_map["f"], 1, 1)
    assert rep2.ok, rep2.failures()
