"""Randomized law suites over batches of generated finite structures.

Each suite draws structures from a seeded generator, runs the library's
own verification entry points on them, and records every violated law as
a (case label, witness) pair.  A suite passes when no case fails.  The
self test plants a deliberately wrong inequality in place of the
modularity law and passes only when the random search refutes it, so a
vacuous harness cannot pass silently.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import InvariantViolation, NotAPullback, NotReducible
from .formulas import (
    FormulaInContext,
    Fun,
    TermInContext,
    Var,
)
from .frames import (
    FrameMap,
    KripkeFrame,
    check_pullback_preserves_bounded,
    common_knowledge_relation,
    initial_lift,
    is_bisimulation,
    is_bounded,
    is_monotone,
    largest_preserved_check,
    product,
    subframe,
)
from .generators import (
    plant_non_sheaf,
    random_agents,
    random_bounded_map,
    random_carrier,
    random_event_model,
    random_fo_event_model,
    random_fo_formula,
    random_fo_term,
    random_formula,
    random_frame,
    random_function,
    random_model,
    random_monotone_map,
    random_relation,
    random_sheaf,
    random_sheaf_model,
    random_subset,
    random_surjection,
)
from .models import (
    no_learning_check,
    static_precondition_modalities,
    verify_del_reductions,
    verify_pal_reductions,
)
from .powerset import (
    beck_chevalley_equation,
    check_adjunction,
    check_beck_chevalley,
    check_biduality_laws,
    compose_maps,
    exists_map,
    forall_map,
    map_leq,
    maps_equal,
    relation_from_join_map,
    relation_from_meet_map,
    verify_preserves_all_joins,
    verify_preserves_all_meets,
)
from .reduction import is_static, reduce_formula
from .rel import (
    FiniteSet,
    Rel,
    check_modularity,
    closure_reflexive_transitive,
    compose,
    dagger,
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
    pair_label,
    tabulate,
)
from .sheaves import (
    check_substitution_box_commutation,
    check_substitution_functoriality,
    check_transition_commutation,
    is_kripke_sheaf,
    pullback_update,
    verify_quantifier_reduction,
)


@dataclass(frozen=True)
class Report:
    """Outcome of one suite: case count, failures, and wall time."""

    suite: str
    cases: int
    failures: Tuple[Tuple[str, str], ...]
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "ok" if self.ok else f"{len(self.failures)} failure(s)"
        return f"{self.suite}: {self.cases} cases in {self.seconds:.2f}s: {verdict}"


class _Collector:
    """Shared bookkeeping for one suite run."""

    def __init__(self, suite: str):
        self.suite = suite
        self.failures: List[Tuple[str, str]] = []
        self.started = time.perf_counter()

    def expect(self, case: str, ok: bool, witness: str) -> None:
        if not ok:
            self.failures.append((case, witness))

    def report(self, cases: int) -> Report:
        return Report(
            self.suite, cases, tuple(self.failures), time.perf_counter() - self.started
        )


def _describe_rel(r: Rel) -> str:
    return f"{r.dom.name}->{r.cod.name}:{sorted(r.pairs)}"


# ---------------------------------------------------------------------------
# Relation algebra


def _all_relations(a: FiniteSet, b: FiniteSet) -> List[Rel]:
    """Every relation between two carriers, in a fixed enumeration order."""
    cells = [(x, y) for x in a.elements for y in b.elements]
    return [
        Rel(a, b, frozenset(c for i, c in enumerate(cells) if bits >> i & 1))
        for bits in range(1 << len(cells))
    ]


def _exhaustive_small_rel_sweep(col: _Collector) -> int:
    """Every law on every relation pair and triple over carriers of size <= 2.

    Returns the number of law instances checked; failures go to the
    collector under case labels starting with "exhaustive".
    """
    smalls = (
        FiniteSet("v0", ()),
        FiniteSet("v1", ("v1x",)),
        FiniteSet("v2", ("v2x", "v2y")),
    )
    rels: Dict[Tuple[str, str], List[Rel]] = {
        (a.name, b.name): _all_relations(a, b) for a in smalls for b in smalls
    }
    checked = 0
    for a in smalls:
        ia = identity(a)
        checked += 1
        if dagger(ia) != ia:
            col.expect("exhaustive dagger fixes identities", False, a.name)
        for b in smalls:
            ib = identity(b)
            for r in rels[(a.name, b.name)]:
                checked += 2
                if compose(ia, r) != r or compose(r, ib) != r:
                    col.expect("exhaustive units", False, _describe_rel(r))
                if dagger(dagger(r)) != r:
                    col.expect("exhaustive dagger involution", False, _describe_rel(r))
    for a in smalls:
        for b in smalls:
            ab = rels[(a.name, b.name)]
            for c in smalls:
                bc = rels[(b.name, c.name)]
                ca = rels[(c.name, a.name)]
                ac = rels[(a.name, c.name)]
                for r1 in ab:
                    for r2 in bc:
                        checked += 1
                        if dagger(compose(r1, r2)) != compose(dagger(r2), dagger(r1)):
                            col.expect(
                                "exhaustive dagger contravariance",
                                False,
                                f"r1={_describe_rel(r1)} r2={_describe_rel(r2)}",
                            )
                        for r3 in ac:
                            checked += 1
                            if not check_modularity(r1, r2, r3):
                                col.expect(
                                    "exhaustive modularity",
                                    False,
                                    f"r1={_describe_rel(r1)} r2={_describe_rel(r2)}"
                                    f" r3={_describe_rel(r3)}",
                                )
                for r in ab:
                    for s in ab:
                        if not leq(r, s):
                            continue
                        for t in bc:
                            checked += 1
                            if not leq(compose(r, t), compose(s, t)):
                                col.expect(
                                    "exhaustive right whiskering",
                                    False,
                                    f"r={_describe_rel(r)} s={_describe_rel(s)}"
                                    f" t={_describe_rel(t)}",
                                )
                        for u in ca:
                            checked += 1
                            if not leq(compose(u, r), compose(u, s)):
                                col.expect(
                                    "exhaustive left whiskering",
                                    False,
                                    f"r={_describe_rel(r)} s={_describe_rel(s)}"
                                    f" u={_describe_rel(u)}",
                                )
    for a in smalls:
        for b in smalls:
            ab = rels[(a.name, b.name)]
            for c in smalls:
                bc = rels[(b.name, c.name)]
                for d in smalls:
                    cd = rels[(c.name, d.name)]
                    for r1 in ab:
                        for r2 in bc:
                            left = compose(r1, r2)
                            for r3 in cd:
                                checked += 1
                                if compose(left, r3) != compose(r1, compose(r2, r3)):
                                    col.expect(
                                        "exhaustive associativity",
                                        False,
                                        f"r1={_describe_rel(r1)} r2={_describe_rel(r2)}"
                                        f" r3={_describe_rel(r3)}",
                                    )
    return checked


def run_rel_laws(seed: int = 0, cases: int = 1000, max_size: int = 5) -> Report:
    """Category laws, dagger laws, whiskering, modularity, function
    predicates, tabulation; exhaustively on carriers of size up to two,
    then on random relations at the given sizes."""
    rng = random.Random(seed)
    col = _Collector("rel-laws")
    swept = _exhaustive_small_rel_sweep(col)
    for i in range(cases):
        tag = f"case {i}"
        a = random_carrier(rng, rng.randrange(1, max_size + 1), "a")
        b = random_carrier(rng, rng.randrange(1, max_size + 1), "b")
        c = random_carrier(rng, rng.randrange(1, max_size + 1), "c")
        d = random_carrier(rng, rng.randrange(1, max_size + 1), "d")
        r1 = random_relation(rng, a, b)
        r2 = random_relation(rng, b, c)
        r3 = random_relation(rng, a, c)
        s = random_relation(rng, c, d)

        col.expect(
            f"{tag}: associativity",
            compose(compose(r1, r2), s) == compose(r1, compose(r2, s)),
            f"r1={_describe_rel(r1)} r2={_describe_rel(r2)} s={_describe_rel(s)}",
        )
        col.expect(
            f"{tag}: left unit",
            compose(identity(a), r1) == r1,
            _describe_rel(r1),
        )
        col.expect(
            f"{tag}: right unit",
            compose(r1, identity(b)) == r1,
            _describe_rel(r1),
        )
        col.expect(
            f"{tag}: dagger involution",
            dagger(dagger(r1)) == r1,
            _describe_rel(r1),
        )
        col.expect(
            f"{tag}: dagger contravariance",
            dagger(compose(r1, r2)) == compose(dagger(r2), dagger(r1)),
            f"r1={_describe_rel(r1)} r2={_describe_rel(r2)}",
        )
        col.expect(
            f"{tag}: dagger fixes identities",
            dagger(identity(a)) == identity(a),
            a.name,
        )
        bigger = join(r1, random_relation(rng, a, b))
        col.expect(
            f"{tag}: dagger is monotone",
            leq(dagger(r1), dagger(bigger)),
            f"r1={_describe_rel(r1)} bigger={_describe_rel(bigger)}",
        )
        col.expect(
            f"{tag}: meet below",
            leq(meet(r1, bigger), r1) and leq(r1, join(r1, bigger)),
            f"r1={_describe_rel(r1)} other={_describe_rel(bigger)}",
        )
        col.expect(
            f"{tag}: modularity",
            check_modularity(r1, r2, r3),
            f"r1={_describe_rel(r1)} r2={_describe_rel(r2)} r3={_describe_rel(r3)}",
        )
        smaller = meet(r1, random_relation(rng, a, b))
        col.expect(
            f"{tag}: right whiskering",
            leq(compose(smaller, r2), compose(r1, r2)),
            f"smaller={_describe_rel(smaller)} r1={_describe_rel(r1)} r2={_describe_rel(r2)}",
        )
        left_leg = random_relation(rng, d, a)
        col.expect(
            f"{tag}: left whiskering",
            leq(compose(left_leg, smaller), compose(left_leg, r1)),
            f"left={_describe_rel(left_leg)} smaller={_describe_rel(smaller)} r1={_describe_rel(r1)}",
        )

        f = random_function(rng, a, b)
        col.expect(f"{tag}: generated map is a function", is_function(f), _describe_rel(f))
        big = a if len(a.elements) >= len(b.elements) else random_carrier(rng, len(b.elements), "a")
        surj = random_surjection(rng, big, b)
        col.expect(f"{tag}: generated surjection is surjective", is_surjective(surj), _describe_rel(surj))
        targets = list(b.elements)
        rng.shuffle(targets)
        inj_size = rng.randrange(1, len(b.elements) + 1)
        inj_dom = random_carrier(rng, inj_size, "i")
        inj = Rel(inj_dom, b, frozenset(zip(inj_dom.elements, targets)))
        col.expect(f"{tag}: distinct-valued map is injective", is_injective(inj), _describe_rel(inj))
        if len(a.elements) >= 2 and len(b.elements) >= 1:
            tgt = b.elements[0]
            collapse = Rel(a, b, frozenset((w, tgt) for w in a.elements))
            col.expect(
                f"{tag}: collapsing map is not injective",
                not is_injective(collapse),
                _describe_rel(collapse),
            )

        tab = tabulate(r1)
        col.expect(
            f"{tag}: tabulation recomposes",
            tab.recompose() == r1,
            f"r1={_describe_rel(r1)} apex={tab.apex.name}",
        )
        col.expect(
            f"{tag}: tabulation legs are functions",
            is_function(tab.r1) and is_function(tab.r2),
            tab.apex.name,
        )
        col.expect(
            f"{tag}: tabulation legs jointly monic",
            is_jointly_monic(tab.r1, tab.r2),
            tab.apex.name,
        )
    return col.report(cases + swept)


# ---------------------------------------------------------------------------
# Relation / powerset-map duality


def run_duality(seed: int = 0, cases: int = 1000, max_size: int = 4) -> Report:
    """Round trips, adjunctions, join/meet preservation, functoriality, order."""
    rng = random.Random(seed)
    col = _Collector("duality")
    for i in range(cases):
        tag = f"case {i}"
        a = random_carrier(rng, rng.randrange(1, max_size + 1), "a")
        b = random_carrier(rng, rng.randrange(1, max_size + 1), "b")
        c = random_carrier(rng, rng.randrange(1, max_size + 1), "c")
        r = random_relation(rng, a, b)
        r2 = random_relation(rng, b, c)

        em = exists_map(r)
        fm = forall_map(r)
        col.expect(
            f"{tag}: join-map round trip",
            relation_from_join_map(em) == r,
            _describe_rel(r),
        )
        col.expect(
            f"{tag}: meet-map round trip",
            relation_from_meet_map(fm) == r,
            _describe_rel(r),
        )
        col.expect(
            f"{tag}: join extension preserves joins",
            verify_preserves_all_joins(em),
            _describe_rel(r),
        )
        col.expect(
            f"{tag}: meet extension preserves meets",
            verify_preserves_all_meets(fm),
            _describe_rel(r),
        )
        col.expect(
            f"{tag}: direct image adjoint to universal image",
            check_adjunction(r),
            _describe_rel(r),
        )
        bid = check_biduality_laws(r, r2)
        col.expect(
            f"{tag}: biduality laws",
            bid.ok,
            f"failed={bid.failed()} r={_describe_rel(r)} r2={_describe_rel(r2)}",
        )
        col.expect(
            f"{tag}: join functoriality",
            maps_equal(exists_map(compose(r, r2)), compose_maps(em, exists_map(r2))),
            f"r={_describe_rel(r)} r2={_describe_rel(r2)}",
        )
        col.expect(
            f"{tag}: meet functoriality",
            maps_equal(forall_map(compose(r, r2)), compose_maps(fm, forall_map(r2))),
            f"r={_describe_rel(r)} r2={_describe_rel(r2)}",
        )
        bigger = join(r, random_relation(rng, a, b))
        col.expect(
            f"{tag}: order preserved covariantly",
            map_leq(em, exists_map(bigger)),
            f"r={_describe_rel(r)} bigger={_describe_rel(bigger)}",
        )
        col.expect(
            f"{tag}: order reflected contravariantly",
            map_leq(forall_map(bigger), fm),
            f"r={_describe_rel(r)} bigger={_describe_rel(bigger)}",
        )
        if bigger != r:
            col.expect(
                f"{tag}: strict order not inverted covariantly",
                not map_leq(exists_map(bigger), em),
                f"r={_describe_rel(r)} bigger={_describe_rel(bigger)}",
            )
            col.expect(
                f"{tag}: strict order not inverted contravariantly",
                not map_leq(fm, forall_map(bigger)),
                f"r={_describe_rel(r)} bigger={_describe_rel(bigger)}",
            )
        other = random_relation(rng, a, b)
        col.expect(
            f"{tag}: covariant order is a biconditional",
            leq(r, other) == map_leq(em, exists_map(other)),
            f"r={_describe_rel(r)} other={_describe_rel(other)}",
        )
        col.expect(
            f"{tag}: contravariant order is a biconditional",
            leq(r, other) == map_leq(forall_map(other), fm),
            f"r={_describe_rel(r)} other={_describe_rel(other)}",
        )
    return col.report(cases)


# ---------------------------------------------------------------------------
# Image squares over pullbacks


def run_beck_chevalley(seed: int = 0, cases: int = 500, max_size: int = 4) -> Report:
    """Canonical pullback squares satisfy the image law; fakes are rejected
    and enough of them are caught actually breaking the equation."""
    rng = random.Random(seed)
    col = _Collector("beck-chevalley")
    broken = 0
    for i in range(cases):
        tag = f"case {i}"
        x = random_carrier(rng, rng.randrange(1, max(2, max_size - 1)), "x")
        y = random_carrier(rng, rng.randrange(1, max_size + 1), "y")
        z = random_carrier(rng, rng.randrange(1, max_size + 1), "z")
        f = random_function(rng, y, x)
        g = random_function(rng, z, x)
        pairs = [
            (w, v)
            for w in y.elements
            for v in z.elements
            if f.successors[w] == g.successors[v]
        ]
        apex = FiniteSet(
            f"({y.name}x[{x.name}]{z.name})", tuple(pair_label(w, v) for w, v in pairs)
        )
        p = Rel(apex, y, frozenset((pair_label(w, v), w) for w, v in pairs))
        q = Rel(apex, z, frozenset((pair_label(w, v), v) for w, v in pairs))
        try:
            ok = check_beck_chevalley(p, q, f, g)
        except Exception as exc:  # a raise on the honest square is itself a failure
            col.expect(f"{tag}: image law over pullback", False, f"raised {exc!r}")
        else:
            col.expect(
                f"{tag}: image law over pullback",
                ok,
                f"f={_describe_rel(f)} g={_describe_rel(g)}",
            )

        if pairs:
            dropped = pairs[rng.randrange(len(pairs))]
            kept = [pv for pv in pairs if pv != dropped]
            apex2 = FiniteSet(
                f"({apex.name}-1)", tuple(pair_label(w, v) for w, v in kept)
            )
            p2 = Rel(apex2, y, frozenset((pair_label(w, v), w) for w, v in kept))
            q2 = Rel(apex2, z, frozenset((pair_label(w, v), v) for w, v in kept))
            try:
                check_beck_chevalley(p2, q2, f, g)
                col.expect(
                    f"{tag}: strict sub-square rejected",
                    False,
                    f"dropped {dropped}, no NotAPullback raised",
                )
            except NotAPullback:
                pass
            commutes = compose(p2, f) == compose(q2, g)
            if commutes and not beck_chevalley_equation(p2, q2, f, g):
                broken += 1

            w0, v0 = pairs[0]
            apex3 = FiniteSet(f"({apex.name}+dup)", apex.elements + ("dup",))
            p3 = Rel(apex3, y, p.pairs | {("dup", w0)})
            q3 = Rel(apex3, z, q.pairs | {("dup", v0)})
            try:
                check_beck_chevalley(p3, q3, f, g)
                col.expect(
                    f"{tag}: non-monic pairing rejected",
                    False,
                    f"duplicated {(w0, v0)}, no NotAPullback raised",
                )
            except NotAPullback:
                pass
    col.expect(
        "at least 5 commuting non-pullback squares break the image law",
        broken >= 5,
        f"found {broken}",
    )
    return col.report(cases)


# ---------------------------------------------------------------------------
# Frame constructions


def _candidate_rels(rng: random.Random, frame_rel: Rel, extra: int = 3) -> List[Rel]:
    """The lifted relation itself plus random neighbours on its carrier."""
    carrier = frame_rel.dom
    out = [frame_rel]
    for _ in range(extra):
        noise = random_relation(rng, carrier, carrier)
        pick = rng.randrange(3)
        if pick == 0:
            out.append(noise)
        elif pick == 1:
            out.append(meet(frame_rel, noise))
        else:
            out.append(join(frame_rel, noise))
    return out


def _lift_biconditional(
    zframe: KripkeFrame,
    gfn: Rel,
    lift: KripkeFrame,
    targets: Sequence[KripkeFrame],
    fns: Sequence[Rel],
) -> bool:
    """A map lands monotonically in the lift exactly when every composite
    with the lifted family is monotone into its target."""
    into_lift = is_monotone(FrameMap(zframe, lift, gfn))
    through = all(
        is_monotone(FrameMap(zframe, t, compose(gfn, fn)))
        for t, fn in zip(targets, fns)
    )
    return into_lift == through


def _exhaustive_lift_property(col: _Collector, rng: random.Random) -> int:
    """The lift biconditional over every candidate map and relation family
    on sources of size up to two, for a couple of generated lift setups."""
    checked = 0
    for n_agents, n_targets in ((1, 1), (2, 2)):
        agents = random_agents(rng, n_agents)
        targets = [
            random_frame(rng, random_carrier(rng, rng.randrange(1, 4), f"t{k}"), agents)
            for k in range(n_targets)
        ]
        dom = random_carrier(rng, 3, "x")
        fns = [random_function(rng, dom, t.carrier) for t in targets]
        lift = initial_lift(targets, fns)
        for z_size in (0, 1, 2):
            z = FiniteSet(f"z{z_size}", tuple(f"z{k}" for k in range(z_size)))
            cells = [(u, v) for u in z.elements for v in z.elements]
            z_rels = [
                Rel(z, z, frozenset(c for j, c in enumerate(cells) if bits >> j & 1))
                for bits in range(1 << len(cells))
            ]
            for images in itertools.product(dom.elements, repeat=z_size):
                gfn = Rel(z, dom, frozenset(zip(z.elements, images)))
                for combo in itertools.product(z_rels, repeat=n_agents):
                    zframe = KripkeFrame.make(z, agents, dict(zip(agents.agents, combo)))
                    checked += 1
                    if not _lift_biconditional(zframe, gfn, lift, targets, fns):
                        col.expect(
                            "exhaustive lift property",
                            False,
                            f"g={_describe_rel(gfn)} z={[sorted(r.pairs) for r in combo]}",
                        )
    return checked


def _close_frame(f: KripkeFrame, mode: str) -> KripkeFrame:
    """The frame with every agent relation closed under one property."""
    rels = {}
    for a in f.agents:
        r = f.rel(a)
        if mode == "reflexive":
            rels[a] = join(r, identity(f.carrier))
        elif mode == "symmetric":
            rels[a] = join(r, dagger(r))
        elif mode == "transitive":
            rels[a] = compose(r, closure_reflexive_transitive(r))
        else:
            raise InvariantViolation(f"unknown closure mode {mode!r}")
    return KripkeFrame.make(f.carrier, f.agents, rels)


_PROPERTY_PREDICATES = {
    "reflexive": is_reflexive,
    "transitive": is_transitive,
    "symmetric": is_symmetric,
}


def run_topological(seed: int = 0, cases: int = 500, max_size: int = 5) -> Report:
    """Initial lifts, products, subframes, pullbacks, bisimulations, closure."""
    rng = random.Random(seed)
    col = _Collector("topological")
    swept = _exhaustive_lift_property(col, rng)
    for i in range(cases):
        tag = f"case {i}"
        agents = random_agents(rng, rng.randrange(1, 3))
        dst = random_frame(rng, random_carrier(rng, rng.randrange(2, max_size), "t"), agents)

        m = random_monotone_map(rng, rng.randrange(2, max_size + 1), dst)
        col.expect(f"{tag}: generated map is monotone", is_monotone(m), m.src.carrier.name)
        bnd = random_bounded_map(rng, rng.randrange(2, max_size + 1), dst)
        col.expect(
            f"{tag}: generated bounded map is bounded",
            is_monotone(bnd) and is_bounded(bnd),
            bnd.src.carrier.name,
        )

        dom = random_carrier(rng, rng.randrange(1, max_size + 1), "u")
        fn = random_function(rng, dom, dst.carrier)
        lift = initial_lift([dst], [fn])
        cands = _candidate_rels(rng, lift.rel(agents.agents[0]))
        col.expect(
            f"{tag}: initial lift is the largest preserved structure",
            largest_preserved_check(lift, [dst], [fn], cands),
            f"fn={_describe_rel(fn)}",
        )
        z = random_carrier(rng, rng.randrange(1, 4), "z")
        zframe = KripkeFrame.make(
            z, agents, {a: random_relation(rng, z, z) for a in agents}
        )
        gfn = random_function(rng, z, lift.carrier)
        col.expect(
            f"{tag}: maps into the lift are monotone exactly componentwise",
            _lift_biconditional(zframe, gfn, lift, [dst], [fn]),
            f"g={_describe_rel(gfn)}",
        )

        other = random_frame(rng, random_carrier(rng, rng.randrange(1, 4), "s"), agents)
        fn2 = random_function(rng, dom, other.carrier)
        for mode, pred in _PROPERTY_PREDICATES.items():
            closed_lift = initial_lift(
                [_close_frame(dst, mode), _close_frame(other, mode)], [fn, fn2]
            )
            col.expect(
                f"{tag}: lift of {mode} targets is {mode}",
                all(pred(closed_lift.rel(a)) for a in closed_lift.agents),
                f"fn={_describe_rel(fn)} fn2={_describe_rel(fn2)}",
            )
        prod, p1, p2 = product(dst, other)
        col.expect(
            f"{tag}: product projections monotone",
            is_monotone(p1) and is_monotone(p2),
            prod.carrier.name,
        )
        col.expect(
            f"{tag}: product carries the largest componentwise structure",
            largest_preserved_check(
                prod,
                [dst, other],
                [p1.fn, p2.fn],
                _candidate_rels(rng, prod.rel(agents.agents[0]), extra=2),
            ),
            prod.carrier.name,
        )

        keep = random_subset(rng, dst.carrier, density=0.7)
        if keep.members:
            sub, incl = subframe(dst, keep)
            col.expect(
                f"{tag}: subframe inclusion monotone and injective",
                is_monotone(incl) and is_injective(incl.fn),
                sub.carrier.name,
            )
            col.expect(
                f"{tag}: subframe carries the restricted structure",
                largest_preserved_check(
                    sub, [dst], [incl.fn], _candidate_rels(rng, sub.rel(agents.agents[0]), extra=2)
                ),
                sub.carrier.name,
            )

        col.expect(
            f"{tag}: pullback of a bounded map along a monotone map is bounded",
            check_pullback_preserves_bounded(m, bnd),
            f"{m.src.carrier.name} vs {bnd.src.carrier.name}",
        )

        col.expect(
            f"{tag}: graph of a bounded map is a bisimulation",
            is_bisimulation(bnd.src, bnd.dst, bnd.fn),
            bnd.src.carrier.name,
        )
        col.expect(
            f"{tag}: identity relation is a bisimulation",
            is_bisimulation(dst, dst, identity(dst.carrier)),
            dst.carrier.name,
        )

        group = list(agents.agents)
        ck = common_knowledge_relation(dst, group)
        union = dst.rel(group[0])
        for ag in group[1:]:
            union = join(union, dst.rel(ag))
        basics = (
            is_reflexive(ck)
            and is_transitive(ck)
            and all(leq(dst.rel(ag), ck) for ag in group)
        )
        col.expect(f"{tag}: shared-knowledge closure properties", basics, dst.carrier.name)
        bigger = closure_reflexive_transitive(join(union, random_relation(rng, dst.carrier, dst.carrier)))
        col.expect(
            f"{tag}: shared-knowledge closure is least",
            leq(ck, bigger),
            f"bigger={_describe_rel(bigger)}",
        )
    return col.report(cases + swept)


# ---------------------------------------------------------------------------
# Announcement reduction laws


def run_pal_reduction(seed: int = 0, cases: int = 500, max_size: int = 4) -> Report:
    """Announcement reduction equivalences plus the precondition-modality check."""
    rng = random.Random(seed)
    col = _Collector("pal-reduction")
    atoms = ("p", "q")
    for i in range(cases):
        tag = f"case {i}"
        agents = random_agents(rng, rng.randrange(1, 3))
        model = random_model(rng, rng.randrange(2, max_size + 1), agents, atoms)
        ag = tuple(agents)
        sigma = random_formula(rng, atoms, ag, rng.randrange(0, 3), allow_dynamic=False)
        phi = random_formula(rng, atoms, ag, rng.randrange(0, 3), allow_dynamic=False)
        psi = random_formula(rng, atoms, ag, rng.randrange(0, 2), allow_dynamic=False)
        rep = verify_pal_reductions(model, sigma, phi, psi)
        for check in rep.failures():
            col.expect(f"{tag}: {check.name}", False, check.witness or "")
        try:
            static_precondition_modalities(model, sigma)
        except InvariantViolation as exc:
            col.expect(f"{tag}: precondition modalities", False, str(exc))
    return col.report(cases)


# ---------------------------------------------------------------------------
# Event-update reduction laws


def run_del_reduction(seed: int = 0, cases: int = 500, max_size: int = 4) -> Report:
    """Event reduction equivalences, rewriting, and the no-learning criterion."""
    rng = random.Random(seed)
    col = _Collector("del-reduction")
    atoms = ("p", "q")
    learning = 0
    for i in range(cases):
        tag = f"case {i}"
        agents = random_agents(rng, rng.randrange(1, 3))
        model = random_model(rng, rng.randrange(2, max_size + 1), agents, atoms)
        ev_model = random_event_model(rng, rng.randrange(1, 4), agents, atoms)
        events = list(ev_model.events)
        event = rng.choice(events)
        ag = tuple(agents)
        refs = [("_update", e) for e in events] if rng.random() < 0.3 else []
        phi = random_formula(rng, atoms, ag, rng.randrange(0, 3), event_refs=refs)
        psi = random_formula(rng, atoms, ag, rng.randrange(0, 2), allow_dynamic=False)
        rep = verify_del_reductions(model, ev_model, event, phi, psi)
        for check in rep.failures():
            col.expect(f"{tag}: {check.name}", False, check.witness or "")

        nl = no_learning_check(model, ev_model, depth=2)
        col.expect(
            f"{tag}: event box of a bounded update never teaches",
            (not nl.bounded) or nl.holds,
            nl.witness or "",
        )
        if not nl.bounded and not nl.holds:
            learning += 1

        dyn = random_formula(
            rng, atoms, ag, rng.randrange(1, 3), event_refs=[("_update", e) for e in events]
        )
        try:
            res = reduce_formula(dyn, model=model, registry={"_update": ev_model})
        except (NotReducible, InvariantViolation) as exc:
            col.expect(f"{tag}: rewriting stays extension-true", False, str(exc))
        else:
            col.expect(
                f"{tag}: rewriting reaches a static formula",
                is_static(res.result),
                f"steps={res.step_count}",
            )
    col.expect(
        "at least 10 unbounded updates exhibit a learning witness",
        learning >= 10,
        f"found {learning}",
    )
    return col.report(cases)


# ---------------------------------------------------------------------------
# Sheaf conditions and updates


_PLANT_FLAG = {
    "extra-successor": "unique_lift",
    "missing-successor": "bounded",
    "empty-fiber": "surjective",
}


def run_sheaf(seed: int = 0, cases: int = 200, max_size: int = 3) -> Report:
    """Sheaf recognition, planted violations, updates, substitution laws."""
    rng = random.Random(seed)
    col = _Collector("sheaf")
    for i in range(cases):
        tag = f"case {i}"
        agents = random_agents(rng, rng.randrange(1, 3))
        base = random_frame(rng, random_carrier(rng, rng.randrange(2, max_size + 1), "w"), agents)
        sheaf = random_sheaf(rng, base, max_fiber=3)
        chk = is_kripke_sheaf(sheaf.total, sheaf.base, sheaf.proj)
        col.expect(
            f"{tag}: generated sheaf recognized",
            chk.is_sheaf,
            chk.failure or "",
        )
        col.expect(
            f"{tag}: diagonal characterization agrees",
            chk.characterization_agrees,
            f"delta_bounded={chk.delta_bounded} unique_lift={chk.unique_lift}",
        )

        for mode, flag in _PLANT_FLAG.items():
            try:
                total_b, base_b, proj_b = plant_non_sheaf(rng, sheaf, mode)
            except InvariantViolation:
                continue
            chk2 = is_kripke_sheaf(total_b, base_b, proj_b)
            col.expect(
                f"{tag}: planted {mode} detected",
                not chk2.is_sheaf and not getattr(chk2, flag),
                f"check={chk2}",
            )
            col.expect(
                f"{tag}: characterization agrees on planted {mode}",
                chk2.characterization_agrees,
                f"delta_bounded={chk2.delta_bounded} unique_lift={chk2.unique_lift}",
            )

        model = random_sheaf_model(rng, random_sheaf(rng, base, max_fiber=2))
        for n_pow in range(4):
            pw = model.power(n_pow)
            chk_p = is_kripke_sheaf(pw.frame, model.sheaf.base, pw.proj_to_base)
            col.expect(
                f"{tag}: power {n_pow} projection is again a sheaf",
                chk_p.is_sheaf and chk_p.characterization_agrees,
                chk_p.failure or "",
            )

        ev = random_fo_event_model(rng, model, rng.randrange(1, 3))
        upd = pullback_update(model, ev)
        upd_sheaf = upd.updated.sheaf
        chk3 = is_kripke_sheaf(upd_sheaf.total, upd_sheaf.base, upd_sheaf.proj)
        col.expect(
            f"{tag}: updated structure is again a sheaf",
            chk3.is_sheaf and chk3.characterization_agrees,
            chk3.failure or "",
        )

        power1 = model.power(1)
        power2 = model.power(2)
        total = model.sheaf.total
        diag = FrameMap(
            power1.frame,
            power2.frame,
            function_from_mapping(
                total.carrier,
                power2.carrier,
                {
                    a: power2.label_for(model.sheaf.proj(a), (a, a))
                    for a in total.carrier
                },
            ),
        )
        power_maps = [
            ("projection to base", power1.proj_to_base, 1, 0),
            ("component projection", power2.component_projections[0], 2, 1),
            ("unary function interpretation", model.fn_interp_map["f"], 1, 1),
            ("diagonal", diag, 1, 2),
        ]
        for label, fmap, m_pow, n_pow in power_maps:
            rep_t = check_transition_commutation(upd, fmap, m_pow, n_pow)
            for check in rep_t.failures():
                col.expect(
                    f"{tag}: {label}: {check.name}", False, check.witness or ""
                )

        event = rng.choice(list(ev.events))
        phi = FormulaInContext(
            ("x",), random_fo_formula(rng, model, ("x",), rng.randrange(1, 3))
        )
        terms = [TermInContext(("u",), rng.choice(
            (Var("u"), Fun("f", (Var("u"),)))
        ))]
        rep = check_substitution_box_commutation(model, phi, terms, ev=ev, event=event)
        for check in rep.failures():
            col.expect(f"{tag}: substitution commutes with {check.name}", False, check.witness or "")
    return col.report(cases)


# ---------------------------------------------------------------------------
# Quantifier reduction laws


def run_fo_reduction(seed: int = 0, cases: int = 200, max_size: int = 3) -> Report:
    """Quantifier/event commutation and verified rewriting over sheaf models."""
    rng = random.Random(seed)
    col = _Collector("fo-reduction")
    for i in range(cases):
        tag = f"case {i}"
        agents = random_agents(rng, rng.randrange(1, 3))
        base = random_frame(rng, random_carrier(rng, rng.randrange(2, max_size + 1), "w"), agents)
        sheaf = random_sheaf(rng, base, max_fiber=3)
        model = random_sheaf_model(rng, sheaf)
        ev = random_fo_event_model(rng, model, rng.randrange(1, 3))
        event = rng.choice(list(ev.events))

        context = ("x",) if rng.random() < 0.5 else ("x", "y")
        body = random_fo_formula(rng, model, context, rng.randrange(1, 3))
        rep = verify_quantifier_reduction(model, ev, event, FormulaInContext(context, body))
        for check in rep.failures():
            col.expect(f"{tag}: {check.name}", False, check.witness or "")

        out_context = ("z1",) if rng.random() < 0.5 else ("z1", "z2")
        phi = FormulaInContext(context, body)
        terms = [
            TermInContext(out_context, random_fo_term(rng, model, out_context, depth=1))
            for _ in context
        ]
        rep_s = check_substitution_functoriality(model, phi, terms)
        for check in rep_s.failures():
            col.expect(f"{tag}: substitution functoriality", False, check.witness or "")
        rep_b = check_substitution_box_commutation(model, phi, terms, ev=ev, event=event)
        for check in rep_b.failures():
            col.expect(
                f"{tag}: substitution commutes with {check.name}", False, check.witness or ""
            )

        refs = [("E", e) for e in ev.events]
        dyn = random_fo_formula(
            rng, model, context, rng.randrange(1, 3), event_refs=refs, fresh=1
        )
        try:
            res = reduce_formula(
                FormulaInContext(context, dyn), model=model, registry={"E": ev}
            )
        except (NotReducible, InvariantViolation) as exc:
            col.expect(f"{tag}: rewriting stays extension-true", False, str(exc))
        else:
            col.expect(
                f"{tag}: rewriting reaches a static formula",
                is_static(res.result),
                f"steps={res.step_count}",
            )
    return col.report(cases)


# ---------------------------------------------------------------------------
# Registry and drivers


SUITES: Dict[str, Callable[..., Report]] = {
    "rel-laws": run_rel_laws,
    "duality": run_duality,
    "beck-chevalley": run_beck_chevalley,
    "topological": run_topological,
    "pal-reduction": run_pal_reduction,
    "del-reduction": run_del_reduction,
    "sheaf": run_sheaf,
    "fo-reduction": run_fo_reduction,
}

DEFAULT_CASES: Dict[str, int] = {
    "rel-laws": 1000,
    "duality": 1000,
    "beck-chevalley": 500,
    "topological": 500,
    "pal-reduction": 500,
    "del-reduction": 500,
    "sheaf": 200,
    "fo-reduction": 200,
}


def run_suite(
    name: str,
    seed: int = 0,
    cases: Optional[int] = None,
    max_size: Optional[int] = None,
) -> Report:
    """Run one suite by name with its default sizes unless overridden."""
    if name not in SUITES:
        known = ", ".join(SUITES)
        raise InvariantViolation(f"unknown suite {name!r}; known suites: {known}")
    kwargs = {"seed": seed, "cases": cases if cases is not None else DEFAULT_CASES[name]}
    if max_size is not None:
        kwargs["max_size"] = max_size
    return SUITES[name](**kwargs)


def run_all(
    seed: int = 0,
    cases: Optional[int] = None,
    max_size: Optional[int] = None,
) -> List[Report]:
    """Run every suite, seeding each one independently from the base seed."""
    return [
        run_suite(name, seed=seed + idx, cases=cases, max_size=max_size)
        for idx, name in enumerate(SUITES)
    ]


@dataclass(frozen=True)
class SelfTestReport:
    """Whether the random search refuted a deliberately false inequality."""

    caught: bool
    tried: int
    witness: Optional[str]

    @property
    def ok(self) -> bool:
        return self.caught


def _wrong_modularity(r1: Rel, r2: Rel, r3: Rel) -> bool:
    """A false variant of the modularity inequality, for self testing.

    The converse in the middle term is dropped, which makes the claimed
    inequality fail on easy triples.  The search below must find one.
    """
    lhs = meet(compose(r1, r2), r3)
    rhs = compose(meet(r1, compose(r3, r2)), r2)
    return leq(lhs, rhs)


def self_test(seed: int = 0, cases: int = 400, max_size: int = 4) -> SelfTestReport:
    """Plant a wrong law and confirm the random search refutes it.

    Every triple must satisfy the true modularity law; the test passes
    only when some triple violates the planted variant.  All three
    relations live on one carrier so both variants are well-typed.
    """
    rng = random.Random(seed)
    witness = None
    for i in range(cases):
        a = random_carrier(rng, rng.randrange(2, max_size + 1), "a")
        r1 = random_relation(rng, a, a)
        r2 = random_relation(rng, a, a)
        r3 = random_relation(rng, a, a)
        if not check_modularity(r1, r2, r3):
            return SelfTestReport(
                False,
                i + 1,
                f"true law failed: r1={_describe_rel(r1)} r2={_describe_rel(r2)} r3={_describe_rel(r3)}",
            )
        if witness is None and not _wrong_modularity(r1, r2, r3):
            witness = (
                f"r1={_describe_rel(r1)} r2={_describe_rel(r2)} r3={_describe_rel(r3)}"
            )
    return SelfTestReport(witness is not None, cases, witness)
