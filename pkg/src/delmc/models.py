"""Kripke models, event models, announcement and product update.

Extensions are computed algebraically: a box is the universal image along
the dagger of the agent's relation, announcement operators are the
universal/direct images along the submodel inclusion, and event operators
are images along the transition relation of the update.  Dynamic operators
name their event model; names resolve through a registry passed alongside
the formula.

Event preconditions may themselves be dynamic (they are evaluated on the
original model); cyclic references between event models are detected and
rejected rather than looping.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    AgentMismatch,
    CapExceeded,
    InvariantViolation,
    UnknownAtom,
    UnknownEvent,
    UnknownSymbol,
    UnresolvedEventModel,
)
from .formulas import (
    And,
    Atom,
    Bot,
    Box,
    DelBox,
    DelDia,
    Dia,
    Formula,
    Imp,
    Not,
    Or,
    PalBox,
    PalDia,
    Top,
)
from .frames import FrameMap, KripkeFrame, initial_lift, is_bounded
from .powerset import (
    JOIN,
    MEET,
    PowersetMap,
    Subset,
    all_subsets,
    apply,
    compose_maps,
    exists_map,
    forall_map,
    preimage_map,
)
from .rel import FiniteSet, Rel, compose, dagger, pair_label


@dataclass(frozen=True)
class KripkeModel:
    """A frame plus a valuation for finitely many atoms."""

    frame: KripkeFrame
    valuation: Tuple[Tuple[str, Subset], ...]

    def __post_init__(self):
        names = [n for n, _ in self.valuation]
        if names != sorted(names):
            raise InvariantViolation("valuation entries must be sorted by atom name")
        if len(set(names)) != len(names):
            raise InvariantViolation("duplicate atom in valuation")
        for n, s in self.valuation:
            if s.carrier != self.frame.carrier:
                raise InvariantViolation(f"valuation of {n!r} lives on the wrong carrier")

    @staticmethod
    def make(frame: KripkeFrame, val: Mapping[str, Subset]) -> "KripkeModel":
        return KripkeModel(frame, tuple((n, val[n]) for n in sorted(val)))

    @cached_property
    def val_map(self) -> Dict[str, Subset]:
        return dict(self.valuation)

    @property
    def atoms(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.valuation)

    def val(self, atom: str) -> Subset:
        try:
            return self.val_map[atom]
        except KeyError:
            raise UnknownAtom(f"atom {atom!r} not in valuation") from None


@dataclass(frozen=True)
class EventModel:
    """A frame over events plus one precondition formula per event."""

    frame: KripkeFrame
    preconditions: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        keys = tuple(k for k, _ in self.preconditions)
        if keys != self.frame.carrier.elements:
            raise InvariantViolation("preconditions must list the events in carrier order")

    @staticmethod
    def make(frame: KripkeFrame, pre: Mapping[str, Formula]) -> "EventModel":
        missing = [e for e in frame.carrier if e not in pre]
        if missing:
            raise InvariantViolation(f"no precondition for event {missing[0]!r}")
        return EventModel(frame, tuple((e, pre[e]) for e in frame.carrier))

    @cached_property
    def pre_map(self) -> Dict[str, Formula]:
        return dict(self.preconditions)

    @property
    def events(self) -> Tuple[str, ...]:
        return self.frame.carrier.elements

    def pre(self, event: str) -> Formula:
        try:
            return self.pre_map[event]
        except KeyError:
            raise UnknownEvent(f"event {event!r} not in event model") from None


@dataclass(frozen=True)
class UpdateResult:
    """Everything the product update produces, maps included.

    The updated carrier sits inside the ambient product of the two
    carriers; for each event the result carries the inclusion of its
    precondition extent, the injection of that extent into the update, and
    the transition relation from old worlds to their updated copies.  The
    transition relation is built two ways (through the extent, and through
    the ambient product) and those must agree.
    """

    source: KripkeModel
    events: EventModel
    updated: KripkeModel
    p_x: FrameMap
    p_e: FrameMap
    ambient: KripkeFrame
    ambient_incl: Rel
    pre_extents: Tuple[Tuple[str, Subset], ...]
    event_inclusions: Tuple[Tuple[str, Rel], ...]
    event_injections: Tuple[Tuple[str, Rel], ...]
    ambient_injections: Tuple[Tuple[str, Rel], ...]
    transitions: Tuple[Tuple[str, Rel], ...]

    def pre_extent(self, e: str) -> Subset:
        return dict(self.pre_extents)[e]

    def inclusion(self, e: str) -> Rel:
        return dict(self.event_inclusions)[e]

    def injection(self, e: str) -> Rel:
        return dict(self.event_injections)[e]

    def ambient_injection(self, e: str) -> Rel:
        return dict(self.ambient_injections)[e]

    def transition(self, e: str) -> Rel:
        return dict(self.transitions)[e]


def updated_frame(
    frame_x: KripkeFrame,
    frame_e: KripkeFrame,
    extents: Mapping[str, Subset],
    name: Optional[str] = None,
) -> Tuple[KripkeFrame, Rel, Rel]:
    """Carrier and frame of an update, given each event's precondition extent.

    Returns the frame together with the two projection functions.  The
    relations are the initial lift of the projections, i.e. a pair moves to
    a pair when both components move.
    """
    if frame_x.agents != frame_e.agents:
        raise AgentMismatch("update: model and event frames carry different agent sets")
    chosen = []
    for w in frame_x.carrier:
        for e in frame_e.carrier:
            if w in extents[e].members:
                chosen.append((w, e))
    label = name or f"({frame_x.carrier.name}(x){frame_e.carrier.name})"
    carrier = FiniteSet(label, tuple(pair_label(w, e) for w, e in chosen))
    px = Rel(carrier, frame_x.carrier, frozenset((pair_label(w, e), w) for w, e in chosen))
    pe = Rel(carrier, frame_e.carrier, frozenset((pair_label(w, e), e) for w, e in chosen))
    frame = initial_lift([frame_x, frame_e], [px, pe], carrier=carrier)
    return frame, px, pe


class _Evaluator:
    """Extension computation with call-scoped memoisation."""

    def __init__(self, registry: Optional[Mapping[str, EventModel]] = None):
        self.registry = dict(registry or {})
        self.memo: Dict[Tuple[KripkeModel, Formula], Subset] = {}
        self.pal_memo: Dict[Tuple[KripkeModel, Formula], Tuple[KripkeModel, FrameMap]] = {}
        self.update_memo: Dict[Tuple[KripkeModel, str], UpdateResult] = {}
        self.updating: set = set()

    def ext(self, model: KripkeModel, phi: Formula) -> Subset:
        key = (model, phi)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._ext(model, phi)
        self.memo[key] = out
        return out

    def _ext(self, model: KripkeModel, phi: Formula) -> Subset:
        carrier = model.frame.carrier
        if isinstance(phi, Top):
            return Subset(carrier, carrier.as_set)
        if isinstance(phi, Bot):
            return Subset(carrier, frozenset())
        if isinstance(phi, Atom):
            return model.val(phi.name)
        if isinstance(phi, Not):
            return self.ext(model, phi.body).complement()
        if isinstance(phi, And):
            return self.ext(model, phi.left).intersect(self.ext(model, phi.right))
        if isinstance(phi, Or):
            return self.ext(model, phi.left).union(self.ext(model, phi.right))
        if isinstance(phi, Imp):
            return self.ext(model, phi.left).complement().union(self.ext(model, phi.right))
        if isinstance(phi, Box):
            r = model.frame.rel(phi.agent)
            return apply(forall_map(dagger(r)), self.ext(model, phi.body))
        if isinstance(phi, Dia):
            r = model.frame.rel(phi.agent)
            return apply(exists_map(dagger(r)), self.ext(model, phi.body))
        if isinstance(phi, (PalBox, PalDia)):
            sub, incl = self.pal(model, phi.announcement)
            inner = self.ext(sub, phi.body)
            image = forall_map(incl.fn) if isinstance(phi, PalBox) else exists_map(incl.fn)
            return apply(image, inner)
        if isinstance(phi, (DelBox, DelDia)):
            upd = self.update(model, phi.model)
            if phi.event not in upd.events.events:
                raise UnknownEvent(f"event {phi.event!r} not in event model {phi.model!r}")
            inner = self.ext(upd.updated, phi.body)
            r_e = upd.transition(phi.event)
            image = forall_map(dagger(r_e)) if isinstance(phi, DelBox) else exists_map(dagger(r_e))
            return apply(image, inner)
        raise UnknownSymbol(
            f"{type(phi).__name__} node cannot be evaluated on a propositional model"
        )

    def pal(self, model: KripkeModel, sigma: Formula) -> Tuple[KripkeModel, FrameMap]:
        key = (model, sigma)
        hit = self.pal_memo.get(key)
        if hit is not None:
            return hit
        extent = self.ext(model, sigma)
        from .frames import subframe

        frame, incl = subframe(model.frame, extent, tag="!")
        val = {
            n: Subset(frame.carrier, s.members & frame.carrier.as_set)
            for n, s in model.valuation
        }
        sub = KripkeModel.make(frame, val)
        self.pal_memo[key] = (sub, incl)
        return sub, incl

    def update(self, model: KripkeModel, ref: str) -> UpdateResult:
        key = (model, ref)
        hit = self.update_memo.get(key)
        if hit is not None:
            return hit
        if ref not in self.registry:
            raise UnresolvedEventModel(f"event model {ref!r} not in registry")
        if key in self.updating:
            raise InvariantViolation(
                f"cyclic dynamic preconditions while updating with {ref!r}"
            )
        self.updating.add(key)
        try:
            out = self.build_update(model, self.registry[ref])
        finally:
            self.updating.discard(key)
        self.update_memo[key] = out
        return out

    def build_update(self, model: KripkeModel, ev: EventModel) -> UpdateResult:
        frame_x = model.frame
        frame_e = ev.frame
        extents = {e: self.ext(model, ev.pre(e)) for e in ev.events}
        frame, px, pe = updated_frame(frame_x, frame_e, extents)
        val = {
            n: Subset(
                frame.carrier,
                frozenset(
                    pair_label(w, e)
                    for w in s.members
                    for e in ev.events
                    if pair_label(w, e) in frame.carrier.as_set
                ),
            )
            for n, s in model.valuation
        }
        updated = KripkeModel.make(frame, val)
        p_x = FrameMap(frame, frame_x, px)
        p_e = FrameMap(frame, frame_e, pe)

        from .frames import product

        ambient, amb_p1, amb_p2 = product(frame_x, frame_e)
        ambient_incl = Rel(
            frame.carrier, ambient.carrier, frozenset((c, c) for c in frame.carrier)
        )
        x = frame_x.carrier
        extent_list: List[Tuple[str, Subset]] = []
        incl_list: List[Tuple[str, Rel]] = []
        inj_list: List[Tuple[str, Rel]] = []
        amb_inj_list: List[Tuple[str, Rel]] = []
        trans_list: List[Tuple[str, Rel]] = []
        for e in ev.events:
            extent = extents[e]
            sub_elems = tuple(w for w in x if w in extent.members)
            sub_carrier = FiniteSet(f"({x.name}|{e})", sub_elems)
            i_e = Rel(sub_carrier, x, frozenset((w, w) for w in sub_elems))
            q_e = Rel(
                sub_carrier, frame.carrier, frozenset((w, pair_label(w, e)) for w in sub_elems)
            )
            qprime_e = Rel(
                x, ambient.carrier, frozenset((w, pair_label(w, e)) for w in x)
            )
            r_e = compose(dagger(i_e), q_e)
            via_ambient = compose(qprime_e, dagger(ambient_incl))
            if r_e != via_ambient:
                raise InvariantViolation(
                    f"transition relation for event {e!r} disagrees between its two constructions"
                )
            extent_list.append((e, extent))
            incl_list.append((e, i_e))
            inj_list.append((e, q_e))
            amb_inj_list.append((e, qprime_e))
            trans_list.append((e, r_e))
        return UpdateResult(
            source=model,
            events=ev,
            updated=updated,
            p_x=p_x,
            p_e=p_e,
            ambient=ambient,
            ambient_incl=ambient_incl,
            pre_extents=tuple(extent_list),
            event_inclusions=tuple(incl_list),
            event_injections=tuple(inj_list),
            ambient_injections=tuple(amb_inj_list),
            transitions=tuple(trans_list),
        )


def extension(
    model: KripkeModel,
    phi: Formula,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> Subset:
    """The set of worlds where the formula holds."""
    return _Evaluator(registry).ext(model, phi)


def pal_update(
    model: KripkeModel,
    sigma: Formula,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> Tuple[KripkeModel, FrameMap]:
    """Submodel of the announcement's extent, with its inclusion."""
    return _Evaluator(registry).pal(model, sigma)


def product_update(
    model: KripkeModel,
    ev: EventModel,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> UpdateResult:
    """Product update of a model by an event model."""
    return _Evaluator(registry).build_update(model, ev)


@dataclass(frozen=True)
class LawCheck:
    name: str
    ok: bool
    witness: Optional[str] = None


@dataclass(frozen=True)
class LawReport:
    checks: Tuple[LawCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[LawCheck]:
        return [c for c in self.checks if not c.ok]


def _equality_check(
    name: str,
    ev: _Evaluator,
    model: KripkeModel,
    lhs: Formula,
    rhs: Formula,
) -> LawCheck:
    left = ev.ext(model, lhs)
    right = ev.ext(model, rhs)
    if left == right:
        return LawCheck(name, True)
    diff = sorted(left.members.symmetric_difference(right.members))
    return LawCheck(name, False, witness=f"sides differ at {diff}")


def verify_pal_reductions(
    model: KripkeModel,
    sigma: Formula,
    phi: Formula,
    psi: Formula,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> LawReport:
    """Announcement reduction laws, checked as extension equalities."""
    ev = _Evaluator(registry)
    checks: List[LawCheck] = []
    for p in model.atoms:
        checks.append(
            _equality_check(
                f"pal-atom[{p}]", ev, model,
                PalBox(sigma, Atom(p)), Imp(sigma, Atom(p)),
            )
        )
    checks.append(
        _equality_check(
            "pal-and", ev, model,
            PalBox(sigma, And(phi, psi)), And(PalBox(sigma, phi), PalBox(sigma, psi)),
        )
    )
    checks.append(
        _equality_check(
            "pal-not", ev, model,
            PalBox(sigma, Not(phi)), Imp(sigma, Not(PalBox(sigma, phi))),
        )
    )
    for a in model.frame.agents:
        checks.append(
            _equality_check(
                f"pal-box[{a}]", ev, model,
                PalBox(sigma, Box(a, phi)), Imp(sigma, Box(a, PalBox(sigma, phi))),
            )
        )
    return LawReport(tuple(checks))


def big_and(parts: Sequence[Formula]) -> Formula:
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def verify_del_reductions(
    model: KripkeModel,
    ev_model: EventModel,
    event: str,
    phi: Formula,
    psi: Formula,
    registry: Optional[Mapping[str, EventModel]] = None,
    ref: str = "_update",
) -> LawReport:
    """Event reduction laws for one event, checked as extension equalities."""
    if event not in ev_model.events:
        raise UnknownEvent(f"event {event!r} not in event model")
    reg = dict(registry or {})
    reg[ref] = ev_model
    ev = _Evaluator(reg)
    pre = ev_model.pre(event)
    checks: List[LawCheck] = []
    for p in model.atoms:
        checks.append(
            _equality_check(
                f"del-atom[{p}]", ev, model,
                DelBox(ref, event, Atom(p)), Imp(pre, Atom(p)),
            )
        )
    checks.append(
        _equality_check(
            "del-and", ev, model,
            DelBox(ref, event, And(phi, psi)),
            And(DelBox(ref, event, phi), DelBox(ref, event, psi)),
        )
    )
    checks.append(
        _equality_check(
            "del-not", ev, model,
            DelBox(ref, event, Not(phi)),
            Imp(pre, Not(DelBox(ref, event, phi))),
        )
    )
    for a in model.frame.agents:
        succ = ev_model.frame.rel(a).successors[event]
        ordered = [e for e in ev_model.events if e in succ]
        conj = big_and([DelBox(ref, e2, phi) for e2 in ordered])
        checks.append(
            _equality_check(
                f"del-box[{a}]", ev, model,
                DelBox(ref, event, Box(a, phi)), Imp(pre, Box(a, conj)),
            )
        )
    return LawReport(tuple(checks))


@dataclass(frozen=True)
class NoLearningReport:
    """Outcome of the no-learning criterion for one update.

    bounded: whether the world projection of the update is bounded.
    holds: whether the event box always agreed with the guarded formula.
    A bounded projection with holds False would refute the library; an
    unbounded projection with holds False is a genuine learning witness.
    """

    bounded: bool
    holds: bool
    witness: Optional[str]
    formulas_checked: int


def _static_pool(
    model: KripkeModel,
    updated: KripkeModel,
    depth: int,
    class_cap: int = 150,
) -> List[Tuple[Formula, FrozenSet[str], FrozenSet[str]]]:
    """Static formulas to the given depth, deduplicated semantically.

    Each entry carries the formula's extension on the original and on the
    updated model, so deeper levels are built by plain set operations.
    Deduplication keys on that pair of extensions, which makes the sweep
    exhaustive over semantic classes rather than syntax trees.
    """
    x = model.frame.carrier
    u = updated.frame.carrier
    succ_x = {a: model.frame.rel(a).successors for a in model.frame.agents}
    succ_u = {a: updated.frame.rel(a).successors for a in updated.frame.agents}

    def box(succ, carrier, s):
        return frozenset(w for w in carrier if succ[w] <= s)

    def dia(succ, carrier, s):
        return frozenset(w for w in carrier if succ[w] & s)

    def sort_key(entry):
        fx, sx, su = entry
        return (sorted(sx), sorted(su))

    level: List[Tuple[Formula, FrozenSet[str], FrozenSet[str]]] = []
    seen = set()

    def add(f, sx, su, into):
        key = (sx, su)
        if key not in seen:
            seen.add(key)
            into.append((f, sx, su))

    base: List[Tuple[Formula, FrozenSet[str], FrozenSet[str]]] = []
    add(Top(), x.as_set, u.as_set, base)
    add(Bot(), frozenset(), frozenset(), base)
    for p in model.atoms:
        add(Atom(p), model.val(p).members, updated.val(p).members, base)
    pool = list(base)
    current = list(base)
    for _ in range(depth):
        fresh: List[Tuple[Formula, FrozenSet[str], FrozenSet[str]]] = []
        for f, sx, su in current:
            add(Not(f), x.as_set - sx, u.as_set - su, fresh)
            for a in model.frame.agents:
                add(Box(a, f), box(succ_x[a], x, sx), box(succ_u[a], u, su), fresh)
                add(Dia(a, f), dia(succ_x[a], x, sx), dia(succ_u[a], u, su), fresh)
        for f1, sx1, su1 in current:
            for f2, sx2, su2 in pool:
                add(And(f1, f2), sx1 & sx2, su1 & su2, fresh)
                add(Or(f1, f2), sx1 | sx2, su1 | su2, fresh)
                add(Imp(f1, f2), (x.as_set - sx1) | sx2, (u.as_set - su1) | su2, fresh)
        fresh.sort(key=sort_key)
        fresh = fresh[:class_cap]
        pool.extend(fresh)
        current = fresh
    return pool


def no_learning_check(
    model: KripkeModel,
    ev_model: EventModel,
    depth: int = 2,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> NoLearningReport:
    """When the world projection is bounded, updating teaches nobody anything.

    Concretely: for every event and every static formula to the given
    depth, the event box of the formula has the same extension as the
    material implication from the event's precondition, both read on the
    original model.  The sweep covers every semantic class of static
    formulas to the depth.  When the projection is not bounded, a failing
    pair is not an error but a learning witness, reported as such.
    """
    ev = _Evaluator(registry)
    upd = ev.build_update(model, ev_model)
    bounded = is_bounded(upd.p_x)
    pool = _static_pool(model, upd.updated, depth)
    x = model.frame.carrier
    witness = None
    holds = True
    for e in ev_model.events:
        pre_ext = ev.ext(model, ev_model.pre(e)).members
        box_along = forall_map(dagger(upd.transition(e)))
        for f, sx, su in pool:
            lhs = apply(box_along, Subset(upd.updated.frame.carrier, su)).members
            rhs = (x.as_set - pre_ext) | (sx & pre_ext)
            if lhs != rhs:
                holds = False
                diff = sorted(lhs.symmetric_difference(rhs))
                witness = f"event {e!r}: event box differs from guarded formula at {diff}"
                break
        if not holds:
            break
    return NoLearningReport(bounded, holds, witness, len(pool))


def static_precondition_modalities(
    model: KripkeModel,
    sigma: Formula,
    registry: Optional[Mapping[str, EventModel]] = None,
    cap: int = 12,
) -> Tuple[PowersetMap, PowersetMap]:
    """The announcement modalities as powerset maps on the original carrier.

    Returns the composite of inverse image along the inclusion with the
    universal image (box form) and with the direct image (diamond form),
    and asserts pointwise that these are implication from and conjunction
    with the announcement.
    """
    ev = _Evaluator(registry)
    extent = ev.ext(model, sigma)
    _, incl = ev.pal(model, sigma)
    box_map = compose_maps(preimage_map(incl.fn, MEET), forall_map(incl.fn))
    dia_map = compose_maps(preimage_map(incl.fn, JOIN), exists_map(incl.fn))
    carrier = model.frame.carrier
    if len(carrier) > cap:
        raise CapExceeded(f"static_precondition_modalities: carrier above cap {cap}")
    for s in all_subsets(carrier):
        want_box = extent.complement().union(s)
        want_dia = extent.intersect(s)
        if apply(box_map, s) != want_box or apply(dia_map, s) != want_dia:
            raise InvariantViolation(
                "announcement modalities disagree with the propositional operations"
            )
    return box_map, dia_map
