"""First-order semantics over Kripke sheaves, with pullback update.

A Kripke sheaf is a surjective bounded projection from a frame of
individuals onto a frame of worlds in which accessible lifts are unique:
whenever one individual steps to two individuals over the same world, the
two coincide.  Terms in an n-variable context denote maps out of the n-th
fibered power of the projection, formulas denote subsets of its carrier,
quantifiers are the image maps along the projection dropping a component,
and modalities are images along the fibered frame relations.

Updating by an event model with closed preconditions pulls the whole
structure back: worlds, individuals, interpretation tables.  The update of
a sheaf model is again a sheaf model; the constructor re-validates that.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    ArityMismatch,
    CarrierMismatch,
    InvariantViolation,
    NotMonotone,
    OpenPrecondition,
    UnknownEvent,
    UnknownSymbol,
    UnresolvedEventModel,
)
from .formulas import (
    And,
    Bot,
    Box,
    DelBox,
    DelDia,
    Dia,
    Exists,
    Forall,
    Formula,
    FormulaInContext,
    Fun,
    Imp,
    Not,
    Or,
    Pred,
    Term,
    TermInContext,
    Top,
    Var,
    as_sentence,
    free_vars,
    substitute,
)
from .frames import FrameMap, KripkeFrame, identity_map, initial_lift, is_bounded, is_monotone
from .models import EventModel, LawCheck, LawReport, updated_frame
from .powerset import Subset, apply, exists_map, forall_map
from .rel import (
    FiniteSet,
    Rel,
    apply_function,
    compose,
    dagger,
    function_from_mapping,
    is_surjective,
    pair_label,
    tuple_label,
)


@dataclass(frozen=True)
class Signature:
    """Function and relation symbols with arities; names are disjoint."""

    function_symbols: Tuple[Tuple[str, int], ...]
    relation_symbols: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.function_symbols] + [n for n, _ in self.relation_symbols]
        if len(set(names)) != len(names):
            raise InvariantViolation("signature symbol names must be distinct")
        for n, k in self.function_symbols + self.relation_symbols:
            if k < 0:
                raise InvariantViolation(f"negative arity for {n!r}")

    @staticmethod
    def make(functions: Mapping[str, int], relations: Mapping[str, int]) -> "Signature":
        return Signature(
            tuple((n, functions[n]) for n in sorted(functions)),
            tuple((n, relations[n]) for n in sorted(relations)),
        )

    def fn_arity(self, name: str) -> int:
        for n, k in self.function_symbols:
            if n == name:
                return k
        raise UnknownSymbol(f"function symbol {name!r} not in signature")

    def rel_arity(self, name: str) -> int:
        for n, k in self.relation_symbols:
            if n == name:
                return k
        raise UnknownSymbol(f"relation symbol {name!r} not in signature")


@dataclass(frozen=True)
class SheafCheck:
    """Diagnostics from checking the sheaf conditions on a projection.

    failure names the first failed condition, with a witness.  The last
    two fields cross-check the direct definition against the diagonal
    characterization: bounded plus unique lifts must coincide with bounded
    projection plus bounded diagonal into the binary fibered power.
    """

    is_sheaf: bool
    failure: Optional[str]
    surjective: bool
    bounded: bool
    unique_lift: bool
    delta_bounded: bool
    characterization_agrees: bool


def _unique_lift_witness(total: KripkeFrame, proj_fn: Rel) -> Optional[Tuple[str, str, str, str]]:
    pi = {a: apply_function(proj_fn, a) for a in total.carrier}
    for agent in total.agents:
        succ = total.rel(agent).successors
        for a in total.carrier:
            by_world: Dict[str, str] = {}
            for b in sorted(succ[a], key=total.carrier.index.__getitem__):
                w = pi[b]
                if w in by_world and by_world[w] != b:
                    return (agent, a, by_world[w], b)
                by_world[w] = b
    return None


def _raw_fibered_square(total: KripkeFrame, proj_fn: Rel) -> Tuple[KripkeFrame, Rel, Rel]:
    """Binary fibered power of an arbitrary function, no sheaf assumptions."""
    pi = {a: apply_function(proj_fn, a) for a in total.carrier}
    pairs = [(a, b) for a in total.carrier for b in total.carrier if pi[a] == pi[b]]
    carrier = FiniteSet(
        f"({total.carrier.name}^2)", tuple(pair_label(a, b) for a, b in pairs)
    )
    p1 = Rel(carrier, total.carrier, frozenset((pair_label(a, b), a) for a, b in pairs))
    p2 = Rel(carrier, total.carrier, frozenset((pair_label(a, b), b) for a, b in pairs))
    frame = initial_lift([total, total], [p1, p2])
    return frame, p1, p2


def is_kripke_sheaf(total: KripkeFrame, base: KripkeFrame, proj: FrameMap) -> SheafCheck:
    """Check the three sheaf conditions and name the first failure.

    Also evaluates the diagonal characterization independently: the
    projection together with the diagonal into its binary fibered power
    must be bounded exactly when the projection is bounded with unique
    lifts.
    """
    if proj.src != total or proj.dst != base:
        raise CarrierMismatch("is_kripke_sheaf: projection does not connect the two frames")
    surjective = is_surjective(proj.fn)
    bounded = is_bounded(proj)
    witness = _unique_lift_witness(total, proj.fn)
    unique = witness is None

    square_frame, _, _ = _raw_fibered_square(total, proj.fn)
    diag = Rel(
        total.carrier,
        square_frame.carrier,
        frozenset((a, pair_label(a, a)) for a in total.carrier),
    )
    delta_bounded = is_bounded(FrameMap(total, square_frame, diag))
    agrees = (bounded and unique) == (bounded and delta_bounded)

    failure = None
    if not surjective:
        missing = sorted(
            set(base.carrier.elements) - {apply_function(proj.fn, a) for a in total.carrier}
        )
        failure = f"projection not surjective: no individual over {missing[0]!r}"
    elif not bounded:
        failure = "projection not a bounded morphism"
    elif not unique:
        agent, a, b, b2 = witness
        failure = f"unique-lift condition fails (agent {agent!r}): witness {a},{b},{b2}"
    return SheafCheck(
        is_sheaf=surjective and bounded and unique,
        failure=failure,
        surjective=surjective,
        bounded=bounded,
        unique_lift=unique,
        delta_bounded=delta_bounded,
        characterization_agrees=agrees,
    )


@dataclass(frozen=True)
class KripkeSheaf:
    """A validated sheaf: surjective bounded projection with unique lifts."""

    total: KripkeFrame
    base: KripkeFrame
    proj: FrameMap

    def __post_init__(self):
        check = is_kripke_sheaf(self.total, self.base, self.proj)
        if not check.is_sheaf:
            raise InvariantViolation(f"not a Kripke sheaf: {check.failure}")

    def fiber(self, w: str) -> Tuple[str, ...]:
        return tuple(a for a in self.total.carrier if self.proj(a) == w)


@dataclass(frozen=True)
class FiberedPower:
    """The n-th fibered power of a sheaf projection.

    Carrier elements are n-tuples of individuals lying over a common
    world; the frame is the initial lift of the component projections
    together with the projection to the base, so tuples step exactly when
    all components step.  n = 0 is the base itself with the identity,
    n = 1 is the total frame with the projection.
    """

    n: int
    carrier: FiniteSet
    frame: KripkeFrame
    proj_to_base: FrameMap
    component_projections: Tuple[FrameMap, ...]
    tuples: Tuple[Tuple[str, ...], ...]
    base_worlds: Tuple[str, ...]

    @cached_property
    def tuple_map(self) -> Dict[str, Tuple[str, ...]]:
        return dict(zip(self.carrier.elements, self.tuples))

    @cached_property
    def world_map(self) -> Dict[str, str]:
        return dict(zip(self.carrier.elements, self.base_worlds))

    def tuple_of(self, label: str) -> Tuple[str, ...]:
        return self.tuple_map[label]

    def world_of(self, label: str) -> str:
        return self.world_map[label]

    def label_for(self, world: str, tup: Tuple[str, ...]) -> str:
        if self.n == 0:
            return world
        if self.n == 1:
            return tup[0]
        return tuple_label(tup)


def fibered_power(sheaf: KripkeSheaf, n: int) -> FiberedPower:
    if n < 0:
        raise InvariantViolation("fibered_power: negative arity")
    base = sheaf.base
    total = sheaf.total
    if n == 0:
        return FiberedPower(
            n=0,
            carrier=base.carrier,
            frame=base,
            proj_to_base=identity_map(base),
            component_projections=(),
            tuples=tuple(() for _ in base.carrier),
            base_worlds=base.carrier.elements,
        )
    if n == 1:
        return FiberedPower(
            n=1,
            carrier=total.carrier,
            frame=total,
            proj_to_base=sheaf.proj,
            component_projections=(identity_map(total),),
            tuples=tuple((a,) for a in total.carrier),
            base_worlds=tuple(sheaf.proj(a) for a in total.carrier),
        )
    tuples: List[Tuple[str, ...]] = []
    worlds: List[str] = []
    for w in base.carrier:
        fib = sheaf.fiber(w)
        for combo in itertools.product(fib, repeat=n):
            tuples.append(combo)
            worlds.append(w)
    carrier = FiniteSet(
        f"({total.carrier.name}^{n})", tuple(tuple_label(t) for t in tuples)
    )
    comps = []
    for i in range(n):
        comps.append(
            Rel(
                carrier,
                total.carrier,
                frozenset((tuple_label(t), t[i]) for t in tuples),
            )
        )
    to_base = Rel(
        carrier,
        base.carrier,
        frozenset((tuple_label(t), w) for t, w in zip(tuples, worlds)),
    )
    frame = initial_lift([total] * n + [base], comps + [to_base])
    return FiberedPower(
        n=n,
        carrier=carrier,
        frame=frame,
        proj_to_base=FrameMap(frame, base, to_base),
        component_projections=tuple(FrameMap(frame, total, c) for c in comps),
        tuples=tuple(tuples),
        base_worlds=tuple(worlds),
    )


class SheafModel:
    """A sheaf with interpretation tables for a first-order signature.

    Function symbols of arity n are maps from the n-th fibered power to
    the total frame that are monotone and fiber preserving; relation
    symbols of arity n are subsets of the n-th power carrier (arity 0:
    subsets of the base).  Both are validated at construction.
    """

    def __init__(
        self,
        sheaf: KripkeSheaf,
        signature: Signature,
        fn_interp: Mapping[str, FrameMap],
        rel_interp: Mapping[str, Subset],
    ):
        self.sheaf = sheaf
        self.signature = signature
        self._powers: Dict[int, FiberedPower] = {}
        for name, arity in signature.function_symbols:
            if name not in fn_interp:
                raise UnknownSymbol(f"no interpretation for function symbol {name!r}")
            fm = fn_interp[name]
            power = self.power(arity)
            if fm.src != power.frame or fm.dst != sheaf.total:
                raise CarrierMismatch(
                    f"interpretation of {name!r} must map the {arity}-th power into the individuals"
                )
            if not is_monotone(fm):
                raise NotMonotone(f"interpretation of {name!r} is not monotone")
            for lbl in power.carrier:
                if sheaf.proj(fm(lbl)) != power.world_of(lbl):
                    raise InvariantViolation(
                        f"interpretation of {name!r} is not fiber preserving at {lbl!r}"
                    )
        for name, arity in signature.relation_symbols:
            if name not in rel_interp:
                raise UnknownSymbol(f"no interpretation for relation symbol {name!r}")
            sub = rel_interp[name]
            power = self.power(arity)
            if sub.carrier != power.carrier:
                raise CarrierMismatch(
                    f"interpretation of {name!r} must be a subset of the {arity}-th power carrier"
                )
        self.fn_interp_map = {n: fn_interp[n] for n, _ in signature.function_symbols}
        self.rel_interp_map = {n: rel_interp[n] for n, _ in signature.relation_symbols}

    def power(self, n: int) -> FiberedPower:
        if n not in self._powers:
            self._powers[n] = fibered_power(self.sheaf, n)
        return self._powers[n]


class SheafUpdate:
    """Result of a pullback update: the new model plus all transition data.

    Worlds of the new base are pairs of an old world and an event; new
    individuals are pairs of an old individual and an event.  For each
    arity n and event e, transition(n, e) relates an old n-tuple to its
    updated copy when the tuple's world satisfies the event's
    precondition; inclusion(n, e) and injection(n, e) are the two legs it
    is composed of.
    """

    def __init__(
        self,
        source: "SheafModel",
        events: EventModel,
        updated: "SheafModel",
        p_x: FrameMap,
        p_e: FrameMap,
        p_d: FrameMap,
        extents: Mapping[str, Subset],
        ind_parts: Mapping[str, Tuple[str, str]],
        world_parts: Mapping[str, Tuple[str, str]],
    ):
        self.source = source
        self.events = events
        self.updated = updated
        self.p_x = p_x
        self.p_e = p_e
        self.p_d = p_d
        self.extents = dict(extents)
        self.ind_parts = dict(ind_parts)
        self.world_parts = dict(world_parts)
        self._transitions: Dict[Tuple[int, str], Rel] = {}

    def decompose_power_label(self, n: int, label: str) -> Tuple[str, str]:
        """Split a label of the updated n-th power into (old label, event)."""
        new_power = self.updated.power(n)
        old_power = self.source.power(n)
        if n == 0:
            w, e = self.world_parts[label]
            return w, e
        tup = new_power.tuple_of(label)
        parts = [self.ind_parts[a] for a in tup]
        events = {e for _, e in parts}
        if len(events) != 1:
            raise InvariantViolation(f"updated tuple {label!r} mixes events")
        e = next(iter(events))
        old_tuple = tuple(a for a, _ in parts)
        old_world, _ = self.world_parts[new_power.world_of(label)]
        return old_power.label_for(old_world, old_tuple), e

    def transition(self, n: int, e: str) -> Rel:
        """Relation from old n-tuples to their updated copies for one event."""
        if e not in self.events.events:
            raise UnknownEvent(f"event {e!r} not in event model")
        key = (n, e)
        if key not in self._transitions:
            old_power = self.source.power(n)
            new_power = self.updated.power(n)
            pairs = set()
            for lbl in new_power.carrier:
                old_lbl, ev = self.decompose_power_label(n, lbl)
                if ev == e:
                    pairs.add((old_lbl, lbl))
            self._transitions[key] = Rel(old_power.carrier, new_power.carrier, frozenset(pairs))
        return self._transitions[key]

    def inclusion(self, n: int, e: str) -> Rel:
        """Inclusion of the n-tuples whose world satisfies the precondition."""
        r = self.transition(n, e)
        old_power = self.source.power(n)
        elems = tuple(w for w in old_power.carrier if w in r.successors and r.successors[w])
        sub = FiniteSet(f"({old_power.carrier.name}|{e})", elems)
        return Rel(sub, old_power.carrier, frozenset((w, w) for w in elems))

    def injection(self, n: int, e: str) -> Rel:
        """Injection of those n-tuples into the updated power."""
        r = self.transition(n, e)
        incl = self.inclusion(n, e)
        return compose(incl, r)

    def lift_map(self, f: FrameMap, m: int, n: int) -> FrameMap:
        """Pull a map between source powers back to the updated powers."""
        src_m = self.source.power(m)
        if f.src != src_m.frame or f.dst != self.source.power(n).frame:
            raise CarrierMismatch("lift_map: map does not connect the stated powers")
        new_m = self.updated.power(m)
        new_n = self.updated.power(n)
        mapping = {}
        for lbl in new_m.carrier:
            old_lbl, e = self.decompose_power_label(m, lbl)
            target_old = f(old_lbl)
            mapping[lbl] = self._recompose(n, target_old, e)
        return FrameMap(
            new_m.frame,
            new_n.frame,
            function_from_mapping(new_m.carrier, new_n.carrier, mapping),
        )

    def _recompose(self, n: int, old_label: str, e: str) -> str:
        old_power = self.source.power(n)
        new_power = self.updated.power(n)
        if n == 0:
            return pair_label(old_label, e)
        tup = old_power.tuple_of(old_label)
        new_tup = tuple(pair_label(a, e) for a in tup)
        old_world = old_power.world_of(old_label)
        return new_power.label_for(pair_label(old_world, e), new_tup)


class _FOEvaluator:
    """Formula interpretation with call-scoped memoisation."""

    def __init__(self, registry: Optional[Mapping[str, EventModel]] = None):
        self.registry = dict(registry or {})
        self.memo: Dict[Tuple[int, Tuple[str, ...], Formula], Subset] = {}
        self.update_memo: Dict[Tuple[int, str], SheafUpdate] = {}
        self.keepalive: List[SheafModel] = []
        self.updating: set = set()

    def interp(self, model: SheafModel, context: Tuple[str, ...], phi: Formula) -> Subset:
        key = (id(model), context, phi)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.keepalive.append(model)
        out = self._interp(model, context, phi)
        self.memo[key] = out
        return out

    def term_values(
        self, model: SheafModel, context: Tuple[str, ...], t: Term
    ) -> Dict[str, str]:
        """Value of a term at every point of the context's power carrier."""
        power = model.power(len(context))
        if isinstance(t, Var):
            try:
                i = context.index(t.name)
            except ValueError:
                raise InvariantViolation(f"variable {t.name!r} not in context") from None
            if power.n == 1:
                return {lbl: lbl for lbl in power.carrier}
            return {lbl: power.tuple_of(lbl)[i] for lbl in power.carrier}
        if isinstance(t, Fun):
            arity = model.signature.fn_arity(t.name)
            if len(t.args) != arity:
                raise ArityMismatch(
                    f"function symbol {t.name!r} expects {arity} arguments, got {len(t.args)}"
                )
            fm = model.fn_interp_map[t.name]
            arg_values = [self.term_values(model, context, a) for a in t.args]
            arg_power = model.power(arity)
            out = {}
            for lbl in power.carrier:
                tup = tuple(v[lbl] for v in arg_values)
                arg_lbl = arg_power.label_for(power.world_of(lbl), tup)
                out[lbl] = fm(arg_lbl)
            return out
        raise InvariantViolation(f"unknown term node {type(t).__name__}")

    def interp_term_map(
        self, model: SheafModel, term: TermInContext
    ) -> FrameMap:
        power = model.power(len(term.context))
        values = self.term_values(model, term.context, term.term)
        return FrameMap(
            power.frame,
            model.sheaf.total,
            function_from_mapping(power.carrier, model.sheaf.total.carrier, values),
        )

    def _interp(self, model: SheafModel, context: Tuple[str, ...], phi: Formula) -> Subset:
        power = model.power(len(context))
        carrier = power.carrier
        if isinstance(phi, Top):
            return Subset(carrier, carrier.as_set)
        if isinstance(phi, Bot):
            return Subset(carrier, frozenset())
        if isinstance(phi, Pred):
            arity = model.signature.rel_arity(phi.name)
            if len(phi.args) != arity:
                raise ArityMismatch(
                    f"relation symbol {phi.name!r} expects {arity} arguments, got {len(phi.args)}"
                )
            members = model.rel_interp_map[phi.name].members
            if arity == 0:
                return Subset(
                    carrier,
                    frozenset(lbl for lbl in carrier if power.world_of(lbl) in members),
                )
            arg_values = [self.term_values(model, context, t) for t in phi.args]
            arg_power = model.power(arity)
            chosen = set()
            for lbl in carrier:
                tup = tuple(v[lbl] for v in arg_values)
                arg_lbl = arg_power.label_for(power.world_of(lbl), tup)
                if arg_lbl in members:
                    chosen.add(lbl)
            return Subset(carrier, frozenset(chosen))
        if isinstance(phi, Not):
            return self.interp(model, context, phi.body).complement()
        if isinstance(phi, And):
            return self.interp(model, context, phi.left).intersect(
                self.interp(model, context, phi.right)
            )
        if isinstance(phi, Or):
            return self.interp(model, context, phi.left).union(
                self.interp(model, context, phi.right)
            )
        if isinstance(phi, Imp):
            return (
                self.interp(model, context, phi.left)
                .complement()
                .union(self.interp(model, context, phi.right))
            )
        if isinstance(phi, Box):
            r = power.frame.rel(phi.agent)
            return apply(forall_map(dagger(r)), self.interp(model, context, phi.body))
        if isinstance(phi, Dia):
            r = power.frame.rel(phi.agent)
            return apply(exists_map(dagger(r)), self.interp(model, context, phi.body))
        if isinstance(phi, (Forall, Exists)):
            if phi.var in context:
                raise InvariantViolation(
                    f"quantified variable {phi.var!r} shadows the context; rename it"
                )
            extended = context + (phi.var,)
            inner = self.interp(model, extended, phi.body)
            drop = self._drop_last_map(model, len(context))
            image = forall_map(drop) if isinstance(phi, Forall) else exists_map(drop)
            return apply(image, inner)
        if isinstance(phi, (DelBox, DelDia)):
            upd = self.update(model, phi.model)
            if phi.event not in upd.events.events:
                raise UnknownEvent(f"event {phi.event!r} not in event model {phi.model!r}")
            inner = self.interp(upd.updated, context, phi.body)
            r_e = upd.transition(len(context), phi.event)
            image = forall_map(dagger(r_e)) if isinstance(phi, DelBox) else exists_map(dagger(r_e))
            return apply(image, inner)
        raise InvariantViolation(
            f"{type(phi).__name__} node cannot be interpreted in a context"
        )

    def _drop_last_map(self, model: SheafModel, n: int) -> Rel:
        """Projection of the (n+1)-th power onto the n-th, dropping the last slot."""
        upper = model.power(n + 1)
        lower = model.power(n)
        pairs = []
        for lbl in upper.carrier:
            tup = upper.tuple_of(lbl)
            w = upper.world_of(lbl)
            pairs.append((lbl, lower.label_for(w, tup[:-1])))
        return Rel(upper.carrier, lower.carrier, frozenset(pairs))

    def update(self, model: SheafModel, ref: str) -> SheafUpdate:
        key = (id(model), ref)
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
        self.keepalive.append(model)
        return out

    def build_update(self, model: SheafModel, ev: EventModel) -> SheafUpdate:
        sheaf = model.sheaf
        base = sheaf.base
        total = sheaf.total
        extents: Dict[str, Subset] = {}
        for e in ev.events:
            pre = ev.pre(e)
            open_vars = free_vars(pre)
            if open_vars:
                raise OpenPrecondition(
                    f"precondition of event {e!r} has free variables {sorted(open_vars)}"
                )
            sentence = as_sentence(pre)
            extents[e] = self.interp(model, sentence.context, sentence.body)
        new_base, base_px, base_pe = updated_frame(base, ev.frame, extents)
        pulled = {
            e: Subset(
                total.carrier,
                frozenset(a for a in total.carrier if sheaf.proj(a) in extents[e].members),
            )
            for e in ev.events
        }
        new_total, tot_pd, tot_pe = updated_frame(total, ev.frame, pulled)
        world_parts = {
            lbl: (apply_function(base_px, lbl), apply_function(base_pe, lbl))
            for lbl in new_base.carrier
        }
        ind_parts = {
            lbl: (apply_function(tot_pd, lbl), apply_function(tot_pe, lbl))
            for lbl in new_total.carrier
        }
        proj_pairs = {
            lbl: pair_label(sheaf.proj(a), e) for lbl, (a, e) in ind_parts.items()
        }
        new_proj = FrameMap(
            new_total,
            new_base,
            function_from_mapping(new_total.carrier, new_base.carrier, proj_pairs),
        )
        new_sheaf = KripkeSheaf(new_total, new_base, new_proj)

        shell = SheafModel.__new__(SheafModel)
        shell.sheaf = new_sheaf
        shell.signature = model.signature
        shell._powers = {}
        shell.fn_interp_map = {}
        shell.rel_interp_map = {}

        helper = SheafUpdate(
            source=model,
            events=ev,
            updated=shell,
            p_x=FrameMap(new_base, base, base_px),
            p_e=FrameMap(new_base, ev.frame, base_pe),
            p_d=FrameMap(new_total, total, tot_pd),
            extents=extents,
            ind_parts=ind_parts,
            world_parts=world_parts,
        )

        fn_interp: Dict[str, FrameMap] = {}
        for name, arity in model.signature.function_symbols:
            old_fm = model.fn_interp_map[name]
            new_power = shell.power(arity)
            mapping = {}
            for lbl in new_power.carrier:
                old_lbl, e = helper.decompose_power_label(arity, lbl)
                mapping[lbl] = pair_label(old_fm(old_lbl), e)
            fn_interp[name] = FrameMap(
                new_power.frame,
                new_total,
                function_from_mapping(new_power.carrier, new_total.carrier, mapping),
            )
        rel_interp: Dict[str, Subset] = {}
        for name, arity in model.signature.relation_symbols:
            old_members = model.rel_interp_map[name].members
            new_power = shell.power(arity)
            if arity == 0:
                members = frozenset(
                    lbl for lbl in new_base.carrier if world_parts[lbl][0] in old_members
                )
                rel_interp[name] = Subset(new_base.carrier, members)
            else:
                chosen = set()
                for lbl in new_power.carrier:
                    old_lbl, _ = helper.decompose_power_label(arity, lbl)
                    if old_lbl in old_members:
                        chosen.add(lbl)
                rel_interp[name] = Subset(new_power.carrier, frozenset(chosen))
        updated = SheafModel(new_sheaf, model.signature, fn_interp, rel_interp)
        updated._powers = shell._powers
        helper.updated = updated
        return helper


def interp_term(
    model: SheafModel,
    term: TermInContext,
) -> FrameMap:
    """Denotation of a term in context: a map from the context's power."""
    return _FOEvaluator().interp_term_map(model, term)


def interp_formula(
    model: SheafModel,
    phi: FormulaInContext,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> Subset:
    """Extension of a formula in context over the context's power carrier."""
    return _FOEvaluator(registry).interp(model, phi.context, phi.body)


def pullback_update(
    model: SheafModel,
    ev: EventModel,
    registry: Optional[Mapping[str, EventModel]] = None,
) -> SheafUpdate:
    """Update a sheaf model by an event model with closed preconditions."""
    return _FOEvaluator(registry).build_update(model, ev)


def del_in_context(
    model: SheafModel,
    ev: EventModel,
    event: str,
    phi: FormulaInContext,
    registry: Optional[Mapping[str, EventModel]] = None,
    ref: str = "_update",
) -> Subset:
    """Extension of the event box of a formula, in that formula's context."""
    reg = dict(registry or {})
    reg[ref] = ev
    return interp_formula(model, FormulaInContext(phi.context, DelBox(ref, event, phi.body)), reg)


def _substitution_routes(
    model: SheafModel,
    phi: FormulaInContext,
    terms: Sequence[TermInContext],
    reg: Mapping[str, EventModel],
    wrappers: Sequence[Tuple[str, Formula]],
) -> LawReport:
    """Compare the two routes from a formula to its substitution instance.

    For each wrapped formula, the syntactic substitution instance is
    interpreted directly over the terms' shared context and compared with
    the inverse image, along the tuple-of-terms map, of the unsubstituted
    interpretation over the formula's own context.
    """
    if len(terms) != len(phi.context):
        raise ArityMismatch("one substituting term per context variable required")
    out_context = terms[0].context if terms else ()
    for t in terms:
        if t.context != out_context:
            raise CarrierMismatch("substituting terms must share one context")
    evaluator = _FOEvaluator(reg)
    mapping = dict(zip(phi.context, [t.term for t in terms]))

    out_power = model.power(len(out_context))
    in_power = model.power(len(phi.context))
    value_maps = [evaluator.term_values(model, out_context, t.term) for t in terms]

    def tuple_image(lbl: str) -> str:
        tup = tuple(v[lbl] for v in value_maps)
        return in_power.label_for(out_power.world_of(lbl), tup)

    checks: List[LawCheck] = []
    for name, wrapped in wrappers:
        substituted = substitute(wrapped, mapping)
        direct = evaluator.interp(model, out_context, substituted)
        inner = evaluator.interp(model, phi.context, wrapped)
        pulled = frozenset(
            lbl for lbl in out_power.carrier if tuple_image(lbl) in inner.members
        )
        if direct.members == pulled:
            checks.append(LawCheck(name, True))
        else:
            diff = sorted(direct.members.symmetric_difference(pulled))
            checks.append(LawCheck(name, False, witness=f"routes differ at {diff}"))
    return LawReport(tuple(checks))


def check_substitution_functoriality(
    model: SheafModel,
    phi: FormulaInContext,
    terms: Sequence[TermInContext],
    registry: Optional[Mapping[str, EventModel]] = None,
) -> LawReport:
    """Substituting into a formula equals pulling back its extension.

    The extension of the substitution instance, read over the terms'
    shared context, is the inverse image of the formula's extension along
    the tuple-of-terms map.
    """
    return _substitution_routes(
        model, phi, terms, dict(registry or {}), [("substitution", phi.body)]
    )


def check_substitution_box_commutation(
    model: SheafModel,
    phi: FormulaInContext,
    terms: Sequence[TermInContext],
    ev: Optional[EventModel] = None,
    event: Optional[str] = None,
    registry: Optional[Mapping[str, EventModel]] = None,
    ref: str = "_update",
) -> LawReport:
    """Substituting then applying a modality equals the inverse-image route.

    For each modality (boxes and diamonds per agent, and the event
    operators when an event model is supplied) the syntactic substitution
    instance is interpreted directly and compared with the inverse image,
    along the tuple-of-terms map, of the unsubstituted interpretation.
    """
    reg = dict(registry or {})
    if ev is not None:
        reg[ref] = ev
    wrappers: List[Tuple[str, Formula]] = []
    for a in model.sheaf.base.agents:
        wrappers.append((f"box[{a}]", Box(a, phi.body)))
        wrappers.append((f"dia[{a}]", Dia(a, phi.body)))
    if ev is not None and event is not None:
        wrappers.append((f"event-box[{event}]", DelBox(ref, event, phi.body)))
        wrappers.append((f"event-dia[{event}]", DelDia(ref, event, phi.body)))
    return _substitution_routes(model, phi, terms, reg, wrappers)


def check_transition_commutation(
    upd: SheafUpdate, f: FrameMap, m: int, n: int
) -> LawReport:
    """Transition relations commute with maps between fibered powers.

    For a map between the m-th and n-th powers of the source, following
    the m-th transition of an event and then the updated copy of the map
    is the same relation as following the map and then the n-th
    transition; dually, the n-th transition followed by the dagger of the
    updated copy equals the dagger of the map followed by the m-th
    transition.
    """
    lifted = upd.lift_map(f, m, n)
    lifted_ok = is_monotone(lifted)
    checks: List[LawCheck] = [
        LawCheck(
            "lifted map monotone",
            lifted_ok,
            witness=None if lifted_ok else f"{m}->{n}",
        )
    ]
    for e in upd.events.events:
        forward_lhs = compose(upd.transition(m, e), lifted.fn)
        forward_rhs = compose(f.fn, upd.transition(n, e))
        if forward_lhs == forward_rhs:
            checks.append(LawCheck(f"transition squares with map [{e}]", True))
        else:
            diff = sorted(forward_lhs.pairs.symmetric_difference(forward_rhs.pairs))
            checks.append(
                LawCheck(
                    f"transition squares with map [{e}]",
                    False,
                    witness=f"routes differ at {diff}",
                )
            )
        backward_lhs = compose(upd.transition(n, e), dagger(lifted.fn))
        backward_rhs = compose(dagger(f.fn), upd.transition(m, e))
        if backward_lhs == backward_rhs:
            checks.append(LawCheck(f"transition squares with dagger [{e}]", True))
        else:
            diff = sorted(backward_lhs.pairs.symmetric_difference(backward_rhs.pairs))
            checks.append(
                LawCheck(
                    f"transition squares with dagger [{e}]",
                    False,
                    witness=f"routes differ at {diff}",
                )
            )
    return LawReport(tuple(checks))


def verify_quantifier_reduction(
    model: SheafModel,
    ev: EventModel,
    event: str,
    phi: FormulaInContext,
    registry: Optional[Mapping[str, EventModel]] = None,
    ref: str = "_update",
) -> LawReport:
    """Event box commutes with the universal quantifier (and dia with exists).

    The formula's context must be nonempty; its last variable is the one
    quantified.
    """
    if not phi.context:
        raise InvariantViolation("verify_quantifier_reduction: context must be nonempty")
    reg = dict(registry or {})
    reg[ref] = ev
    evaluator = _FOEvaluator(reg)
    outer = phi.context[:-1]
    y = phi.context[-1]
    checks: List[LawCheck] = []
    for name, quantifier, operator in (
        ("box-forall", Forall, DelBox),
        ("dia-exists", Exists, DelDia),
    ):
        lhs = evaluator.interp(model, outer, operator(ref, event, quantifier(y, phi.body)))
        rhs = evaluator.interp(model, outer, quantifier(y, operator(ref, event, phi.body)))
        if lhs == rhs:
            checks.append(LawCheck(name, True))
        else:
            diff = sorted(lhs.members.symmetric_difference(rhs.members))
            checks.append(LawCheck(name, False, witness=f"sides differ at {diff}"))
    return LawReport(tuple(checks))
