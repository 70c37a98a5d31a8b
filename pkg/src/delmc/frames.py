"""Multi-agent Kripke frames, their maps, and limit-style constructions.

A frame is a carrier with one accessibility relation per agent.  Maps
between frames are functions on carriers; the monotone ones only preserve
steps forward, the bounded ones reflect them too.  Products, subframes and
pullbacks are all built the same way: fix the carrier, then equip it with
the coarsest relations making the structure maps monotone (the initial
lift).  The one colimit-style operation exposed is the common-knowledge
relation of a group of agents.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import (
    AgentMismatch,
    CarrierMismatch,
    CodomainMismatch,
    EmptyGroup,
    InvariantViolation,
    NotAFunction,
    NotMonotone,
    UnknownAgent,
)
from .powerset import Subset, beck_chevalley_equation
from .rel import (
    FiniteSet,
    Rel,
    apply_function,
    closure_reflexive_transitive,
    compose,
    dagger,
    identity,
    is_function,
    join,
    leq,
    meet,
    pair_label,
    tabulate,
    total,
)


@dataclass(frozen=True)
class AgentSet:
    """Named agents in a fixed order."""

    agents: Tuple[str, ...]

    def __post_init__(self):
        if not isinstance(self.agents, tuple):
            object.__setattr__(self, "agents", tuple(self.agents))
        if len(set(self.agents)) != len(self.agents):
            raise InvariantViolation("duplicate agent name")

    def __iter__(self):
        return iter(self.agents)

    def __len__(self):
        return len(self.agents)

    def __contains__(self, a: object) -> bool:
        return a in self.agents


@dataclass(frozen=True)
class KripkeFrame:
    """A carrier with one accessibility relation per agent."""

    carrier: FiniteSet
    agents: AgentSet
    relations: Tuple[Rel, ...]

    def __post_init__(self):
        if len(self.relations) != len(self.agents):
            raise InvariantViolation("one relation per agent required")
        for r in self.relations:
            if r.dom != self.carrier or r.cod != self.carrier:
                raise InvariantViolation(
                    f"relation carrier {r.dom.name!r}/{r.cod.name!r} does not match frame carrier"
                )

    @staticmethod
    def make(carrier: FiniteSet, agents: AgentSet, rels: Mapping[str, Rel]) -> "KripkeFrame":
        missing = [a for a in agents if a not in rels]
        if missing:
            raise UnknownAgent(f"no relation given for agent {missing[0]!r}")
        return KripkeFrame(carrier, agents, tuple(rels[a] for a in agents))

    def rel(self, agent: str) -> Rel:
        try:
            i = self.agents.agents.index(agent)
        except ValueError:
            raise UnknownAgent(f"agent {agent!r} not in frame over {self.carrier.name!r}") from None
        return self.relations[i]

    @cached_property
    def rel_map(self) -> Dict[str, Rel]:
        return dict(zip(self.agents.agents, self.relations))


@dataclass(frozen=True)
class FrameMap:
    """A function between the carriers of two frames over the same agents.

    Being a frame map imposes nothing beyond functionality; monotonicity
    and boundedness are separate, checkable properties.
    """

    src: KripkeFrame
    dst: KripkeFrame
    fn: Rel

    def __post_init__(self):
        if self.fn.dom != self.src.carrier or self.fn.cod != self.dst.carrier:
            raise CarrierMismatch("frame map carriers do not match its frames")
        if self.src.agents != self.dst.agents:
            raise AgentMismatch("frame map endpoints carry different agent sets")
        if not is_function(self.fn):
            raise NotAFunction("frame map underlying relation is not a function")

    def __call__(self, w: str) -> str:
        return apply_function(self.fn, w)


def frame_map(src: KripkeFrame, dst: KripkeFrame, mapping: Mapping[str, str]) -> FrameMap:
    from .rel import function_from_mapping

    return FrameMap(src, dst, function_from_mapping(src.carrier, dst.carrier, mapping))


def identity_map(f: KripkeFrame) -> FrameMap:
    return FrameMap(f, f, identity(f.carrier))


def is_monotone(m: FrameMap) -> bool:
    """Steps in the source push forward to steps in the target, per agent."""
    return all(
        leq(compose(m.src.rel(a), m.fn), compose(m.fn, m.dst.rel(a)))
        for a in m.src.agents
    )


def is_bounded(m: FrameMap) -> bool:
    """Monotone and step-reflecting: the two composites agree, per agent."""
    return all(
        compose(m.src.rel(a), m.fn) == compose(m.fn, m.dst.rel(a))
        for a in m.src.agents
    )


def _lifted_relation(fn: Rel, target: Rel) -> Rel:
    # dagger(fn) ; target ; fn  read in application order: fn, target, dagger(fn)
    return compose(compose(fn, target), dagger(fn))


def initial_lift(
    targets: Sequence[KripkeFrame],
    fns: Sequence[Rel],
    carrier: Optional[FiniteSet] = None,
    agents: Optional[AgentSet] = None,
) -> KripkeFrame:
    """Coarsest frame on a common domain making every given map monotone.

    Per agent, the relation is the meet over the family of the pullback of
    each target relation along its map.  An empty family needs the carrier
    and agents spelled out and yields the total relation on each agent.
    """
    if len(targets) != len(fns):
        raise InvariantViolation("initial_lift: one function per target frame required")
    if targets:
        base_agents = targets[0].agents
        for t in targets[1:]:
            if t.agents != base_agents:
                raise AgentMismatch("initial_lift: target frames disagree on agents")
        if agents is not None and agents != base_agents:
            raise AgentMismatch("initial_lift: explicit agents disagree with targets")
        agents = base_agents
        dom = fns[0].dom
        for fn, t in zip(fns, targets):
            if fn.dom != dom:
                raise CarrierMismatch("initial_lift: functions do not share a domain")
            if fn.cod != t.carrier:
                raise CarrierMismatch("initial_lift: function codomain is not its target carrier")
            if not is_function(fn):
                raise NotAFunction("initial_lift: family member is not a function")
        if carrier is not None and carrier != dom:
            raise CarrierMismatch("initial_lift: explicit carrier disagrees with functions")
        carrier = dom
    else:
        if carrier is None or agents is None:
            raise InvariantViolation("initial_lift: empty family needs explicit carrier and agents")
    rels = {}
    for a in agents:
        lifted = total(carrier, carrier)
        for fn, t in zip(fns, targets):
            lifted = meet(lifted, _lifted_relation(fn, t.rel(a)))
        rels[a] = lifted
    return KripkeFrame.make(carrier, agents, rels)


def largest_preserved_check(
    lift: KripkeFrame,
    targets: Sequence[KripkeFrame],
    fns: Sequence[Rel],
    candidates: Sequence[Rel],
) -> bool:
    """The lifted relation is the largest one every family member preserves.

    For each candidate relation on the lift carrier and each agent: the
    candidate sits below the lifted relation exactly when every map of the
    family carries it into its target relation.
    """
    for cand in candidates:
        if cand.dom != lift.carrier or cand.cod != lift.carrier:
            raise CarrierMismatch("largest_preserved_check: candidate not on the lift carrier")
        for a in lift.agents:
            below = leq(cand, lift.rel(a))
            preserved = all(
                leq(compose(cand, fn), compose(fn, t.rel(a)))
                for fn, t in zip(fns, targets)
            )
            if below != preserved:
                return False
    return True


def common_knowledge_relation(f: KripkeFrame, group: Sequence[str]) -> Rel:
    """Reflexive-transitive closure of the union of the group's relations."""
    if not group:
        raise EmptyGroup("common_knowledge_relation: empty agent group")
    for a in group:
        if a not in f.agents:
            raise UnknownAgent(f"agent {a!r} not in frame")
    union = f.rel(group[0])
    for a in group[1:]:
        union = join(union, f.rel(a))
    return closure_reflexive_transitive(union)


def product(f1: KripkeFrame, f2: KripkeFrame) -> Tuple[KripkeFrame, FrameMap, FrameMap]:
    """Binary product: pair carrier, componentwise relations via initial lift."""
    if f1.agents != f2.agents:
        raise AgentMismatch("product: frames carry different agent sets")
    labels = tuple(pair_label(w, v) for w in f1.carrier for v in f2.carrier)
    carrier = FiniteSet(f"({f1.carrier.name}x{f2.carrier.name})", labels)
    proj1 = Rel(
        carrier, f1.carrier,
        frozenset((pair_label(w, v), w) for w in f1.carrier for v in f2.carrier),
    )
    proj2 = Rel(
        carrier, f2.carrier,
        frozenset((pair_label(w, v), v) for w in f1.carrier for v in f2.carrier),
    )
    frame = initial_lift([f1, f2], [proj1, proj2])
    return frame, FrameMap(frame, f1, proj1), FrameMap(frame, f2, proj2)


def subframe(f: KripkeFrame, s: Subset, tag: str = "sub") -> Tuple[KripkeFrame, FrameMap]:
    """Full subframe on a subset, with its inclusion.

    The relations are the restrictions, i.e. the initial lift of the
    inclusion, which makes the inclusion a regular mono in the monotone
    category.
    """
    if s.carrier != f.carrier:
        raise CarrierMismatch("subframe: subset carrier is not the frame carrier")
    elems = tuple(w for w in f.carrier if w in s.members)
    carrier = FiniteSet(f"({f.carrier.name}|{tag})", elems)
    incl = Rel(carrier, f.carrier, frozenset((w, w) for w in elems))
    frame = initial_lift([f], [incl])
    return frame, FrameMap(frame, f, incl)


def pullback(f: FrameMap, g: FrameMap) -> Tuple[KripkeFrame, FrameMap, FrameMap]:
    """Pullback of monotone maps f : Y -> X and g : Z -> X.

    Carrier is the fibered product of the two carrier functions, with the
    initial lift of the projections.  The underlying carrier square is an
    honest pullback of sets, so its image equation holds by construction.
    """
    if f.dst != g.dst:
        raise CodomainMismatch("pullback: maps land in different frames")
    if not is_monotone(f) or not is_monotone(g):
        raise NotMonotone("pullback: both maps must be monotone")
    y, z = f.src, g.src
    pairs = [
        (w, v)
        for w in y.carrier
        for v in z.carrier
        if f(w) == g(v)
    ]
    labels = tuple(pair_label(w, v) for w, v in pairs)
    carrier = FiniteSet(
        f"({y.carrier.name}x[{f.dst.carrier.name}]{z.carrier.name})", labels
    )
    proj1 = Rel(carrier, y.carrier, frozenset((pair_label(w, v), w) for w, v in pairs))
    proj2 = Rel(carrier, z.carrier, frozenset((pair_label(w, v), v) for w, v in pairs))
    frame = initial_lift([y, z], [proj1, proj2])
    p = FrameMap(frame, y, proj1)
    q = FrameMap(frame, z, proj2)
    assert beck_chevalley_equation(proj1, proj2, f.fn, g.fn)
    return frame, p, q


def check_pullback_preserves_bounded(f: FrameMap, g: FrameMap) -> bool:
    """With f monotone and g bounded, the pullback of g along f is bounded."""
    _, p, _ = pullback(f, g)
    return is_bounded(p)


def is_bisimulation(f1: KripkeFrame, f2: KripkeFrame, r: Rel) -> bool:
    """A relation between carriers whose tabulation legs are both bounded.

    The tabulation apex is equipped with the initial lift of its two legs;
    the relation is a bisimulation exactly when both legs reflect steps as
    well as preserving them.
    """
    if f1.agents != f2.agents:
        raise AgentMismatch("is_bisimulation: frames carry different agent sets")
    if r.dom != f1.carrier or r.cod != f2.carrier:
        raise CarrierMismatch("is_bisimulation: relation carriers do not match the frames")
    tab = tabulate(r)
    apex_frame = initial_lift([f1, f2], [tab.r1, tab.r2])
    left = FrameMap(apex_frame, f1, tab.r1)
    right = FrameMap(apex_frame, f2, tab.r2)
    return is_bounded(left) and is_bounded(right)
