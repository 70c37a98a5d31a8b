"""Hypothesis strategies for carriers, relations, frames, models, formulas."""

import hypothesis.strategies as st

from delmc import (
    AgentSet,
    And,
    Atom,
    Bot,
    Box,
    Dia,
    FiniteSet,
    Imp,
    KripkeFrame,
    KripkeModel,
    Not,
    Or,
    PalBox,
    PalDia,
    Rel,
    Subset,
    Top,
)


@st.composite
def carriers(draw, min_size=1, max_size=4, prefix="w"):
    n = draw(st.integers(min_value=min_size, max_value=max_size))
    return FiniteSet(f"{prefix}{n}", tuple(f"{prefix}{i + 1}" for i in range(n)))


@st.composite
def relations(draw, dom=None, cod=None):
    d = dom if dom is not None else draw(carriers(prefix="a"))
    c = cod if cod is not None else draw(carriers(prefix="b"))
    cells = [(x, y) for x in d.elements for y in c.elements]
    if cells:
        pairs = draw(st.frozensets(st.sampled_from(cells)))
    else:
        pairs = frozenset()
    return Rel(d, c, frozenset(pairs))


@st.composite
def composable_pairs(draw):
    a = draw(carriers(prefix="a"))
    b = draw(carriers(prefix="b"))
    c = draw(carriers(prefix="c"))
    return draw(relations(a, b)), draw(relations(b, c))


@st.composite
def composable_triples(draw):
    a = draw(carriers(prefix="a"))
    b = draw(carriers(prefix="b"))
    c = draw(carriers(prefix="c"))
    d = draw(carriers(prefix="d"))
    return draw(relations(a, b)), draw(relations(b, c)), draw(relations(c, d))


@st.composite
def modularity_triples(draw):
    a = draw(carriers(prefix="a"))
    b = draw(carriers(prefix="b"))
    c = draw(carriers(prefix="c"))
    return draw(relations(a, b)), draw(relations(b, c)), draw(relations(a, c))


@st.composite
def functions(draw, dom=None, cod=None):
    d = dom if dom is not None else draw(carriers(prefix="a"))
    c = cod if cod is not None else draw(carriers(prefix="b"))
    images = draw(
        st.lists(
            st.sampled_from(c.elements),
            min_size=len(d.elements),
            max_size=len(d.elements),
        )
    )
    return Rel(d, c, frozenset(zip(d.elements, images)))


@st.composite
def subsets(draw, carrier):
    members = draw(st.frozensets(st.sampled_from(carrier.elements))) if len(carrier) else frozenset()
    return Subset(carrier, frozenset(members))


@st.composite
def agent_sets(draw, max_agents=2):
    n = draw(st.integers(min_value=1, max_value=max_agents))
    return AgentSet(tuple("ab"[:n]))


@st.composite
def frames(draw, carrier=None, agents=None):
    c = carrier if carrier is not None else draw(carriers(prefix="w"))
    ags = agents if agents is not None else draw(agent_sets())
    rels = {a: draw(relations(c, c)) for a in ags}
    return KripkeFrame.make(c, ags, rels)


@st.composite
def kripke_models(draw, atoms=("p", "q")):
    frame = draw(frames())
    val = {p: draw(subsets(frame.carrier)) for p in atoms}
    return KripkeModel.make(frame, val)


def static_formulas(atoms=("p", "q"), agents=("a", "b"), max_depth=3):
    leaves = st.one_of(
        st.sampled_from([Atom(p) for p in atoms]),
        st.just(Top()),
        st.just(Bot()),
    )

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.tuples(children, children).map(lambda t: And(*t)),
            st.tuples(children, children).map(lambda t: Or(*t)),
            st.tuples(children, children).map(lambda t: Imp(*t)),
            st.tuples(st.sampled_from(list(agents)), children).map(lambda t: Box(*t)),
            st.tuples(st.sampled_from(list(agents)), children).map(lambda t: Dia(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=2 ** max_depth)


def announcement_formulas(atoms=("p", "q"), agents=("a", "b"), max_depth=3):
    base = static_formulas(atoms, agents, max_depth=2)

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.tuples(children, children).map(lambda t: And(*t)),
            st.tuples(st.sampled_from(list(agents)), children).map(lambda t: Box(*t)),
            st.tuples(base, children).map(lambda t: PalBox(*t)),
            st.tuples(base, children).map(lambda t: PalDia(*t)),
        )

    return st.recursive(base, extend, max_leaves=2 ** max_depth)
