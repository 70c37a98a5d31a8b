"""Formula and term syntax trees.

One node vocabulary serves both layers.  Propositional dynamic formulas use
Atom plus the connectives, modalities and announcement/event operators.
First-order formulas-in-context use Pred applied to terms, quantifiers, the
modalities and the event operators; they never contain Atom or the
announcement forms.  Equality between formulas is structural.

Dynamic event operators carry the *name* of an event model; names are
resolved against a registry at evaluation time, never stored inline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Mapping, Tuple

from .errors import InvariantViolation, VariableCapture


class Formula:
    """Base class for all formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    agent: str
    body: Formula


@dataclass(frozen=True)
class Dia(Formula):
    agent: str
    body: Formula


@dataclass(frozen=True)
class PalBox(Formula):
    """Announcement box: after truthfully announcing the first formula."""

    announcement: Formula
    body: Formula


@dataclass(frozen=True)
class PalDia(Formula):
    announcement: Formula
    body: Formula


@dataclass(frozen=True)
class DelBox(Formula):
    """Event box over a named event model and one of its events."""

    model: str
    event: str
    body: Formula


@dataclass(frozen=True)
class DelDia(Formula):
    model: str
    event: str
    body: Formula


class Term:
    """Base class for term nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Fun(Term):
    name: str
    args: Tuple[Term, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Pred(Formula):
    """A relation symbol applied to terms; 0-ary gives sentence letters."""

    name: str
    args: Tuple[Term, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


PROPOSITIONAL_ONLY = (Atom, PalBox, PalDia)
FIRST_ORDER_ONLY = (Pred, Forall, Exists)


def term_free_vars(t: Term) -> FrozenSet[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Fun):
        out: FrozenSet[str] = frozenset()
        for a in t.args:
            out |= term_free_vars(a)
        return out
    raise InvariantViolation(f"unknown term node {type(t).__name__}")


def free_vars(phi: Formula) -> FrozenSet[str]:
    if isinstance(phi, (Top, Bot, Atom)):
        return frozenset()
    if isinstance(phi, Pred):
        out: FrozenSet[str] = frozenset()
        for t in phi.args:
            out |= term_free_vars(t)
        return out
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or, Imp)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Box, Dia)):
        return free_vars(phi.body)
    if isinstance(phi, (PalBox, PalDia)):
        return free_vars(phi.announcement) | free_vars(phi.body)
    if isinstance(phi, (DelBox, DelDia)):
        return free_vars(phi.body)
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - frozenset([phi.var])
    raise InvariantViolation(f"unknown formula node {type(phi).__name__}")


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Fun):
        return Fun(t.name, tuple(_subst_term(a, mapping) for a in t.args))
    raise InvariantViolation(f"unknown term node {type(t).__name__}")


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Simultaneous substitution of terms for free variables.

    Capture is an error, not silently repaired: if a binder's variable
    occurs free in a substituted term that would land under it, the
    substitution raises VariableCapture.  Renaming is the caller's job.
    """
    if not mapping:
        return phi
    if isinstance(phi, (Top, Bot, Atom)):
        return phi
    if isinstance(phi, Pred):
        return Pred(phi.name, tuple(_subst_term(t, mapping) for t in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, mapping))
    if isinstance(phi, And):
        return And(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, Or):
        return Or(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, Imp):
        return Imp(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, Box):
        return Box(phi.agent, substitute(phi.body, mapping))
    if isinstance(phi, Dia):
        return Dia(phi.agent, substitute(phi.body, mapping))
    if isinstance(phi, PalBox):
        return PalBox(substitute(phi.announcement, mapping), substitute(phi.body, mapping))
    if isinstance(phi, PalDia):
        return PalDia(substitute(phi.announcement, mapping), substitute(phi.body, mapping))
    if isinstance(phi, DelBox):
        return DelBox(phi.model, phi.event, substitute(phi.body, mapping))
    if isinstance(phi, DelDia):
        return DelDia(phi.model, phi.event, substitute(phi.body, mapping))
    if isinstance(phi, (Forall, Exists)):
        inner = {x: t for x, t in mapping.items() if x != phi.var}
        relevant = free_vars(phi.body) - frozenset([phi.var])
        for x, t in inner.items():
            if x in relevant and phi.var in term_free_vars(t):
                raise VariableCapture(
                    f"substituting {x!r} would capture {phi.var!r} under its binder"
                )
        rebuilt = substitute(phi.body, inner)
        return Forall(phi.var, rebuilt) if isinstance(phi, Forall) else Exists(phi.var, rebuilt)
    raise InvariantViolation(f"unknown formula node {type(phi).__name__}")


def _check_context(context: Tuple[str, ...]) -> None:
    if len(set(context)) != len(context):
        raise InvariantViolation("context variables must be distinct")


def _forbid_nodes(phi: Formula, banned, where: str) -> None:
    if isinstance(phi, banned):
        raise InvariantViolation(f"{type(phi).__name__} node not allowed in {where}")
    if isinstance(phi, Not):
        _forbid_nodes(phi.body, banned, where)
    elif isinstance(phi, (And, Or, Imp)):
        _forbid_nodes(phi.left, banned, where)
        _forbid_nodes(phi.right, banned, where)
    elif isinstance(phi, (Box, Dia, DelBox, DelDia, Forall, Exists)):
        _forbid_nodes(phi.body, banned, where)
    elif isinstance(phi, (PalBox, PalDia)):
        _forbid_nodes(phi.announcement, banned, where)
        _forbid_nodes(phi.body, banned, where)


@dataclass(frozen=True)
class TermInContext:
    """A term whose free variables are drawn from an ordered context."""

    context: Tuple[str, ...]
    term: Term

    def __post_init__(self):
        if not isinstance(self.context, tuple):
            object.__setattr__(self, "context", tuple(self.context))
        _check_context(self.context)
        extra = term_free_vars(self.term) - set(self.context)
        if extra:
            raise InvariantViolation(f"term uses variables outside its context: {sorted(extra)}")


@dataclass(frozen=True)
class FormulaInContext:
    """A first-order formula whose free variables are drawn from a context.

    The body may use Pred, quantifiers, Boolean connectives, modalities and
    event operators; sentence letters are 0-ary Pred applications, and the
    announcement operators stay in the propositional layer.
    """

    context: Tuple[str, ...]
    body: Formula

    def __post_init__(self):
        if not isinstance(self.context, tuple):
            object.__setattr__(self, "context", tuple(self.context))
        _check_context(self.context)
        _forbid_nodes(self.body, (Atom, PalBox, PalDia), "a formula in context")
        extra = free_vars(self.body) - set(self.context)
        if extra:
            raise InvariantViolation(
                f"formula uses variables outside its context: {sorted(extra)}"
            )


def as_sentence(phi: Formula) -> FormulaInContext:
    """View a closed formula as a formula in the empty context.

    Bare atoms are folded into 0-ary predicate applications so that
    propositional-looking preconditions work against first-order models.
    """

    def fold(psi: Formula) -> Formula:
        if isinstance(psi, Atom):
            return Pred(psi.name, ())
        if isinstance(psi, Not):
            return Not(fold(psi.body))
        if isinstance(psi, And):
            return And(fold(psi.left), fold(psi.right))
        if isinstance(psi, Or):
            return Or(fold(psi.left), fold(psi.right))
        if isinstance(psi, Imp):
            return Imp(fold(psi.left), fold(psi.right))
        if isinstance(psi, Box):
            return Box(psi.agent, fold(psi.body))
        if isinstance(psi, Dia):
            return Dia(psi.agent, fold(psi.body))
        if isinstance(psi, DelBox):
            return DelBox(psi.model, psi.event, fold(psi.body))
        if isinstance(psi, DelDia):
            return DelDia(psi.model, psi.event, fold(psi.body))
        if isinstance(psi, Forall):
            return Forall(psi.var, fold(psi.body))
        if isinstance(psi, Exists):
            return Exists(psi.var, fold(psi.body))
        return psi
    return FormulaInContext((), fold(phi))
