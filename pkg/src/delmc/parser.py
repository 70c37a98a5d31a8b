"""Concrete syntax for formulas: a tokenizer, a parser, and a printer.

Two entry modes share one grammar.  Plain mode reads a propositional
modal formula whose leaves are atoms; context mode is selected by a
leading ``ctx x, y |`` header and reads a first-order formula whose
leaves are predicates applied to terms, returning it packaged with its
context.  Implication binds loosest and associates right, then
disjunction, then conjunction; negation, the modalities and the
quantifiers bind tightest, with a quantifier's scope extending as far
right as possible.

    ~p & q -> [a]r          ((~p) & q) -> [a]r
    [!p][a]q                announcement of p, then [a]q
    [E,e]p                  event box for event e of model E
    ctx x | forall y. R(x, y) -> P(f(x))

The printer emits the minimal parenthesisation that reads back to the
same tree, so parsing a printed formula is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple, Union

from .errors import ParseError
from .formulas import (
    And,
    Atom,
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
    PalBox,
    PalDia,
    Pred,
    Term,
    Top,
    Var,
)

_KEYWORDS = ("true", "false", "forall", "exists", "ctx")
_SYMBOLS = {
    "->": "ARROW",
    "~": "TILDE",
    "&": "AMP",
    "|": "BAR",
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACK",
    "]": "RBRACK",
    "<": "LANGLE",
    ">": "RANGLE",
    ",": "COMMA",
    ".": "DOT",
    "!": "BANG",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    out: List[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word.upper() if word in _KEYWORDS else "IDENT"
            out.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if text.startswith("->", i):
            out.append(_Token("ARROW", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            out.append(_Token(_SYMBOLS[ch], ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(
            f"unexpected character {ch!r}", line, col, expected=None, found=ch
        )
    out.append(_Token("EOF", "", line, col))
    return out


class _Parser:
    """Recursive descent over the token list; one instance per parse."""

    def __init__(self, tokens: List[_Token], in_context: bool):
        self.tokens = tokens
        self.pos = 0
        self.in_context = in_context

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        found = tok.text if tok.kind != "EOF" else "end of input"
        return ParseError(
            f"expected {expected}, found {found!r}",
            tok.line,
            tok.column,
            expected=expected,
            found=found,
        )

    def expect(self, kind: str, expected: str) -> _Token:
        if self.peek().kind != kind:
            raise self.fail(expected)
        return self.advance()

    def formula(self) -> Formula:
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "ARROW":
            self.advance()
            return Imp(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek().kind == "BAR":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek().kind == "AMP":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "TILDE":
            self.advance()
            return Not(self.unary())
        if tok.kind == "LBRACK":
            return self.box()
        if tok.kind == "LANGLE":
            return self.diamond()
        if tok.kind in ("FORALL", "EXISTS"):
            return self.quantifier()
        return self.atom()

    def box(self) -> Formula:
        self.advance()
        if self.peek().kind == "BANG":
            if self.in_context:
                raise self.fail("an agent or event pair (announcements are propositional)")
            self.advance()
            sigma = self.formula()
            self.expect("RBRACK", "']'")
            return PalBox(sigma, self.unary())
        name = self.expect("IDENT", "an agent, or an event-model name").text
        if self.peek().kind == "COMMA":
            self.advance()
            event = self.expect("IDENT", "an event name").text
            self.expect("RBRACK", "']'")
            return DelBox(name, event, self.unary())
        self.expect("RBRACK", "']'")
        return Box(name, self.unary())

    def diamond(self) -> Formula:
        self.advance()
        if self.peek().kind == "BANG":
            if self.in_context:
                raise self.fail("an agent or event pair (announcements are propositional)")
            self.advance()
            sigma = self.formula()
            self.expect("RANGLE", "'>'")
            return PalDia(sigma, self.unary())
        name = self.expect("IDENT", "an agent, or an event-model name").text
        if self.peek().kind == "COMMA":
            self.advance()
            event = self.expect("IDENT", "an event name").text
            self.expect("RANGLE", "'>'")
            return DelDia(name, event, self.unary())
        self.expect("RANGLE", "'>'")
        return Dia(name, self.unary())

    def quantifier(self) -> Formula:
        tok = self.advance()
        if not self.in_context:
            raise ParseError(
                "quantifiers need a context header such as 'ctx x |'",
                tok.line,
                tok.column,
                expected="a propositional formula",
                found=tok.text,
            )
        var = self.expect("IDENT", "a variable name").text
        self.expect("DOT", "'.'")
        body = self.formula()
        return Forall(var, body) if tok.kind == "FORALL" else Exists(var, body)

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "TRUE":
            self.advance()
            return Top()
        if tok.kind == "FALSE":
            self.advance()
            return Bot()
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.formula()
            self.expect("RPAREN", "')'")
            return inner
        if tok.kind == "IDENT":
            name = self.advance().text
            if self.peek().kind == "LPAREN":
                if not self.in_context:
                    raise ParseError(
                        "predicates need a context header such as 'ctx x |'",
                        tok.line,
                        tok.column,
                        expected="a propositional atom",
                        found=name,
                    )
                self.advance()
                args = self.term_list()
                self.expect("RPAREN", "')'")
                return Pred(name, tuple(args))
            if self.in_context:
                return Pred(name, ())
            return Atom(name)
        raise self.fail("a formula")

    def term_list(self) -> List[Term]:
        if self.peek().kind == "RPAREN":
            return []
        terms = [self.term()]
        while self.peek().kind == "COMMA":
            self.advance()
            terms.append(self.term())
        return terms

    def term(self) -> Term:
        name = self.expect("IDENT", "a term").text
        if self.peek().kind == "LPAREN":
            self.advance()
            args = self.term_list()
            self.expect("RPAREN", "')'")
            return Fun(name, tuple(args))
        return Var(name)


def parse_formula(
    text: str,
    event_models: Optional[Mapping[str, object]] = None,
) -> Union[Formula, FormulaInContext]:
    """Parse a formula, returning it with its context when one is declared.

    With ``event_models`` given, every event operator's model name must be
    one of its keys; without it, names are left to be resolved at
    evaluation time.
    """
    tokens = _tokenize(text)
    if tokens[0].kind == "CTX":
        parser = _Parser(tokens, in_context=True)
        parser.advance()
        names: List[str] = []
        if parser.peek().kind == "IDENT":
            names.append(parser.advance().text)
            while parser.peek().kind == "COMMA":
                parser.advance()
                names.append(parser.expect("IDENT", "a variable name").text)
        parser.expect("BAR", "'|' closing the context header")
        body = parser.formula()
        tok = parser.peek()
        if tok.kind != "EOF":
            raise parser.fail("end of input")
        result: Union[Formula, FormulaInContext] = FormulaInContext(tuple(names), body)
        _check_event_refs(body, event_models, tokens)
        return result
    parser = _Parser(tokens, in_context=False)
    body = parser.formula()
    if parser.peek().kind != "EOF":
        raise parser.fail("end of input")
    _check_event_refs(body, event_models, tokens)
    return body


def _check_event_refs(phi: Formula, event_models, tokens: List[_Token]) -> None:
    if event_models is None:
        return
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, (DelBox, DelDia)) and node.model not in event_models:
            tok = next(
                (t for t in tokens if t.kind == "IDENT" and t.text == node.model),
                tokens[-1],
            )
            raise ParseError(
                f"unknown event model {node.model!r}",
                tok.line,
                tok.column,
                expected="one of " + ", ".join(sorted(event_models)),
                found=node.model,
            )
        for field in ("body", "left", "right", "announcement"):
            child = getattr(node, field, None)
            if child is not None:
                stack.append(child)


def parse_term(text: str) -> Term:
    """Parse a single term: a variable, or a function symbol application."""
    tokens = _tokenize(text)
    parser = _Parser(tokens, in_context=True)
    t = parser.term()
    if parser.peek().kind != "EOF":
        raise parser.fail("end of input")
    return t


_ATOM_LEVEL = 5
_UNARY_LEVEL = 4


def _print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    return f"{t.name}({', '.join(_print_term(a) for a in t.args)})"


def _render(phi: Formula, level: int, left_of_binary: bool, full: bool) -> Tuple[str, bool]:
    """Return the printed form plus whether it ends in an open quantifier scope."""

    def wrap(text: str, open_end: bool, own_level: int) -> Tuple[str, bool]:
        if full and own_level < _ATOM_LEVEL:
            return f"({text})", False
        if own_level < level or (open_end and left_of_binary):
            return f"({text})", False
        return text, open_end

    if isinstance(phi, Top):
        return "true", False
    if isinstance(phi, Bot):
        return "false", False
    if isinstance(phi, Atom):
        return phi.name, False
    if isinstance(phi, Pred):
        if not phi.args:
            return phi.name, False
        args = ", ".join(_print_term(t) for t in phi.args)
        return f"{phi.name}({args})", False
    if isinstance(phi, Not):
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"~{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, Box):
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"[{phi.agent}]{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, Dia):
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"<{phi.agent}>{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, PalBox):
        sigma, _ = _render(phi.announcement, 0, False, full)
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"[!{sigma}]{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, PalDia):
        sigma, _ = _render(phi.announcement, 0, False, full)
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"<!{sigma}>{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, DelBox):
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"[{phi.model},{phi.event}]{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, DelDia):
        body, open_end = _render(phi.body, _UNARY_LEVEL, False, full)
        return wrap(f"<{phi.model},{phi.event}>{body}", open_end, _UNARY_LEVEL)
    if isinstance(phi, (Forall, Exists)):
        word = "forall" if isinstance(phi, Forall) else "exists"
        body, _ = _render(phi.body, 0, False, full)
        return wrap(f"{word} {phi.var}. {body}", True, _UNARY_LEVEL)
    if isinstance(phi, And):
        lhs, _ = _render(phi.left, 3, True, full)
        rhs, open_end = _render(phi.right, 4, left_of_binary, full)
        return wrap(f"{lhs} & {rhs}", open_end, 3)
    if isinstance(phi, Or):
        lhs, _ = _render(phi.left, 2, True, full)
        rhs, open_end = _render(phi.right, 3, left_of_binary, full)
        return wrap(f"{lhs} | {rhs}", open_end, 2)
    if isinstance(phi, Imp):
        lhs, _ = _render(phi.left, 2, True, full)
        rhs, open_end = _render(phi.right, 1, left_of_binary, full)
        return wrap(f"{lhs} -> {rhs}", open_end, 1)
    raise TypeError(f"cannot print {type(phi).__name__}")


def print_formula(
    phi: Union[Formula, FormulaInContext], full_parens: bool = False
) -> str:
    """Render a formula so that parsing the output returns the same tree.

    ``full_parens`` parenthesises every compound subformula, which is
    noisier but leaves nothing to precedence.
    """
    if isinstance(phi, FormulaInContext):
        body = print_formula(phi.body, full_parens)
        head = f"ctx {', '.join(phi.context)}" if phi.context else "ctx"
        return f"{head} | {body}"
    text, _ = _render(phi, 0, False, full_parens)
    return text
