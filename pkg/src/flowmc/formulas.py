"""LTL and Flow-LTL formulas: AST, parser and printer.

Atoms are place or transition names.  Flow-LTL adds ``A phi`` (a *flow
subformula*): phi must hold on every flow chain.  Concrete syntax::

    !  &&  ||  ->  X  U  W  R  G  F  A  true  false  ( )

Precedence from tightest to loosest: unary operators, ``U``/``W``/``R``
(right associative), ``&&``, ``||``, ``->`` (right associative).
Unicode spellings (``¬ ∧ ∨ → ◯ □ ◊``) are accepted as aliases.  Names that
are not plain identifiers are written in double quotes, e.g.
``"s1.fwd(s2)"`` or ``"(s1,s2)"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .errors import NestedFlowError, ParseError, ResolutionError

PLACE = "place"
TRANSITION = "transition"


class Formula:
    """Base class of all formula nodes (immutable, structurally compared)."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    name: str
    kind: str | None = None

    def __repr__(self):
        return f"Atom({self.name!r})" if self.kind is None else f"Atom({self.name!r}, {self.kind!r})"


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def children(self):
        return self.args


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class WeakUntil(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class FlowSub(Formula):
    """``A arg``: arg holds on all flow chains."""

    arg: Formula

    def children(self):
        return (self.arg,)


UNARY = (Not, Next, Always, Eventually, FlowSub)
BINARY = (Until, WeakUntil, Release)
TEMPORAL = (Next, Always, Eventually, Until, WeakUntil, Release)


# -- construction helpers ----------------------------------------------------


def conj(items: Iterable[Formula]) -> Formula:
    items = tuple(items)
    if not items:
        return TRUE
    return items[0] if len(items) == 1 else And(items)


def disj(items: Iterable[Formula]) -> Formula:
    items = tuple(items)
    if not items:
        return FALSE
    return items[0] if len(items) == 1 else Or(items)


def rebuild(f: Formula, children: Iterable[Formula]) -> Formula:
    """Copy of ``f`` with its children replaced."""
    ch = tuple(children)
    if isinstance(f, (And, Or)):
        return type(f)(ch)
    if isinstance(f, UNARY):
        return type(f)(ch[0])
    if isinstance(f, (Implies,) + BINARY):
        return type(f)(ch[0], ch[1])
    return f


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order, left-to-right traversal."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def atoms(f: Formula) -> set[str]:
    return {n.name for n in walk(f) if isinstance(n, Atom)}


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def is_propositional(f: Formula) -> bool:
    return not any(isinstance(n, TEMPORAL + (FlowSub,)) for n in walk(f))


def has_flow(f: Formula) -> bool:
    return any(isinstance(n, FlowSub) for n in walk(f))


def flow_subformulas(f: Formula) -> list[Formula]:
    """The arguments of all ``A`` nodes in document order."""
    return [n.arg for n in walk(f) if isinstance(n, FlowSub)]


def transform(f: Formula, fn: Callable[[Formula, tuple], Formula | None]) -> Formula:
    """Bottom-up rewrite; ``fn(node, new_children)`` returns a replacement or None."""
    # iterative post-order; memoised by identity so shared subtrees are rewritten once
    out: dict[int, Formula] = {}
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if id(node) in out:
            continue
        if not done:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children()) if id(c) not in out)
            continue
        kids = tuple(out[id(c)] for c in node.children())
        new = fn(node, kids)
        out[id(node)] = new if new is not None else (rebuild(node, kids) if kids else node)
    return out[id(f)]


def replace_flow_subformulas(f: Formula, fn: Callable[[int, Formula], Formula]) -> Formula:
    """Replace the i-th ``A`` node (1-based, document order) by ``fn(i, arg)``."""
    order = {id(n): i for i, n in enumerate((n for n in walk(f) if isinstance(n, FlowSub)), start=1)}

    def visit(node):
        if isinstance(node, FlowSub):
            return fn(order[id(node)], node.arg)
        return rebuild(node, (visit(c) for c in node.children())) if node.children() else node

    return visit(f)


def eval_prop(f: Formula, marking, fired) -> bool:
    """Truth of a propositional formula at the letter (marking, fired)."""
    if isinstance(f, Atom):
        if f.kind == PLACE:
            return f.name in marking
        if f.kind == TRANSITION:
            return f.name == fired
        return f.name in marking or f.name == fired
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not eval_prop(f.arg, marking, fired)
    if isinstance(f, And):
        return all(eval_prop(a, marking, fired) for a in f.args)
    if isinstance(f, Or):
        return any(eval_prop(a, marking, fired) for a in f.args)
    if isinstance(f, Implies):
        return not eval_prop(f.left, marking, fired) or eval_prop(f.right, marking, fired)
    raise TypeError(f"not propositional: {render(f)}")


def resolve(f: Formula, places: Iterable[str], transitions: Iterable[str]) -> Formula:
    """Tag every atom as place or transition; unknown atoms are reported together."""
    places = set(places)
    transitions = set(transitions)
    unknown = {a for a in atoms(f) if a not in places and a not in transitions}
    ambiguous = {a for a in atoms(f) if a in places and a in transitions}
    if unknown or ambiguous:
        raise ResolutionError(unknown | ambiguous)

    def tag(node, kids):
        if isinstance(node, Atom):
            return Atom(node.name, PLACE if node.name in places else TRANSITION)
        return None

    return transform(f, tag)


def resolve_for(f: Formula, net) -> Formula:
    return resolve(f, net.places, net.transitions)


# -- lexer -------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.]*")
_KEYWORDS = {
    "X": "X", "U": "U", "W": "W", "R": "R", "G": "G", "F": "F", "A": "A",
    "V": "R", "true": "TRUE", "false": "FALSE",
}
_SYMBOLS = [
    ("->", "IMPL"), ("=>", "IMPL"), ("→", "IMPL"),
    ("&&", "AND"), ("/\\", "AND"), ("&", "AND"), ("∧", "AND"),
    ("||", "OR"), ("\\/", "OR"), ("|", "OR"), ("∨", "OR"),
    ("!", "NOT"), ("~", "NOT"), ("¬", "NOT"),
    ("[]", "G"), ("□", "G"), ("<>", "F"), ("◊", "F"), ("◇", "F"),
    ("◯", "X"), ("○", "X"), ("∀", "A"),
    ("(", "LP"), (")", "RP"),
]


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                if text[j] == "\n":
                    raise ParseError("newline in quoted name", line, col)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated quoted name", line, col)
            if not buf:
                raise ParseError("empty quoted name", line, col)
            toks.append(_Tok("ATOM", "".join(buf), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(_Tok(_KEYWORDS.get(word, "ATOM"), word, line, col))
            col += len(word)
            i = m.end()
            continue
        for sym, kind in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(_Tok(kind, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("EOF", "", line, col))
    return toks


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text):
        self.toks = _lex(text)
        self.pos = 0
        self.flow_depth = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok.kind != kind:
            what = "end of input" if tok.kind == "EOF" else repr(tok.text)
            raise ParseError(f"expected {kind.lower()}, found {what}", tok.line, tok.col)
        self.pos += 1
        return tok

    def parse(self):
        f = self.implication()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek().kind == "IMPL":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        items = [self.conjunction()]
        while self.peek().kind == "OR":
            self.take()
            items.append(self.conjunction())
        return disj(items)

    def conjunction(self):
        items = [self.binary()]
        while self.peek().kind == "AND":
            self.take()
            items.append(self.binary())
        return conj(items)

    def binary(self):
        left = self.unary()
        kind = self.peek().kind
        if kind in ("U", "W", "R"):
            self.take()
            right = self.binary()
            return {"U": Until, "W": WeakUntil, "R": Release}[kind](left, right)
        return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "NOT":
            self.take()
            return Not(self.unary())
        if tok.kind in ("X", "G", "F"):
            self.take()
            return {"X": Next, "G": Always, "F": Eventually}[tok.kind](self.unary())
        if tok.kind == "A":
            self.take()
            if self.flow_depth:
                raise NestedFlowError("flow subformulas cannot be nested", tok.line, tok.col)
            self.flow_depth += 1
            try:
                return FlowSub(self.unary())
            finally:
                self.flow_depth -= 1
        return self.primary()

    def primary(self):
        tok = self.take()
        if tok.kind == "ATOM":
            return Atom(tok.text)
        if tok.kind == "TRUE":
            return TRUE
        if tok.kind == "FALSE":
            return FALSE
        if tok.kind == "LP":
            f = self.implication()
            self.take("RP")
            return f
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(f"expected a formula, found {what}", tok.line, tok.col)


def parse_flow_ltl(text: str) -> Formula:
    return _Parser(text).parse()


def parse_ltl(text: str) -> Formula:
    f = parse_flow_ltl(text)
    if has_flow(f):
        raise ParseError("the A operator is not allowed in an LTL formula")
    return f


# -- printer -----------------------------------------------------------------

_LEVEL_IMPL, _LEVEL_OR, _LEVEL_AND, _LEVEL_BIN, _LEVEL_UNARY, _LEVEL_ATOM = range(6)
_BIN_SYM = {Until: "U", WeakUntil: "W", Release: "R"}
_UN_SYM = {Not: "!", Next: "X", Always: "G", Eventually: "F"}


def _level(f):
    if isinstance(f, Implies):
        return _LEVEL_IMPL
    if isinstance(f, Or):
        return _LEVEL_OR
    if isinstance(f, And):
        return _LEVEL_AND
    if isinstance(f, BINARY):
        return _LEVEL_BIN
    if isinstance(f, UNARY):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def render_name(name: str) -> str:
    if _IDENT.fullmatch(name) and name not in _KEYWORDS:
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render(f: Formula) -> str:
    """Text that parses back to exactly ``f``, with minimal parentheses."""
    parts: list[str] = []
    # explicit stack of pending strings / (formula, min level) items
    stack: list = [(f, _LEVEL_IMPL)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        node, need = item
        if _level(node) < need:
            stack.append(")")
            stack.append((node, _LEVEL_IMPL))
            stack.append("(")
            continue
        seq: list = []
        if isinstance(node, Atom):
            seq = [render_name(node.name)]
        elif isinstance(node, Const):
            seq = ["true" if node.value else "false"]
        elif isinstance(node, Implies):
            seq = [(node.left, _LEVEL_OR), " -> ", (node.right, _LEVEL_IMPL)]
        elif isinstance(node, (And, Or)):
            sep, lvl = (" && ", _LEVEL_BIN) if isinstance(node, And) else (" || ", _LEVEL_AND)
            for k, a in enumerate(node.args):
                if k:
                    seq.append(sep)
                seq.append((a, lvl))
        elif isinstance(node, BINARY):
            seq = [(node.left, _LEVEL_UNARY), f" {_BIN_SYM[type(node)]} ", (node.right, _LEVEL_BIN)]
        elif isinstance(node, FlowSub):
            seq = ["A (", (node.arg, _LEVEL_IMPL), ")"]
        elif isinstance(node, Not):
            seq = ["!", (node.arg, _LEVEL_UNARY)]
        else:
            seq = [_UN_SYM[type(node)] + " ", (node.arg, _LEVEL_UNARY)]
        stack.extend(reversed(seq))
    return "".join(parts)
