"""Syntax trees for modal and intuitionistic propositional formulas.

Formulas are immutable dataclass trees.  The diamond is not a node of its
own: ``<>x`` is parsed as ``~[]~x`` and folded back when printed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Iterable, Iterator


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


def _same_tree(a: "Formula", b: "Formula") -> bool:
    # iterative comparison that visits each pair of shared nodes once
    done: set[tuple[int, int]] = set()
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y or (id(x), id(y)) in done:
            continue
        if x.__class__ is not y.__class__ or hash(x) != hash(y):
            return False
        done.add((id(x), id(y)))
        if isinstance(x, Var):
            if x.name != y.name:
                return False
        else:
            stack.extend(zip(children(x), children(y)))
    return True


def _node(cls):
    """Frozen dataclass whose hash is computed once per node.

    Interpolants share subtrees heavily, so a recursive hash recomputed on
    every lookup costs time exponential in the depth of the sharing.
    """
    cls = dataclass(frozen=True)(cls)
    field_hash = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = field_hash(self)
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return NotImplemented if not isinstance(other, Formula) else False
        return _same_tree(self, other)

    names = [f.name for f in fields(cls)]

    def __reduce__(self):
        # rebuild from the fields so a cached hash never crosses processes
        return cls, tuple(getattr(self, n) for n in names)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    cls.__reduce__ = __reduce__
    return cls


@_node
class Var(Formula):
    name: str


@_node
class Bottom(Formula):
    pass


@_node
class Top(Formula):
    pass


@_node
class Not(Formula):
    child: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class Box(Formula):
    child: Formula


BOTTOM = Bottom()
TOP = Top()


def diamond(f: Formula) -> Formula:
    return Not(Box(Not(f)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def _fold(items: list, node) -> Formula:
    # left-nested like the parser for short lists, balanced for long ones
    if len(items) <= 8:
        out = items[0]
        for f in items[1:]:
            out = node(out, f)
        return out
    mid = len(items) // 2
    return node(_fold(items[:mid], node), _fold(items[mid:], node))


def conj(items: Iterable[Formula]) -> Formula:
    """Conjunction of the items; the empty conjunction is ``true``."""
    items = list(items)
    return _fold(items, And) if items else TOP


def disj(items: Iterable[Formula]) -> Formula:
    """Disjunction of the items; the empty disjunction is ``false``."""
    items = list(items)
    return _fold(items, Or) if items else BOTTOM


@dataclass(frozen=True)
class PolaritySet:
    """A pair of variable sets: those allowed positively and negatively."""

    positive: frozenset = frozenset()
    negative: frozenset = frozenset()

    @staticmethod
    def of(positive: Iterable[str] = (), negative: Iterable[str] = ()) -> "PolaritySet":
        return PolaritySet(frozenset(positive), frozenset(negative))

    def dual(self) -> "PolaritySet":
        return PolaritySet(self.negative, self.positive)

    def minus(self, other: "PolaritySet") -> "PolaritySet":
        return PolaritySet(self.positive - other.positive, self.negative - other.negative)

    def union(self, other: "PolaritySet") -> "PolaritySet":
        return PolaritySet(self.positive | other.positive, self.negative | other.negative)

    def intersection(self, other: "PolaritySet") -> "PolaritySet":
        return PolaritySet(self.positive & other.positive, self.negative & other.negative)

    def issubset(self, other: "PolaritySet") -> bool:
        return self.positive <= other.positive and self.negative <= other.negative

    def variables(self) -> frozenset:
        return self.positive | self.negative

    def __str__(self) -> str:
        pos = ",".join(sorted(self.positive))
        neg = ",".join(sorted(self.negative))
        return f"(+{{{pos}}}, -{{{neg}}})"


class ParseError(ValueError):
    """Raised on malformed formula text; ``position`` is a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(<->|->|<>|\[\]|[~&|()]|[a-z][a-z0-9_]*|\S)")
_IDENT = re.compile(r"[a-z][a-z0-9_]*\Z")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(1)
        start = m.start(1)
        if not (_IDENT.match(tok) or tok in ("<->", "->", "<>", "[]", "~", "&", "|", "(", ")")):
            raise ParseError(f"unexpected character {tok!r}", start)
        tokens.append((tok, start))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, modal: bool):
        self.tokens = _tokenize(text)
        self.i = 0
        self.modal = modal

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if expected is not None and tok != expected:
            shown = repr(tok) if tok else "end of input"
            raise ParseError(f"expected {expected!r}, found {shown}", self.pos())
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if self.peek() == "":
            raise ParseError("empty formula", self.pos())
        f = self.iff()
        if self.peek() != "":
            raise ParseError(f"unexpected token {self.peek()!r}", self.pos())
        return f

    def iff(self) -> Formula:
        left = self.implication()
        while self.peek() == "<->":
            self.take()
            right = self.implication()
            left = iff(left, right)
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            child = self.unary()
            return Implies(child, BOTTOM) if not self.modal else Not(child)
        if tok in ("[]", "<>"):
            if not self.modal:
                raise ParseError(f"modal operator {tok!r} in intuitionistic formula", self.pos())
            self.take()
            child = self.unary()
            return Box(child) if tok == "[]" else diamond(child)
        if tok == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        if tok == "false":
            self.take()
            return BOTTOM
        if tok == "true":
            self.take()
            return TOP
        if tok and _IDENT.match(tok):
            self.take()
            return Var(tok)
        shown = repr(tok) if tok else "end of input"
        raise ParseError(f"expected a formula, found {shown}", self.pos())


def parse(text: str) -> Formula:
    """Parse modal formula text into a normalized tree."""
    return _Parser(text, modal=True).parse()


def parse_int(text: str) -> Formula:
    """Parse intuitionistic formula text; ``~x`` becomes ``x -> false``."""
    return _Parser(text, modal=False).parse()


# Binding strength used by the printer; higher binds tighter.
_PREC = {Implies: 1, Or: 2, And: 3}


def render(f: Formula) -> str:
    """Print a formula so that ``parse(render(f)) == f``."""
    return _render(f)


@lru_cache(maxsize=65536)
def _render(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Not):
        inner = f.child
        if isinstance(inner, Box) and isinstance(inner.child, Not):
            return "<>" + _render_unary_arg(inner.child.child)
        return "~" + _render_unary_arg(inner)
    if isinstance(f, Box):
        return "[]" + _render_unary_arg(f.child)
    if isinstance(f, Implies):
        # right associative: parenthesize a left operand that is itself an implication
        left = _render_operand(f.left, 2)
        right = _render_operand(f.right, 1)
        return f"{left} -> {right}"
    if isinstance(f, (And, Or)):
        prec = _PREC[type(f)]
        op = "&" if isinstance(f, And) else "|"
        left = _render_operand(f.left, prec)
        # left associative: a right operand of equal strength needs parentheses
        right = _render_operand(f.right, prec + 1)
        return f"{left} {op} {right}"
    raise TypeError(f"not a formula: {f!r}")


def _render_unary_arg(f: Formula) -> str:
    if isinstance(f, (And, Or, Implies)):
        return "(" + _render(f) + ")"
    return _render(f)


def _render_operand(f: Formula, min_prec: int) -> str:
    prec = _PREC.get(type(f))
    if prec is not None and prec < min_prec:
        return "(" + _render(f) + ")"
    return _render(f)


def render_int(f: Formula) -> str:
    """Print an intuitionistic formula, showing ``x -> false`` as ``~x``."""
    return _render_int(f)


@lru_cache(maxsize=65536)
def _render_int(f: Formula) -> str:
    if isinstance(f, Implies) and isinstance(f.right, Bottom):
        inner = f.left
        text = _render_int(inner)
        if isinstance(inner, (And, Or, Implies)) and not _is_int_negation(inner):
            text = "(" + text + ")"
        return "~" + text
    if isinstance(f, (Var, Bottom, Top)):
        return _render(f)
    if isinstance(f, Implies):
        left = _int_operand(f.left, 2)
        right = _int_operand(f.right, 1)
        return f"{left} -> {right}"
    if isinstance(f, (And, Or)):
        prec = _PREC[type(f)]
        op = "&" if isinstance(f, And) else "|"
        return f"{_int_operand(f.left, prec)} {op} {_int_operand(f.right, prec + 1)}"
    raise TypeError(f"not an intuitionistic formula: {f!r}")


def _is_int_negation(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.right, Bottom)


def _int_operand(f: Formula, min_prec: int) -> str:
    prec = None if _is_int_negation(f) else _PREC.get(type(f))
    if prec is not None and prec < min_prec:
        return "(" + _render_int(f) + ")"
    return _render_int(f)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield every subformula, children before parents, without repeats."""
    seen: set[Formula] = set()
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen.add(node)
            yield node
            continue
        stack.append((node, True))
        for child in children(node):
            if child not in seen:
                stack.append((child, False))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Box)):
        return (f.child,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    return ()


@lru_cache(maxsize=65536)
def variables(f: Formula) -> frozenset:
    if isinstance(f, Var):
        return frozenset((f.name,))
    out: frozenset = frozenset()
    for c in children(f):
        out |= variables(c)
    return out


@lru_cache(maxsize=65536)
def polarities(f: Formula) -> PolaritySet:
    """Positive and negative variable occurrences."""
    if isinstance(f, Var):
        return PolaritySet(frozenset((f.name,)), frozenset())
    if isinstance(f, (Bottom, Top)):
        return PolaritySet()
    if isinstance(f, Not):
        return polarities(f.child).dual()
    if isinstance(f, Box):
        return polarities(f.child)
    if isinstance(f, (And, Or)):
        return polarities(f.left).union(polarities(f.right))
    if isinstance(f, Implies):
        return polarities(f.left).dual().union(polarities(f.right))
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=65536)
def depth(f: Formula) -> int:
    """Maximum nesting of boxes."""
    if isinstance(f, Box):
        return depth(f.child) + 1
    return max((depth(c) for c in children(f)), default=0)


@lru_cache(maxsize=65536)
def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def is_polarity_formula(f: Formula, ps: PolaritySet) -> bool:
    return polarities(f).issubset(ps)


def is_intuitionistic(f: Formula) -> bool:
    return not any(isinstance(g, (Box, Not)) for g in subformulas(f))


def godel_translate(f: Formula) -> Formula:
    """Embed an intuitionistic formula into the modal language."""
    if isinstance(f, Var):
        return Box(f)
    if isinstance(f, (Bottom, Top)):
        return f
    if isinstance(f, And):
        return And(godel_translate(f.left), godel_translate(f.right))
    if isinstance(f, Or):
        return Or(godel_translate(f.left), godel_translate(f.right))
    if isinstance(f, Implies):
        if isinstance(f.right, Bottom):
            return Box(Not(godel_translate(f.left)))
        return Box(Implies(godel_translate(f.left), godel_translate(f.right)))
    raise TypeError(f"not an intuitionistic formula: {f!r}")


def substitute(f: Formula, mapping: dict) -> Formula:
    """Replace variables by formulas."""
    if isinstance(f, Var):
        return mapping.get(f.name, f)
    if isinstance(f, (Bottom, Top)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.child, mapping))
    if isinstance(f, Box):
        return Box(substitute(f.child, mapping))
    return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
