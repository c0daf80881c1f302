"""
Relation expressions.

Expressions are small immutable trees built with Python operators::

    po | rf          union
    po & loc         intersection
    po - rfi         difference
    seq(a, b, c)     composition a ; b ; c
    r.inv()          inverse
    r.plus()         transitive closure
    r.star()         reflexive-transitive closure
    r.opt()          reflexive closure
    cls('W')         [W], the identity on an event class

Event classes combine the same way (``cls('R') & cls('A')``).
``describe`` renders either kind of tree in cat-like notation.
"""

from dataclasses import dataclass
from functools import reduce


# ============================================
# EVENT CLASSES
# ============================================

class SetExpr:

    def __or__(self, other):
        return SetUnion(self, other)

    def __and__(self, other):
        return SetInter(self, other)

    def __sub__(self, other):
        return SetDiff(self, other)


@dataclass(frozen=True)
class SetName(SetExpr):
    name: str


@dataclass(frozen=True)
class SetUnion(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True)
class SetInter(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True)
class SetDiff(SetExpr):
    left: SetExpr
    right: SetExpr


# ============================================
# RELATIONS
# ============================================

class RelationExpr:

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Inter(self, other)

    def __sub__(self, other):
        return Diff(self, other)

    def inv(self):
        return Inverse(self)

    def plus(self):
        return Plus(self)

    def star(self):
        return Star(self)

    def opt(self):
        return Opt(self)


@dataclass(frozen=True)
class Base(RelationExpr):
    name: str


@dataclass(frozen=True)
class Filter(RelationExpr):
    events: SetExpr


@dataclass(frozen=True)
class Union(RelationExpr):
    left: RelationExpr
    right: RelationExpr


@dataclass(frozen=True)
class Inter(RelationExpr):
    left: RelationExpr
    right: RelationExpr


@dataclass(frozen=True)
class Diff(RelationExpr):
    left: RelationExpr
    right: RelationExpr


@dataclass(frozen=True)
class Seq(RelationExpr):
    left: RelationExpr
    right: RelationExpr


@dataclass(frozen=True)
class Inverse(RelationExpr):
    inner: RelationExpr


@dataclass(frozen=True)
class Plus(RelationExpr):
    inner: RelationExpr


@dataclass(frozen=True)
class Star(RelationExpr):
    inner: RelationExpr


@dataclass(frozen=True)
class Opt(RelationExpr):
    inner: RelationExpr


@dataclass(frozen=True)
class Named(RelationExpr):
    """A sub-expression with a display name (``hb``, ``ob``, ...)."""

    name: str
    inner: RelationExpr


def base(name):
    return Base(name)


def cls(name):
    return Filter(SetName(name))


def on(events):
    return Filter(events)


def seq(*parts):
    return reduce(Seq, parts)


def union(*parts):
    return reduce(Union, parts)


def named(name, inner):
    return Named(name, inner)


# ============================================
# RENDERING
# ============================================

_BINARY = {Union: '|', Inter: '&', Diff: '\\', Seq: ';',
           SetUnion: '|', SetInter: '&', SetDiff: '\\'}
_POSTFIX = {Inverse: '^-1', Plus: '+', Star: '*', Opt: '?'}


def describe(expr, expand=False):
    """
    Cat-like text for an expression.

    Named sub-expressions print as their name unless ``expand`` is set.
    """
    if isinstance(expr, (Base, SetName)):
        return expr.name
    if isinstance(expr, Named):
        return describe(expr.inner, expand) if expand else expr.name
    if isinstance(expr, Filter):
        return f'[{describe(expr.events, expand)}]'
    kind = type(expr)
    if kind in _POSTFIX:
        return f'{_atomic(expr.inner, expand)}{_POSTFIX[kind]}'
    if kind in _BINARY:
        symbol = _BINARY[kind]
        return f'{_atomic(expr.left, expand, symbol)} {symbol} {_atomic(expr.right, expand, symbol)}'
    raise TypeError(f'not a relation expression: {expr!r}')


def _atomic(expr, expand, parent=None):
    while expand and isinstance(expr, Named):
        expr = expr.inner
    text = describe(expr, expand)
    symbol = _BINARY.get(type(expr))
    if symbol is None or (symbol == parent and symbol != '\\'):
        return text
    return f'({text})'
