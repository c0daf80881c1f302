"""
Symbolic values used while exploring thread paths.

A value is a plain ``int``, an address-like atom (``Address``, ``Page``,
``Lo12``), a read symbol (``Sym``) or a ``Term`` over those. Constructors
fold whatever they can, so structurally equal operands compare equal
without knowing what was read (``r0 == r0`` is 1, ``r0 ^ r0`` is 0).
"""

from dataclasses import dataclass

from litmus.services.types import IntType

from .exceptions import UnresolvableAddress


@dataclass(frozen=True)
class Address:
    loc: str
    offset: int = 0

    def __str__(self):
        if self.offset:
            return f'{self.loc}{self.offset:+d}'
        return self.loc


@dataclass(frozen=True)
class Page:
    """Result of ADRP: the page holding ``symbol``."""

    symbol: str


@dataclass(frozen=True)
class Lo12:
    symbol: str


@dataclass(frozen=True)
class Sym:
    """Value returned by the read event ``key = (thread, index)``."""

    key: tuple


@dataclass(frozen=True)
class Term:
    op: str
    args: tuple


ATOMS = (int, Address, Page, Lo12)


def is_concrete(value):
    if isinstance(value, ATOMS):
        return True
    if isinstance(value, Term):
        return all(is_concrete(arg) for arg in value.args if not isinstance(arg, bool))
    return False


def truth(value):
    if isinstance(value, int):
        return value != 0
    return True


# ============================================
# FOLDING CONSTRUCTORS
# ============================================

def add(left, right):
    if isinstance(left, int) and isinstance(right, int):
        return left + right
    if isinstance(left, int) and not isinstance(right, int):
        left, right = right, left
    if right == 0 and isinstance(right, int):
        return left
    if isinstance(left, Page) and isinstance(right, Lo12) and left.symbol == right.symbol:
        return Address(right.symbol)
    if isinstance(left, Address) and isinstance(right, int):
        return Address(left.loc, left.offset + right)
    return Term('add', (left, right))


def sub(left, right):
    if left == right:
        return 0
    if isinstance(left, int) and isinstance(right, int):
        return left - right
    if isinstance(right, int) and right == 0:
        return left
    if isinstance(left, Address) and isinstance(right, int):
        return Address(left.loc, left.offset - right)
    return Term('sub', (left, right))


def eor(left, right):
    if left == right:
        return 0
    if isinstance(left, int) and isinstance(right, int):
        return left ^ right
    if isinstance(right, int) and right == 0:
        return left
    if isinstance(left, int) and left == 0:
        return right
    return Term('eor', (left, right))


def eq(left, right):
    if left == right:
        return 1
    if is_concrete(left) and is_concrete(right):
        return 0
    return Term('eq', (left, right))


def ne(left, right):
    folded = eq(left, right)
    if isinstance(folded, int):
        return 1 - folded
    return Term('ne', (left, right))


def wrap(value, int_type):
    """Truncate to ``int_type``; symbolic values keep the truncation pending."""
    if isinstance(value, int):
        return int_type.wrap(value)
    if isinstance(value, (Address, Page, Lo12)):
        return value
    if isinstance(value, Term) and value.op == 'wrap' and value.args[1:] == (int_type.bits, int_type.signed):
        return value
    return Term('wrap', (value, int_type.bits, int_type.signed))


def _wrap_term(value, bits, signed):
    return wrap(value, IntType(bits, signed))


FOLDERS = {
    'add': add,
    'sub': sub,
    'eor': eor,
    'eq': eq,
    'ne': ne,
    'wrap': _wrap_term,
}


def evaluate(value, lookup):
    """Substitute read symbols through ``lookup(key)`` and fold."""
    if isinstance(value, ATOMS):
        return value
    if isinstance(value, Sym):
        return lookup(value.key)
    if isinstance(value, Term):
        args = tuple(evaluate(arg, lookup) for arg in value.args)
        return FOLDERS[value.op](*args)
    raise TypeError(f'not a value: {value!r}')


def symbols_in(value):
    """Read keys a value depends on."""
    if isinstance(value, Sym):
        return {value.key}
    if isinstance(value, Term):
        found = set()
        for arg in value.args:
            if not isinstance(arg, (bool, int)):
                found |= symbols_in(arg)
        return found
    return set()


# ============================================
# ADDRESSES
# ============================================

def stack_base(tid):
    return Address(f'P{tid}:stack')


def resolve_address(value, layout=()):
    """Location addressed by a concrete value, using layout facts for offsets."""
    if isinstance(value, Address):
        if not value.offset:
            return value.loc
        if value.loc.endswith(':stack'):
            return f'{value.loc}{value.offset:+d}'
        for constraint in layout:
            if constraint.base == value.loc and constraint.offset == value.offset:
                return constraint.other
    raise UnresolvableAddress(render_value(value))


def render_value(value):
    """Outcome spelling: integers as-is, addresses by location name."""
    if isinstance(value, int):
        return value
    if isinstance(value, Address):
        return str(value)
    if isinstance(value, Page):
        return f'page({value.symbol})'
    if isinstance(value, Lo12):
        return f':lo12:{value.symbol}'
    if isinstance(value, Term):
        inner = ', '.join(str(render_value(arg)) for arg in value.args)
        return f'{value.op}({inner})'
    if isinstance(value, Sym):
        return f'P{value.key[0]}#{value.key[1]}'
    return value
