"""
Source-dialect statements and expressions.

Expressions are built from constants, register reads, ``+`` and ``==``.
"""

from dataclasses import dataclass
from typing import Optional

from .types import Order


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Eq:
    left: object
    right: object


# ============================================
# STATEMENTS
# ============================================

@dataclass(frozen=True)
class Store:
    loc: str
    expr: object
    order: Order


@dataclass(frozen=True)
class Load:
    reg: str
    loc: str
    order: Order


@dataclass(frozen=True)
class FetchAdd:
    """``reg`` is None when the result is discarded."""

    reg: Optional[str]
    loc: str
    expr: object
    order: Order


@dataclass(frozen=True)
class Exchange:
    reg: Optional[str]
    loc: str
    expr: object
    order: Order


@dataclass(frozen=True)
class Fence:
    order: Order


@dataclass(frozen=True)
class Assign:
    reg: str
    expr: object


@dataclass(frozen=True)
class If:
    cond: object
    then: tuple = ()
    orelse: tuple = ()


MEMORY_STATEMENTS = (Store, Load, FetchAdd, Exchange)


def registers_read(expr):
    """Registers an expression reads, left to right."""
    if isinstance(expr, Reg):
        return (expr.name,)
    if isinstance(expr, (Add, Eq)):
        return registers_read(expr.left) + registers_read(expr.right)
    return ()


def walk(body):
    """Yield every statement of a body, descending into both branches of ifs."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from walk(stmt.then)
            yield from walk(stmt.orelse)


def defined_register(stmt):
    if isinstance(stmt, (Load, Assign)):
        return stmt.reg
    if isinstance(stmt, (FetchAdd, Exchange)):
        return stmt.reg
    return None


def statement_reads(stmt):
    """Registers a single statement reads (not descending into if bodies)."""
    if isinstance(stmt, (Store, FetchAdd, Exchange, Assign)):
        return registers_read(stmt.expr)
    if isinstance(stmt, If):
        return registers_read(stmt.cond)
    return ()


def count_memory_statements(body):
    return sum(1 for stmt in walk(body) if isinstance(stmt, MEMORY_STATEMENTS))
