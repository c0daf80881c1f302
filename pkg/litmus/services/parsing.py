"""
Grammar pieces shared by both dialects: header, metadata, init values,
``locations`` clause and the final predicate.
"""

import re

from .exceptions import LitmusSyntaxError, UndeclaredObservable
from .types import (
    TYPE_KEYWORDS,
    And,
    Atom,
    Dialect,
    FinalPredicate,
    IntType,
    Not,
    Observable,
    Or,
    Quantifier,
    TrueCond,
)

HEADER_RE = re.compile(r'^(C|AArch64|ABS)\s+(\S+)\s*$')
META_RE = re.compile(r'^@([A-Za-z_][\w-]*)\s*:\s*(.*?)\s*$')
ASM_OBSERVABLE_RE = re.compile(r'^P(\d+)_(\w+)$')


def split_header(text):
    """
    Split a litmus file into (dialect, name, metadata, body, body_line).

    ``body_line`` is the number of lines consumed before the body so that
    parse errors keep file line numbers.
    """
    lines = text.split('\n')
    index = 0
    while index < len(lines) and _is_blank(lines[index]):
        index += 1
    if index == len(lines):
        raise LitmusSyntaxError(index + 1, 1, 'a litmus header', 'end of input')
    match = HEADER_RE.match(lines[index].strip())
    if not match:
        raise LitmusSyntaxError(index + 1, 1, "header 'C|AArch64|ABS <name>'",
                                lines[index].strip())
    dialect = Dialect.from_header(match.group(1))
    name = match.group(2)
    index += 1
    metadata = []
    while index < len(lines):
        stripped = lines[index].strip()
        meta = META_RE.match(stripped)
        if meta:
            metadata.append((meta.group(1), meta.group(2)))
        elif not _is_blank(lines[index]):
            break
        index += 1
    body = '\n'.join(lines[index:])
    return dialect, name, tuple(metadata), body, index


def _is_blank(line):
    stripped = line.strip()
    return not stripped or stripped.startswith('//')


def parse_number(stream, what='an integer'):
    token = stream.expect_kind('NUMBER', what)
    return int(token.value, 0)


def parse_type(stream):
    """An optional integer type, bare or as ``_Atomic(T)``; None when absent."""
    token = stream.peek()
    if token.kind != 'IDENT' or token.value not in TYPE_KEYWORDS:
        return None
    stream.next()
    name = token.value
    if name == '_Atomic':
        stream.expect('(')
        name = stream.expect_kind('IDENT', 'an integer type').value
        stream.expect(')')
    try:
        return IntType.parse(name)
    except ValueError:
        raise LitmusSyntaxError(token.line, token.col, 'an integer type', name)


def parse_locations(stream, dialect, resolve):
    """``locations [x; 1:r0;]`` clause; returns a tuple of observables."""
    stream.expect('locations')
    stream.expect('[')
    found = []
    while not stream.at(']'):
        found.append(parse_observable(stream, dialect, resolve))
        if not stream.accept(';'):
            break
    stream.expect(']')
    return tuple(found)


def parse_final(stream, dialect, resolve):
    if stream.accept('~'):
        stream.expect('exists', "'exists' after '~'")
        quantifier = Quantifier.NOT_EXISTS
    elif stream.accept('exists'):
        quantifier = Quantifier.EXISTS
    elif stream.accept('forall'):
        quantifier = Quantifier.FORALL
    else:
        stream.fail("'exists', '~exists' or 'forall'")
    stream.expect('(')
    condition = _parse_disjunction(stream, dialect, resolve)
    stream.expect(')')
    return FinalPredicate(quantifier, condition)


def _parse_disjunction(stream, dialect, resolve):
    items = [_parse_conjunction(stream, dialect, resolve)]
    while stream.at_kind('OR'):
        stream.next()
        items.append(_parse_conjunction(stream, dialect, resolve))
    return items[0] if len(items) == 1 else Or(tuple(items))


def _parse_conjunction(stream, dialect, resolve):
    items = [_parse_unary(stream, dialect, resolve)]
    while stream.at_kind('AND'):
        stream.next()
        items.append(_parse_unary(stream, dialect, resolve))
    return items[0] if len(items) == 1 else And(tuple(items))


def _parse_unary(stream, dialect, resolve):
    if stream.accept('~') or stream.accept('!'):
        return Not(_parse_unary(stream, dialect, resolve))
    if stream.accept('('):
        inner = _parse_disjunction(stream, dialect, resolve)
        stream.expect(')')
        return inner
    if stream.accept('true'):
        return TrueCond()
    observable = parse_observable(stream, dialect, resolve)
    stream.expect('=')
    return Atom(observable, parse_number(stream, 'an integer value'))


def parse_observable(stream, dialect, resolve):
    token = stream.peek()
    if token.kind == 'NUMBER' and stream.at(':', 1):
        stream.next()
        stream.next()
        name = stream.expect_kind('IDENT', 'a register name').value
        return resolve(int(token.value, 0), name)
    if token.kind == 'IDENT':
        stream.next()
        match = ASM_OBSERVABLE_RE.match(token.value)
        if dialect.is_asm and match:
            return resolve(int(match.group(1)), match.group(2))
        return resolve(None, token.value)
    stream.fail('an observable (register or location)')


def location_checker(known_locations):
    """Resolver piece rejecting unknown shared locations."""

    def check(name):
        if name not in known_locations:
            raise UndeclaredObservable(name)
        return Observable.location(name)

    return check
