"""
Parser for source-dialect (C11 atomics) litmus tests.

Layout::

    C MP
    { x = 0; int8_t y = 0; }
    P0 (atomic_int* x, atomic_int* y) {
      atomic_store_explicit(x, 1, memory_order_relaxed);
    }
    exists (1:r0=2 /\\ 1:r1=0)
"""

import re

from . import exprs
from .exceptions import LitmusSyntaxError, UndeclaredObservable
from .parsing import (
    location_checker,
    parse_final,
    parse_locations,
    parse_number,
    parse_type,
    split_header,
)
from .scanner import TokenStream, tokenize
from .types import (
    INT,
    Dialect,
    InitState,
    LayoutConstraint,
    LitmusTest,
    Observable,
    Order,
    Thread,
)

THREAD_RE = re.compile(r'^P(\d+)$')

LOAD_CALLS = ('atomic_load_explicit', 'atomic_load')
STORE_CALLS = ('atomic_store_explicit', 'atomic_store')
FETCH_ADD_CALLS = ('atomic_fetch_add_explicit', 'atomic_fetch_add')
EXCHANGE_CALLS = ('atomic_exchange_explicit', 'atomic_exchange')
FENCE_CALLS = ('atomic_thread_fence',)


def parse_source_litmus(text):
    """
    Parse a source-dialect litmus test.

    Locations used by threads but missing from the init block are added
    with value 0, so the returned test always lists every location.
    """
    dialect, name, metadata, body, offset = split_header(text)
    if dialect is not Dialect.SOURCE:
        raise LitmusSyntaxError(offset, 1, "a 'C' header", dialect.value)
    parser = _SourceParser(TokenStream(tokenize(body, line_offset=offset)))
    return parser.parse(name, metadata)


class _SourceParser:

    def __init__(self, stream):
        self.stream = stream
        self.param_types = {}

    def parse(self, name, metadata):
        stream = self.stream
        values, types, layout = self._parse_init()
        threads = []
        while stream.at_kind('IDENT') and THREAD_RE.match(stream.peek().value):
            threads.append(self._parse_thread(len(threads)))
        if not threads:
            stream.fail('a thread P0')

        known = list(dict.fromkeys(loc for loc, _ in values))
        for thread in threads:
            for loc in _locations_used(thread.body):
                if loc not in known:
                    known.append(loc)
                    values.append((loc, 0))
                    if loc in self.param_types and self.param_types[loc] != INT:
                        types.append((loc, self.param_types[loc]))
        resolve = self._resolver(threads, set(known))

        locations = ()
        if stream.at('locations'):
            locations = parse_locations(stream, Dialect.SOURCE, resolve)
        final = parse_final(stream, Dialect.SOURCE, resolve)
        stream.expect_kind('EOF', 'end of test')
        init = InitState(values=tuple(values), types=tuple(types), layout=tuple(layout))
        return LitmusTest(
            name=name,
            dialect=Dialect.SOURCE,
            init=init,
            threads=tuple(threads),
            final=final,
            locations=locations,
            metadata=metadata,
        )

    # ============================================
    # INIT
    # ============================================

    def _parse_init(self):
        stream = self.stream
        values, types, layout = [], [], []
        stream.expect('{', "'{' opening the init block")
        while not stream.at('}'):
            if stream.accept('layout'):
                stream.expect('(')
                base = stream.expect_kind('IDENT', 'a location').value
                stream.expect(',')
                other = stream.expect_kind('IDENT', 'a location').value
                stream.expect(',')
                layout.append(LayoutConstraint(base, other, parse_number(stream)))
                stream.expect(')')
            else:
                int_type = parse_type(stream)
                loc = stream.expect_kind('IDENT', 'a location').value
                stream.expect('=')
                values.append((loc, parse_number(stream)))
                if int_type is not None and int_type != INT:
                    types.append((loc, int_type))
            if not stream.accept(';'):
                break
        stream.expect('}', "'}' closing the init block")
        return values, types, layout

    # ============================================
    # THREADS
    # ============================================

    def _parse_thread(self, expected_tid):
        stream = self.stream
        token = stream.next()
        tid = int(THREAD_RE.match(token.value).group(1))
        if tid != expected_tid:
            raise LitmusSyntaxError(token.line, token.col, f'P{expected_tid}', token.value)
        stream.expect('(')
        while not stream.at(')'):
            int_type = parse_type(stream)
            stream.accept('volatile')
            stream.accept('*')
            param = stream.expect_kind('IDENT', 'a parameter name').value
            if int_type is not None:
                self.param_types.setdefault(param, int_type)
            if not stream.accept(','):
                break
        stream.expect(')')
        self.registers = {}
        body = self._parse_block()
        return Thread(tid=tid, body=body, registers=tuple(self.registers.items()))

    def _parse_block(self):
        stream = self.stream
        stream.expect('{')
        body = []
        while not stream.at('}'):
            if stream.accept(';'):
                continue
            body.append(self._parse_statement())
        stream.expect('}')
        return tuple(body)

    def _parse_branch(self):
        if self.stream.at('{'):
            return self._parse_block()
        return (self._parse_statement(),)

    def _parse_statement(self):
        stream = self.stream
        token = stream.peek()
        if token.value == 'if':
            stream.next()
            stream.expect('(')
            cond = self._parse_expr()
            stream.expect(')')
            then = self._parse_branch()
            orelse = ()
            if stream.accept('else'):
                orelse = self._parse_branch()
            return exprs.If(cond, then, orelse)
        if token.value in FENCE_CALLS:
            stream.next()
            stream.expect('(')
            order = self._parse_order()
            stream.expect(')')
            stream.expect(';')
            return exprs.Fence(order)
        if token.value in STORE_CALLS:
            stream.next()
            stream.expect('(')
            loc = self._parse_location()
            stream.expect(',')
            expr = self._parse_expr()
            order = Order.SC
            if token.value.endswith('_explicit'):
                stream.expect(',')
                order = self._parse_order()
            stream.expect(')')
            stream.expect(';')
            self._note_reads(expr)
            return exprs.Store(loc, expr, order)
        if token.value in FETCH_ADD_CALLS + EXCHANGE_CALLS:
            statement = self._parse_rmw(None)
            stream.expect(';')
            return statement
        if token.value == '*':
            stream.next()
            loc = stream.expect_kind('IDENT', 'a location').value
            stream.expect('=')
            expr = self._parse_expr()
            stream.expect(';')
            self._note_reads(expr)
            return exprs.Store(loc, expr, Order.NA)

        int_type = parse_type(stream)
        reg_token = stream.expect_kind('IDENT', 'a statement')
        reg = reg_token.value
        stream.expect('=')
        statement = self._parse_definition(reg)
        stream.expect(';')
        self._note_register(reg, int_type)
        return statement

    def _parse_definition(self, reg):
        stream = self.stream
        token = stream.peek()
        if token.value in LOAD_CALLS:
            stream.next()
            stream.expect('(')
            loc = self._parse_location()
            order = Order.SC
            if token.value.endswith('_explicit'):
                stream.expect(',')
                order = self._parse_order()
            stream.expect(')')
            return exprs.Load(reg, loc, order)
        if token.value in FETCH_ADD_CALLS + EXCHANGE_CALLS:
            return self._parse_rmw(reg)
        if token.value == '*' and stream.at_kind('IDENT', 1):
            stream.next()
            loc = stream.next().value
            return exprs.Load(reg, loc, Order.NA)
        expr = self._parse_expr()
        self._note_reads(expr)
        return exprs.Assign(reg, expr)

    def _parse_rmw(self, reg):
        stream = self.stream
        token = stream.next()
        stream.expect('(')
        loc = self._parse_location()
        stream.expect(',')
        expr = self._parse_expr()
        order = Order.SC
        if token.value.endswith('_explicit'):
            stream.expect(',')
            order = self._parse_order()
        stream.expect(')')
        self._note_reads(expr)
        if order is Order.NA:
            raise LitmusSyntaxError(token.line, token.col, 'an atomic memory order', 'NA')
        if token.value in FETCH_ADD_CALLS:
            return exprs.FetchAdd(reg, loc, expr, order)
        return exprs.Exchange(reg, loc, expr, order)

    def _parse_location(self):
        self.stream.accept('&')
        return self.stream.expect_kind('IDENT', 'a location').value

    def _parse_order(self):
        token = self.stream.expect_kind('IDENT', 'a memory_order_* constant')
        try:
            return Order.from_c(token.value)
        except ValueError:
            raise LitmusSyntaxError(token.line, token.col, 'a memory_order_* constant',
                                    token.value)

    # ============================================
    # EXPRESSIONS
    # ============================================

    def _parse_expr(self):
        left = self._parse_sum()
        if self.stream.at_kind('EQEQ'):
            self.stream.next()
            return exprs.Eq(left, self._parse_sum())
        return left

    def _parse_sum(self):
        left = self._parse_atom()
        while self.stream.accept('+'):
            left = exprs.Add(left, self._parse_atom())
        return left

    def _parse_atom(self):
        stream = self.stream
        if stream.accept('('):
            inner = self._parse_expr()
            stream.expect(')')
            return inner
        token = stream.peek()
        if token.kind == 'NUMBER':
            stream.next()
            return exprs.Const(int(token.value, 0))
        if token.kind == 'IDENT':
            stream.next()
            return exprs.Reg(token.value)
        stream.fail('an expression')

    # ============================================
    # REGISTERS AND OBSERVABLES
    # ============================================

    def _note_register(self, reg, int_type):
        if reg not in self.registers or int_type is not None:
            self.registers[reg] = int_type or self.registers.get(reg, INT)

    def _note_reads(self, expr):
        for reg in exprs.registers_read(expr):
            self.registers.setdefault(reg, INT)

    def _resolver(self, threads, known_locations):
        check_location = location_checker(known_locations)
        registers = {thread.tid: set(thread.register_names()) for thread in threads}

        def resolve(tid, name):
            if tid is None:
                return check_location(name)
            if name not in registers.get(tid, ()):
                raise UndeclaredObservable(f'{tid}:{name}')
            return Observable(tid, name)

        return resolve


def _locations_used(body):
    for stmt in exprs.walk(body):
        if isinstance(stmt, exprs.MEMORY_STATEMENTS):
            yield stmt.loc

