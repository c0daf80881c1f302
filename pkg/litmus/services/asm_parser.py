"""
Parser for assembly-dialect litmus tests (AArch64 subset and abstract ISA).

Layout::

    AArch64 LB
    { 0:X1=x; 0:X3=y; 1:X1=y; 1:X3=x; }
    P0 (r0=X0) {
      LDR W0,[X1]
      MOV W2,#1
      STR W2,[X3]
    }
    exists (P0_r0=1 /\\ P1_r0=1)

One instruction per line (``;`` also separates); ``name:`` defines a label.
"""

import re

from .exceptions import LitmusSyntaxError, UndeclaredObservable, UnknownMnemonic, UnresolvedLabel
from .instructions import (
    BARRIERS,
    BRANCH_FAMILIES,
    CondOp,
    Imm,
    Instruction,
    Label,
    LabelRef,
    Mem,
    RegOp,
    SymOp,
    is_register,
    normalize_register,
    reg_key,
    spec_for,
)
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
    Thread,
)

THREAD_RE = re.compile(r'^P(\d+)$')

ARITY = {
    'load': (2,), 'store': (2,), 'ldadd': (3,), 'swp': (3,), 'cas': (3,),
    'stadd': (2,), 'fence': (0, 1), 'adrp': (2,), 'add': (3,), 'sub': (3,),
    'eor': (3,), 'subs': (3,), 'cmp': (2,), 'mov': (2,), 'cset': (2,),
    'cbz': (2,), 'cbnz': (2,), 'b': (1,), 'bcond': (1,), 'call': (1,),
    'ret': (0, 1), 'nop': (0,),
}


def parse_asm_litmus(text, isa=None):
    """
    Parse an asm-dialect litmus test.

    ``isa`` (``Dialect.AARCH64`` or ``Dialect.ABSTRACT``) must agree with the
    header keyword when given.
    """
    dialect, name, metadata, body, offset = split_header(text)
    if not dialect.is_asm or (isa is not None and Dialect(isa) is not dialect):
        expected = Dialect(isa).value if isa is not None else 'AArch64 or ABS'
        raise LitmusSyntaxError(offset, 1, f'a {expected!r} header', dialect.value)
    parser = _AsmParser(TokenStream(tokenize(body, keep_newlines=True, line_offset=offset)),
                        dialect)
    return parser.parse(name, metadata)


class _AsmParser:

    def __init__(self, stream, dialect):
        self.stream = stream
        self.dialect = dialect

    def parse(self, name, metadata):
        stream = self.stream
        values, types, registers, layout = self._parse_init()
        threads = []
        while stream.at_kind('IDENT') and THREAD_RE.match(stream.peek().value):
            threads.append(self._parse_thread(len(threads)))
        if not threads:
            stream.fail('a thread P0')

        known = list(dict.fromkeys(loc for loc, _ in values))
        referenced = [value for _, _, value in registers if isinstance(value, str)]
        for thread in threads:
            referenced.extend(_symbols_used(thread.body))
        for loc in referenced:
            if loc not in known:
                known.append(loc)
                values.append((loc, 0))
        resolve = self._resolver(threads, set(known))

        locations = ()
        if stream.at('locations'):
            locations = parse_locations(stream, self.dialect, resolve)
        final = parse_final(stream, self.dialect, resolve)
        stream.expect_kind('EOF', 'end of test')
        init = InitState(values=tuple(values), types=tuple(types),
                         registers=tuple(registers), layout=tuple(layout))
        return LitmusTest(
            name=name,
            dialect=self.dialect,
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
        values, types, registers, layout = [], [], [], []
        stream.expect('{', "'{' opening the init block")
        while not stream.at('}'):
            token = stream.peek()
            if token.kind == 'NUMBER' and stream.at(':', 1):
                tid = int(stream.next().value, 0)
                stream.next()
                reg = stream.expect_kind('IDENT', 'a register').value
                if not is_register(reg):
                    raise LitmusSyntaxError(token.line, token.col, 'a register', reg)
                stream.expect('=')
                if stream.at_kind('NUMBER'):
                    value = parse_number(stream)
                else:
                    value = stream.expect_kind('IDENT', 'a location or integer').value
                registers.append((tid, normalize_register(reg), value))
            elif token.value == 'layout':
                stream.next()
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
        return values, types, registers, layout

    # ============================================
    # THREADS
    # ============================================

    def _parse_thread(self, expected_tid):
        stream = self.stream
        token = stream.next()
        tid = int(THREAD_RE.match(token.value).group(1))
        if tid != expected_tid:
            raise LitmusSyntaxError(token.line, token.col, f'P{expected_tid}', token.value)
        aliases = []
        if stream.accept('('):
            while not stream.at(')'):
                alias = stream.expect_kind('IDENT', 'a register alias').value
                stream.expect('=')
                reg_token = stream.expect_kind('IDENT', 'a register')
                if not is_register(reg_token.value):
                    raise LitmusSyntaxError(reg_token.line, reg_token.col, 'a register',
                                            reg_token.value)
                aliases.append((alias, normalize_register(reg_token.value)))
                if not stream.accept(','):
                    break
            stream.expect(')')
        stream.expect('{')
        stream.lines = True
        body = []
        while True:
            stream.skip_newlines()
            if stream.at('}'):
                break
            if stream.accept(';'):
                continue
            body.extend(self._parse_line())
        stream.lines = False
        stream.expect('}')
        body = tuple(body)
        _check_labels(body, tid)
        return Thread(tid=tid, body=body, aliases=tuple(aliases))

    def _parse_line(self):
        stream = self.stream
        items = []
        if stream.at_kind('IDENT') and stream.at(':', 1):
            items.append(Label(stream.next().value))
            stream.next()
            if stream.at_kind('NEWLINE') or stream.at('}') or stream.at(';'):
                return items
        token = stream.expect_kind('IDENT', 'a mnemonic')
        op = token.value.upper()
        spec = spec_for(self.dialect, op)
        if spec is None:
            raise UnknownMnemonic(op, token.line)
        operands = []
        if not self._at_line_end():
            operands.append(self._parse_operand())
            while stream.accept(','):
                operands.append(self._parse_operand())
        if not self._at_line_end():
            stream.fail('end of instruction')
        operands = self._classify(spec, operands, token)
        items.append(Instruction(op, tuple(operands)))
        return items

    def _at_line_end(self):
        stream = self.stream
        return (stream.at_kind('NEWLINE') or stream.at_kind('EOF')
                or stream.at(';') or stream.at('}'))

    def _parse_operand(self):
        stream = self.stream
        token = stream.peek()
        if stream.accept('['):
            return self._parse_memory()
        if stream.accept('#'):
            return Imm(parse_number(stream, 'an immediate'))
        if token.kind == 'NUMBER':
            return Imm(parse_number(stream))
        if stream.accept(':'):
            modifier = stream.expect_kind('IDENT', 'a relocation modifier').value
            stream.expect(':')
            return SymOp(stream.expect_kind('IDENT', 'a symbol').value, modifier)
        name = stream.expect_kind('IDENT', 'an operand').value
        if is_register(name):
            return RegOp(normalize_register(name))
        return SymOp(name)

    def _parse_memory(self):
        stream = self.stream
        token = stream.expect_kind('IDENT', 'a register or location')
        if not is_register(token.value):
            stream.expect(']')
            return Mem(symbol=token.value)
        base = RegOp(normalize_register(token.value))
        mem = Mem(base=base)
        if stream.accept(','):
            if stream.accept('#'):
                mem = Mem(base=base, offset=parse_number(stream, 'an offset'))
            elif stream.accept(':'):
                modifier = stream.expect_kind('IDENT', 'lo12 or got_lo12').value
                if modifier not in ('lo12', 'got_lo12'):
                    raise LitmusSyntaxError(token.line, token.col, 'lo12 or got_lo12', modifier)
                stream.expect(':')
                slot = stream.expect_kind('IDENT', 'a symbol').value
                mem = Mem(base=base, slot=slot, modifier=modifier)
            else:
                stream.fail("'#offset' or ':lo12:symbol'")
        stream.expect(']')
        return mem

    def _classify(self, spec, operands, token):
        family = spec.family
        if len(operands) not in ARITY[family]:
            raise LitmusSyntaxError(token.line, token.col,
                                    f'{ARITY[family][-1]} operand(s) for {token.value}',
                                    len(operands))
        if family in BRANCH_FAMILIES:
            target = operands[-1]
            if not isinstance(target, SymOp) or target.modifier:
                raise LitmusSyntaxError(token.line, token.col, 'a label', target)
            operands[-1] = LabelRef(target.symbol)
        elif family == 'fence' and operands:
            barrier = operands[0]
            name = barrier.symbol.upper() if isinstance(barrier, SymOp) else None
            if name not in BARRIERS:
                raise LitmusSyntaxError(token.line, token.col, 'ISH, ISHLD or ISHST', barrier)
            operands[0] = CondOp(name)
        elif family == 'cset':
            cond = operands[1]
            if not isinstance(cond, SymOp) or cond.symbol.upper() not in ('EQ', 'NE'):
                raise LitmusSyntaxError(token.line, token.col, 'EQ or NE', cond)
            operands[1] = CondOp(cond.symbol.upper())
        elif family in ('load', 'store', 'ldadd', 'swp', 'cas', 'stadd'):
            if not isinstance(operands[-1], Mem):
                raise LitmusSyntaxError(token.line, token.col, 'an address operand', operands[-1])
            if not all(isinstance(op, RegOp) for op in operands[:-1]):
                raise LitmusSyntaxError(token.line, token.col, 'register operands', operands)
        return operands

    # ============================================
    # OBSERVABLES
    # ============================================

    def _resolver(self, threads, known_locations):
        check_location = location_checker(known_locations)
        by_tid = {thread.tid: thread for thread in threads}

        def resolve(tid, name):
            if tid is None:
                return check_location(name)
            thread = by_tid.get(tid)
            label = f'P{tid}_{name}'
            if thread is None:
                raise UndeclaredObservable(label)
            aliases = dict(thread.aliases)
            if name in aliases:
                return Observable(tid, name)
            if is_register(name) and reg_key(name) is not None:
                for alias, target in thread.aliases:
                    if reg_key(target) == reg_key(name):
                        return Observable(tid, alias)
                return Observable(tid, canonical_register_name(self.dialect, name))
            raise UndeclaredObservable(label)

        return resolve


def canonical_register_name(dialect, name):
    """``X<n>`` (AArch64) or ``r<n>`` (abstract ISA) for any register spelling."""
    key = reg_key(name)
    if key == 'SP':
        return 'SP'
    number = key[1:]
    return f'r{number}' if dialect is Dialect.ABSTRACT else f'X{number}'


def _check_labels(body, tid):
    labels = {item.name for item in body if isinstance(item, Label)}
    for item in body:
        if isinstance(item, Instruction):
            for operand in item.operands:
                if isinstance(operand, LabelRef) and operand.name not in labels:
                    if item.op not in ('BL', 'CALL'):
                        raise UnresolvedLabel(operand.name, tid)


def _symbols_used(body):
    for item in body:
        if not isinstance(item, Instruction):
            continue
        for operand in item.operands:
            if isinstance(operand, Mem):
                if operand.symbol:
                    yield operand.symbol
                if operand.slot:
                    yield operand.slot
            elif isinstance(operand, SymOp) and item.op not in ('BL', 'CALL'):
                yield operand.symbol
