"""
In-process C11 to AArch64 compiler following the standard mapping.

It stands in for a real toolchain when none is installed and behaves the
way optimising compilers do on litmus code: from ``-O1`` up, registers are
function locals, so a load whose result is never read again is deleted,
false dependencies fold away and a ``fetch_add`` with a dead result is
lowered to ``STADD``, which carries no acquire semantics. ``-O0`` keeps
every access and every dependency.

The output is an ``ObjectUnit`` that ``render_objdump`` prints in the
format of ``objdump -dr --no-show-raw-insn``, so it goes through the same
disassembly reader as toolchain output.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

from litmus.services import exprs
from litmus.services.types import Order

from .exceptions import UnsupportedConstruct
from .l2c import register_plan

logger = logging.getLogger(__name__)

ADDRESS_REGISTER = 8
TEMP_REGISTERS = tuple(range(9, 29))
INSTRUCTION_SIZE = 4

LOAD_MNEMONICS = {(8, False): 'ldrb', (8, True): 'ldrsb', (16, False): 'ldrh', (16, True): 'ldrsh'}
SIZE_SUFFIX = {8: 'b', 16: 'h'}
RMW_SUFFIX = {Order.RLX: '', Order.ACQ: 'a', Order.REL: 'l', Order.ACQ_REL: 'al', Order.SC: 'al'}


@dataclass(frozen=True)
class CompileOptions:
    opt_level: int = 2
    pic: bool = True
    acquire_pc: bool = False

    @property
    def optimizing(self):
        return self.opt_level >= 1

    @classmethod
    def from_profile(cls, profile):
        return cls(
            opt_level=profile.option('opt_level', 2),
            pic=profile.option('pic', True),
            acquire_pc=profile.option('acquire_pc', False),
        )


@dataclass(frozen=True)
class MachineInstr:
    """
    One instruction. ``relocation`` is a (type, symbol) pair applied at
    this instruction; ``target`` names the local label a branch jumps to.
    """

    mnemonic: str
    operands: str = ''
    relocation: Optional[tuple] = None
    target: Optional[str] = None


@dataclass(frozen=True)
class LocalLabel:
    name: str


@dataclass(frozen=True)
class Function:
    name: str
    body: tuple = ()

    def instructions(self):
        return tuple(item for item in self.body if isinstance(item, MachineInstr))


@dataclass(frozen=True)
class ObjectUnit:
    name: str
    functions: tuple
    options: CompileOptions


# ============================================
# FOLDING AND LIVENESS
# ============================================

def fold_expr(expr):
    if isinstance(expr, exprs.Add):
        left, right = fold_expr(expr.left), fold_expr(expr.right)
        if isinstance(left, exprs.Const) and isinstance(right, exprs.Const):
            return exprs.Const(left.value + right.value)
        return exprs.Add(left, right)
    if isinstance(expr, exprs.Eq):
        left, right = fold_expr(expr.left), fold_expr(expr.right)
        if left == right:
            return exprs.Const(1)
        if isinstance(left, exprs.Const) and isinstance(right, exprs.Const):
            return exprs.Const(int(left.value == right.value))
        return exprs.Eq(left, right)
    return expr


def fold_body(body):
    """Constant-fold expressions and replace ifs on constants with the branch taken."""
    folded = []
    for stmt in body:
        if isinstance(stmt, exprs.If):
            cond = fold_expr(stmt.cond)
            then, orelse = fold_body(stmt.then), fold_body(stmt.orelse)
            if isinstance(cond, exprs.Const):
                folded.extend(then if cond.value else orelse)
            else:
                folded.append(exprs.If(cond, then, orelse))
        elif isinstance(stmt, (exprs.Store, exprs.FetchAdd, exprs.Exchange, exprs.Assign)):
            folded.append(replace(stmt, expr=fold_expr(stmt.expr)))
        else:
            folded.append(stmt)
    return tuple(folded)


def live_in(body, live_out):
    """Registers live on entry to ``body``, plus the live-out set of each statement."""
    live = frozenset(live_out)
    outs = []
    for stmt in reversed(body):
        outs.append(live)
        live = _transfer(stmt, live)
    outs.reverse()
    return live, tuple(outs)


def _transfer(stmt, live):
    if isinstance(stmt, exprs.If):
        then_live, _ = live_in(stmt.then, live)
        else_live, _ = live_in(stmt.orelse, live)
        return then_live | else_live | frozenset(exprs.registers_read(stmt.cond))
    if isinstance(stmt, exprs.Load):
        return live - {stmt.reg}
    if isinstance(stmt, exprs.Assign):
        if stmt.reg not in live:
            return live
        return (live - {stmt.reg}) | frozenset(exprs.registers_read(stmt.expr))
    if isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
        return (live - {stmt.reg}) | frozenset(exprs.registers_read(stmt.expr))
    if isinstance(stmt, exprs.Store):
        return live | frozenset(exprs.registers_read(stmt.expr))
    return live


# ============================================
# CODE GENERATION
# ============================================

class _FunctionCompiler:

    def __init__(self, test, thread, options, first_function):
        self.test = test
        self.thread = thread
        self.options = options
        self.first_function = first_function
        self.code = []
        self.labels = 0
        self.free = list(TEMP_REGISTERS)
        self.machine = {name: int(machine[1:]) for tid, name, machine in register_plan(test)
                        if tid == thread.tid}

    def compile(self):
        body = self.thread.body
        if self.options.optimizing:
            body = fold_body(body)
        self._lower_body(body, frozenset())
        self._emit('ret')
        return Function(self.thread.name, tuple(self.code))

    def _fail(self, construct):
        raise UnsupportedConstruct(f'{construct} in {self.thread.name}', self.test.name)

    def _emit(self, mnemonic, operands='', relocation=None, target=None):
        self.code.append(MachineInstr(mnemonic, operands, relocation, target))

    def _label(self):
        self.labels += 1
        return f'.L{self.thread.tid}_{self.labels}'

    # registers

    def _temp(self, bits):
        if not self.free:
            self._fail(f'an expression needing more than {len(TEMP_REGISTERS)} scratch registers')
        return _register(self.free.pop(0), bits)

    def _release_temps(self):
        self.free = list(TEMP_REGISTERS)

    def _immediate(self, value, limit=0xffff):
        if not 0 <= value <= limit:
            self._fail(f'the immediate {value}')
        return f'#0x{value:x}'

    def _source(self, name, bits):
        if name not in self.machine:
            self._fail(f'undeclared register {name}')
        return _register(self.machine[name], bits)

    def _loc_type(self, loc):
        return self.test.init.type_of(loc)

    # expressions

    def _materialize(self, expr, bits, allow_zero=False):
        """Register holding ``expr``."""
        if isinstance(expr, exprs.Const):
            if expr.value == 0 and allow_zero:
                return 'xzr' if bits == 64 else 'wzr'
            temp = self._temp(bits)
            self._emit('mov', f'{temp}, {self._immediate(expr.value)}')
            return temp
        if isinstance(expr, exprs.Reg):
            return self._source(expr.name, bits)
        if isinstance(expr, exprs.Add):
            left = self._materialize(expr.left, bits)
            right = self._operand(expr.right, bits, 0xfff)
            temp = self._temp(bits)
            self._emit('add', f'{temp}, {left}, {right}')
            return temp
        if isinstance(expr, exprs.Eq):
            self._compare(expr, bits)
            temp = self._temp(bits)
            self._emit('cset', f'{temp}, eq')
            return temp
        self._fail(type(expr).__name__)

    def _operand(self, expr, bits, limit):
        if isinstance(expr, exprs.Const) and 0 <= expr.value <= limit:
            return self._immediate(expr.value, limit)
        return self._materialize(expr, bits)

    def _compare(self, expr, bits):
        left = self._materialize(expr.left, bits)
        right = self._operand(expr.right, bits, 0xfff)
        self._emit('cmp', f'{left}, {right}')

    # addresses

    def _address(self, loc, direct_access=None):
        """
        Put the address of ``loc`` in x8; returns the relocation the access
        itself must carry, if any. ``direct_access`` is the access width in
        bits when the access can take a ``:lo12:`` offset.
        """
        base = _register(ADDRESS_REGISTER, 64)
        page = f'{base}, 0 <{self.first_function}>'
        if self.options.pic:
            self._emit('adrp', page, ('R_AARCH64_ADR_GOT_PAGE', loc))
            self._emit('ldr', f'{base}, [{base}]', ('R_AARCH64_LD64_GOT_LO12_NC', loc))
            return None
        self._emit('adrp', page, ('R_AARCH64_ADR_PREL_PG_HI21', loc))
        if direct_access is not None:
            return (f'R_AARCH64_LDST{direct_access}_ABS_LO12_NC', loc)
        self._emit('add', f'{base}, {base}, #0x0', ('R_AARCH64_ADD_ABS_LO12_NC', loc))
        return None

    # statements

    def _lower_body(self, body, live_out):
        if self.options.optimizing:
            _, outs = live_in(body, live_out)
        else:
            outs = (None,) * len(body)
        for stmt, live in zip(body, outs):
            self._lower(stmt, live)
            self._release_temps()

    def _dead(self, reg, live):
        if reg is None:
            return True
        return self.options.optimizing and reg not in live

    def _lower(self, stmt, live):
        if isinstance(stmt, exprs.Load):
            self._load(stmt, live)
        elif isinstance(stmt, exprs.Store):
            self._store(stmt)
        elif isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
            self._rmw(stmt, live)
        elif isinstance(stmt, exprs.Fence):
            self._fence(stmt)
        elif isinstance(stmt, exprs.Assign):
            self._assign(stmt, live)
        elif isinstance(stmt, exprs.If):
            self._branch(stmt, live)
        else:
            self._fail(type(stmt).__name__)

    def _load(self, stmt, live):
        acquire = stmt.order.is_acquire
        if not acquire and self._dead(stmt.reg, live):
            logger.debug('%s: dead load of %s into %s deleted', self.thread.name, stmt.loc, stmt.reg)
            return
        loc_type = self._loc_type(stmt.loc)
        size = loc_type.bits
        dest = self._source(stmt.reg, size)
        if acquire:
            if size < 32 and loc_type.signed:
                self._fail(f'a signed {size}-bit acquire load')
            stem = 'ldapr' if self.options.acquire_pc and stmt.order is Order.ACQ else 'ldar'
            self._address(stmt.loc)
            self._emit(stem + SIZE_SUFFIX.get(size, ''), f'{dest}, [x8]')
            return
        mnemonic = LOAD_MNEMONICS.get((size, loc_type.signed), 'ldr')
        relocation = self._address(stmt.loc, direct_access=size)
        self._emit(mnemonic, f'{dest}, [x8]', relocation)

    def _store(self, stmt):
        if stmt.order is Order.ACQ:
            self._fail('an acquire store')
        size = self._loc_type(stmt.loc).bits
        value = self._materialize(stmt.expr, size, allow_zero=True)
        if stmt.order.is_release:
            self._address(stmt.loc)
            self._emit('stlr' + SIZE_SUFFIX.get(size, ''), f'{value}, [x8]')
            return
        relocation = self._address(stmt.loc, direct_access=size)
        self._emit('str' + SIZE_SUFFIX.get(size, ''), f'{value}, [x8]', relocation)

    def _rmw(self, stmt, live):
        size = self._loc_type(stmt.loc).bits
        if size < 32:
            self._fail(f'a {size}-bit read-modify-write')
        if stmt.order is Order.NA:
            self._fail('a non-atomic read-modify-write')
        value = self._materialize(stmt.expr, size, allow_zero=True)
        suffix = RMW_SUFFIX[stmt.order]
        dead = self._dead(stmt.reg, live)
        is_add = isinstance(stmt, exprs.FetchAdd)
        self._address(stmt.loc)
        if dead and self.options.optimizing:
            if is_add:
                # STADD has no acquire form; only the release half survives.
                self._emit('staddl' if stmt.order.is_release else 'stadd', f'{value}, [x8]')
            else:
                zero = 'xzr' if size == 64 else 'wzr'
                self._emit('swp' + suffix, f'{value}, {zero}, [x8]')
            return
        dest = self._temp(size) if stmt.reg is None else self._source(stmt.reg, size)
        self._emit(('ldadd' if is_add else 'swp') + suffix, f'{value}, {dest}, [x8]')

    def _fence(self, stmt):
        if stmt.order is Order.NA:
            self._fail('a non-atomic fence')
        if stmt.order is Order.RLX:
            return
        self._emit('dmb', 'ishld' if stmt.order is Order.ACQ else 'ish')

    def _assign(self, stmt, live):
        if self._dead(stmt.reg, live):
            return
        bits = self.thread.register_type(stmt.reg).bits
        dest = self._source(stmt.reg, bits)
        if isinstance(stmt.expr, exprs.Const):
            self._emit('mov', f'{dest}, {self._immediate(stmt.expr.value)}')
            return
        value = self._materialize(stmt.expr, bits)
        if value != dest:
            self._emit('mov', f'{dest}, {value}')

    def _branch(self, stmt, live):
        bits = 32
        else_label, end_label = self._label(), self._label()
        skip = else_label if stmt.orelse else end_label
        if isinstance(stmt.cond, exprs.Eq):
            self._compare(stmt.cond, bits)
            self._emit('b.ne', target=skip)
        else:
            value = self._materialize(stmt.cond, bits)
            self._emit('cbz', f'{value}, ', target=skip)
        self._release_temps()
        self._lower_body(stmt.then, live)
        if stmt.orelse:
            self._emit('b', target=end_label)
            self.code.append(LocalLabel(else_label))
            self._lower_body(stmt.orelse, live)
        self.code.append(LocalLabel(end_label))


def _register(number, bits):
    return f'{"x" if bits == 64 else "w"}{number}'


def compile_mapping(test, options=None):
    """Compile a source test; every thread becomes one function."""
    if test.is_asm:
        raise UnsupportedConstruct('an asm-dialect test', test.name)
    options = options or CompileOptions()
    if not test.threads:
        raise UnsupportedConstruct('a test without threads', test.name)
    first = test.threads[0].name
    functions = tuple(_FunctionCompiler(test, thread, options, first).compile() for thread in test.threads)
    logger.debug('Compiled %s at -O%d%s: %d instruction(s)', test.name, options.opt_level,
                 '' if options.pic else ' -fno-pic',
                 sum(len(function.instructions()) for function in functions))
    return ObjectUnit(test.name, functions, options)


# ============================================
# OBJDUMP RENDERING
# ============================================

def render_objdump(unit, filename='unit.o'):
    """Text ``objdump -dr --no-show-raw-insn`` would print for ``unit``."""
    lines = ['', f'{filename}:     file format elf64-littleaarch64', '', '',
             'Disassembly of section .text:']
    address = 0
    for function in unit.functions:
        start = address
        labels = {}
        for item in function.body:
            if isinstance(item, LocalLabel):
                labels[item.name] = address
            else:
                address += INSTRUCTION_SIZE
        lines += ['', f'{start:016x} <{function.name}>:']
        offset = start
        for item in function.body:
            if isinstance(item, LocalLabel):
                continue
            operands = item.operands
            if item.target is not None:
                destination = labels[item.target]
                where = function.name if destination == start else f'{function.name}+0x{destination - start:x}'
                operands = f'{operands}{destination:x} <{where}>'
            text = f'{offset:>4x}:\t{item.mnemonic}'
            lines.append(f'{text}\t{operands}' if operands else text)
            if item.relocation is not None:
                kind, symbol = item.relocation
                lines.append(f'\t\t\t{offset:x}: {kind}\t{symbol}')
            offset += INSTRUCTION_SIZE
    return '\n'.join(lines) + '\n'
