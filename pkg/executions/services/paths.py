"""
Per-thread symbolic evaluation.

``thread_paths`` walks one thread body and returns every branch-decision
vector as a ``ThreadPath``: the memory events it issues with read values
left symbolic, the branch constraints it assumed and the final register
file. Dependencies (addr/data/ctrl) are tracked syntactically through
register dataflow, the way hardware models define them.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

from litmus.services import exprs
from litmus.services.instructions import (
    BARRIERS,
    BRANCH_FAMILIES,
    CondOp,
    Imm,
    Instruction,
    Label,
    LabelRef,
    Mem,
    RegOp,
    Stuck,
    SymOp,
    branch_condition,
    reg_key,
    spec_for,
)
from litmus.services.types import INT, IntType

from . import values as V
from .events import EventKind
from .exceptions import SimulationError

logger = logging.getLogger(__name__)

STEP_LIMIT = 100_000


@dataclass(frozen=True)
class SymEvent:
    """
    An event whose value (and possibly address) is still symbolic.

    ``loc`` is None for a dynamic access whose ``address`` depends on a
    read. Dependency sets hold indices of earlier read events of the
    same path.
    """

    index: int
    kind: EventKind
    loc: Optional[str] = None
    address: object = None
    value: object = None
    order: object = None
    tags: frozenset = frozenset()
    origin: tuple = ()
    addr_deps: frozenset = frozenset()
    data_deps: frozenset = frozenset()
    ctrl_deps: frozenset = frozenset()
    partner: Optional[int] = None

    @property
    def is_dynamic(self):
        return self.kind is not EventKind.FENCE and self.loc is None


@dataclass(frozen=True)
class ThreadPath:
    tid: int
    choices: tuple
    events: tuple
    constraints: tuple
    registers: tuple

    def reads(self):
        return [event for event in self.events if event.kind.is_read]

    def writes(self):
        return [event for event in self.events if event.kind.is_write]


@dataclass
class _State:
    tid: int
    registers: dict = field(default_factory=dict)
    taint: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    choices: list = field(default_factory=list)
    ctrl: frozenset = frozenset()
    flags: tuple = (0, 0)
    flags_taint: frozenset = frozenset()

    def fork(self):
        return replace(
            self,
            registers=dict(self.registers),
            taint=dict(self.taint),
            events=list(self.events),
            constraints=list(self.constraints),
            choices=list(self.choices),
        )

    def read(self, key):
        return self.registers.get(key, 0), self.taint.get(key, frozenset())

    def write(self, key, value, taint):
        if key is None:
            return
        self.registers[key] = value
        self.taint[key] = frozenset(taint)

    def emit(self, kind, **fields):
        index = len(self.events)
        event = SymEvent(index=index, kind=kind, ctrl_deps=self.ctrl, **fields)
        self.events.append(event)
        return event

    def branch(self, condition, taken, taint):
        """Assume ``condition`` has truth ``taken``; False when infeasible."""
        self.ctrl = self.ctrl | frozenset(taint)
        if V.is_concrete(condition):
            return V.truth(condition) == taken
        self.constraints.append((condition, taken))
        self.choices.append(taken)
        return True

    def finish(self):
        return ThreadPath(
            tid=self.tid,
            choices=tuple(self.choices),
            events=tuple(self.events),
            constraints=tuple(self.constraints),
            registers=tuple(sorted(self.registers.items())),
        )


def thread_paths(test, thread):
    """Every feasible path of ``thread``; the body must already be unrolled."""
    if test.is_asm:
        paths = list(_AsmExplorer(test, thread).explore())
    else:
        paths = list(_SourceExplorer(test, thread).explore())
    logger.debug('%s of %s has %d path(s)', thread.name, test.name, len(paths))
    return paths


# ============================================
# SOURCE DIALECT
# ============================================

class _SourceExplorer:

    def __init__(self, test, thread):
        self.test = test
        self.thread = thread
        self.positions = {}
        for index, stmt in enumerate(exprs.walk(thread.body)):
            self.positions.setdefault(id(stmt), index)

    def explore(self):
        for state in self._run(self.thread.body, _State(self.thread.tid)):
            yield state.finish()

    def _run(self, body, state):
        if not body:
            yield state
            return
        stmt, rest = body[0], body[1:]
        if isinstance(stmt, exprs.If):
            cond, taint = self._eval(stmt.cond, state)
            for taken in (True, False):
                branch = state.fork()
                if not branch.branch(cond, taken, taint):
                    continue
                for after in self._run(stmt.then if taken else stmt.orelse, branch):
                    yield from self._run(rest, after)
            return
        self._execute(stmt, state, (self.positions[id(stmt)],))
        yield from self._run(rest, state)

    def _eval(self, expr, state):
        if isinstance(expr, exprs.Const):
            return expr.value, frozenset()
        if isinstance(expr, exprs.Reg):
            return state.read(expr.name)
        left, left_taint = self._eval(expr.left, state)
        right, right_taint = self._eval(expr.right, state)
        if isinstance(expr, exprs.Add):
            return V.add(left, right), left_taint | right_taint
        if isinstance(expr, exprs.Eq):
            return V.eq(left, right), left_taint | right_taint
        raise SimulationError(f'unsupported expression {expr!r}')

    def _assign(self, state, reg, value, taint):
        state.write(reg, V.wrap(value, self.thread.register_type(reg)), taint)

    def _execute(self, stmt, state, origin):
        init = self.test.init
        if isinstance(stmt, exprs.Assign):
            value, taint = self._eval(stmt.expr, state)
            self._assign(state, stmt.reg, value, taint)
        elif isinstance(stmt, exprs.Fence):
            state.emit(EventKind.FENCE, order=stmt.order, origin=origin)
        elif isinstance(stmt, exprs.Store):
            value, taint = self._eval(stmt.expr, state)
            state.emit(EventKind.WRITE, loc=stmt.loc, value=V.wrap(value, init.type_of(stmt.loc)),
                       order=stmt.order, origin=origin, data_deps=taint)
        elif isinstance(stmt, exprs.Load):
            event = state.emit(EventKind.READ, loc=stmt.loc, order=stmt.order, origin=origin)
            self._load_into(state, stmt.reg, stmt.loc, event)
        elif isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
            operand, taint = self._eval(stmt.expr, state)
            read = state.emit(EventKind.RMW_READ, loc=stmt.loc, order=stmt.order, origin=origin)
            symbol = V.Sym((self.thread.tid, read.index))
            new = V.add(symbol, operand) if isinstance(stmt, exprs.FetchAdd) else operand
            state.emit(EventKind.RMW_WRITE, loc=stmt.loc, value=V.wrap(new, init.type_of(stmt.loc)),
                       order=stmt.order, origin=origin, partner=read.index,
                       data_deps=taint | {read.index})
            if stmt.reg is not None:
                self._load_into(state, stmt.reg, stmt.loc, read)
        else:
            raise SimulationError(f'unsupported statement {stmt!r}')

    def _load_into(self, state, reg, loc, event):
        symbol = V.Sym((self.thread.tid, event.index))
        reg_type = self.thread.register_type(reg)
        value = symbol if reg_type == self.test.init.type_of(loc) else V.wrap(symbol, reg_type)
        state.write(reg, value, {event.index})

# ============================================
# ASM DIALECT
# ============================================

class _AsmExplorer:

    def __init__(self, test, thread):
        self.test = test
        self.thread = thread
        self.dialect = test.dialect
        self.body = thread.body
        self.labels = {item.name: index for index, item in enumerate(self.body)
                       if isinstance(item, Label)}

    def _initial_state(self):
        state = _State(self.thread.tid)
        for tid, reg, value in self.test.init.registers:
            if tid != self.thread.tid:
                continue
            key = reg_key(reg)
            state.write(key, V.Address(value) if isinstance(value, str) else value, ())
        if 'SP' not in state.registers:
            state.write('SP', V.stack_base(self.thread.tid), ())
        return state

    def explore(self):
        pending = [(0, self._initial_state(), 0)]
        while pending:
            pc, state, steps = pending.pop()
            while True:
                steps += 1
                if steps > STEP_LIMIT:
                    raise SimulationError(f'{self.thread.name} does not terminate; unroll it first')
                if pc >= len(self.body):
                    yield state.finish()
                    break
                item = self.body[pc]
                if isinstance(item, Stuck):
                    break
                if isinstance(item, Label):
                    pc += 1
                    continue
                spec = spec_for(self.dialect, item.op)
                if spec.family == 'ret':
                    yield state.finish()
                    break
                if spec.family in BRANCH_FAMILIES or spec.family == 'cas':
                    forks = self._fork(item, spec, pc, state)
                    if not forks:
                        break
                    pc, state = forks[0]
                    pending.extend((other_pc, other, steps) for other_pc, other in forks[1:])
                    continue
                self._execute(item, spec, state, pc)
                pc += 1

    # -- branching --------------------------------------------------------

    def _target(self, item, pc):
        target = self.labels[item.operands[-1].name]
        if target <= pc:
            raise SimulationError(f'backward branch in {self.thread.name}; unroll it first')
        return target

    def _fork(self, item, spec, pc, state):
        family = spec.family
        if family == 'b':
            return [(self._target(item, pc), state)]
        if family == 'cas':
            return self._cas(item, spec, pc, state)
        if family in ('cbz', 'cbnz'):
            value, taint = self._operand(item.operands[0], state)
            condition = V.eq(value, 0) if family == 'cbz' else V.ne(value, 0)
        else:
            left, right = state.flags
            taint = state.flags_taint
            condition = V.eq(left, right) if branch_condition(item.op) == 'EQ' else V.ne(left, right)
        forks = []
        for taken in (False, True):
            branch = state.fork()
            if branch.branch(condition, taken, taint):
                forks.append((self._target(item, pc) if taken else pc + 1, branch))
        return forks

    def _cas(self, item, spec, pc, state):
        expected_reg, new_reg, mem = item.operands
        expected, expected_taint = self._operand(expected_reg, state)
        new, new_taint = self._operand(new_reg, state)
        forks = []
        for success in (True, False):
            branch = state.fork()
            address, loc, addr_taint = self._address(mem, branch)
            tags = self._acquire_tags(spec, expected_reg)
            read = branch.emit(EventKind.RMW_READ if success else EventKind.READ,
                               loc=loc, address=address, tags=tags, origin=(pc,),
                               addr_deps=addr_taint)
            symbol = V.Sym((self.thread.tid, read.index))
            if not branch.branch(V.eq(symbol, expected), success, expected_taint | {read.index}):
                continue
            if success:
                branch.emit(EventKind.RMW_WRITE, loc=loc, address=address, value=new,
                            tags=frozenset('L') if spec.release else frozenset(), origin=(pc,),
                            partner=read.index, addr_deps=addr_taint, data_deps=new_taint)
            self._set(branch, expected_reg, symbol, {read.index})
            forks.append((pc + 1, branch))
        return forks

    # -- straight-line semantics -----------------------------------------

    def _execute(self, item, spec, state, pc):
        family = spec.family
        ops = item.operands
        origin = (pc,)
        if family == 'load':
            address, loc, addr_taint = self._address(ops[-1], state)
            tags = self._acquire_tags(spec, ops[0])
            event = state.emit(EventKind.READ, loc=loc, address=address, tags=tags,
                               origin=origin, addr_deps=addr_taint)
            self._set(state, ops[0], self._extend(spec, ops[0], V.Sym((self.thread.tid, event.index))),
                      {event.index})
        elif family == 'store':
            value, taint = self._operand(ops[0], state)
            if spec.size:
                value = V.wrap(value, IntType(spec.size, False))
            address, loc, addr_taint = self._address(ops[-1], state)
            state.emit(EventKind.WRITE, loc=loc, address=address, value=value,
                       tags=frozenset('L') if spec.release else frozenset(), origin=origin,
                       addr_deps=addr_taint, data_deps=taint)
        elif family in ('ldadd', 'swp', 'stadd'):
            self._rmw(item, spec, state, origin)
        elif family == 'fence':
            barrier = ops[0].name if ops else 'ISH'
            state.emit(EventKind.FENCE, tags=frozenset({BARRIERS[barrier]}), origin=origin)
        elif family == 'adrp':
            symbol = ops[1]
            page = f'{symbol.symbol}@got' if symbol.modifier == 'got' else symbol.symbol
            self._set(state, ops[0], V.Page(page), ())
        elif family in ('add', 'sub', 'eor', 'subs'):
            left, left_taint = self._operand(ops[1], state)
            right, right_taint = self._operand(ops[2], state)
            fold = {'add': V.add, 'sub': V.sub, 'subs': V.sub, 'eor': V.eor}[family]
            self._set(state, ops[0], fold(left, right), left_taint | right_taint)
            if family == 'subs':
                state.flags = (left, right)
                state.flags_taint = left_taint | right_taint
        elif family == 'cmp':
            left, left_taint = self._operand(ops[0], state)
            right, right_taint = self._operand(ops[1], state)
            state.flags = (left, right)
            state.flags_taint = left_taint | right_taint
        elif family == 'mov':
            value, taint = self._operand(ops[1], state)
            self._set(state, ops[0], value, taint)
        elif family == 'cset':
            left, right = state.flags
            value = V.eq(left, right) if ops[1].name == 'EQ' else V.ne(left, right)
            self._set(state, ops[0], value, state.flags_taint)
        elif family == 'nop':
            pass
        else:
            raise SimulationError(f'cannot execute {item.op} in {self.thread.name}')

    def _rmw(self, item, spec, state, origin):
        ops = item.operands
        source, source_taint = self._operand(ops[0], state)
        destination = ops[1] if spec.family in ('ldadd', 'swp') else None
        address, loc, addr_taint = self._address(ops[-1], state)
        tags = self._acquire_tags(spec, destination)
        read = state.emit(EventKind.RMW_READ, loc=loc, address=address, tags=tags,
                          origin=origin, addr_deps=addr_taint)
        symbol = V.Sym((self.thread.tid, read.index))
        if spec.family == 'swp':
            new, data = source, source_taint
        else:
            new, data = V.add(symbol, source), source_taint | {read.index}
        state.emit(EventKind.RMW_WRITE, loc=loc, address=address, value=new,
                   tags=frozenset('L') if spec.release else frozenset(), origin=origin,
                   partner=read.index, addr_deps=addr_taint, data_deps=data)
        if destination is not None:
            self._set(state, destination, symbol, {read.index})

    @staticmethod
    def _acquire_tags(spec, destination):
        """Acquire tag of a read; results discarded into the zero register drop it."""
        if spec.acquire is None:
            return frozenset()
        if spec.family in ('ldadd', 'swp', 'cas') and (destination is None or destination.is_zero):
            return frozenset()
        return frozenset(spec.acquire)

    @staticmethod
    def _extend(spec, register, symbol):
        if spec.size:
            return V.wrap(symbol, IntType(spec.size, spec.signed))
        if spec.signed:
            return V.wrap(symbol, IntType(32, True))
        return symbol

    def _set(self, state, register, value, taint):
        if register is None or register.is_zero:
            return
        if register.width == 32 and isinstance(value, int):
            value = IntType(32, False).wrap(value)
        state.write(register.key, value, taint)

    def _operand(self, operand, state):
        if isinstance(operand, RegOp):
            if operand.is_zero:
                return 0, frozenset()
            return state.read(operand.key)
        if isinstance(operand, Imm):
            return operand.value, frozenset()
        if isinstance(operand, SymOp):
            if operand.modifier == 'lo12':
                return V.Lo12(operand.symbol), frozenset()
            if operand.modifier == 'got_lo12':
                return V.Lo12(f'{operand.symbol}@got'), frozenset()
            return V.Address(operand.symbol), frozenset()
        if isinstance(operand, (LabelRef, CondOp)):
            raise SimulationError(f'{operand} is not a value operand')
        raise SimulationError(f'unsupported operand {operand!r}')

    def _address(self, mem, state):
        """(address value, static location or None, address dependencies)."""
        if not isinstance(mem, Mem):
            raise SimulationError(f'{mem!r} is not an address operand')
        if mem.symbol:
            return V.Address(mem.symbol), mem.symbol, frozenset()
        base, taint = state.read(mem.base.key)
        if mem.slot:
            name = f'{mem.slot}@got' if mem.modifier == 'got_lo12' else mem.slot
            address = V.add(base, V.Lo12(name))
        else:
            address = V.add(base, mem.offset)
        if V.is_concrete(address):
            return address, V.resolve_address(address, self.test.init.layout), taint
        return address, None, taint


def initial_value(test, loc):
    """Initial content of any location the engine may touch."""
    if loc.endswith('@got'):
        return V.Address(loc[:-len('@got')])
    return test.init.value_of(loc, 0)


def location_type(test, loc):
    if loc.endswith('@got') or ':stack' in loc:
        return IntType(64, False)
    return test.init.type_of(loc) if loc in test.init.locations() else INT
