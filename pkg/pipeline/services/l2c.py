"""
Litmus-to-C: turn a source litmus test into a compilable translation unit.

Each thread becomes ``void P<i>(void)``; shared locations become ``extern``
globals so the compiler has to address them through relocations the
disassembly reader can map back to names. Atomic accesses use the
``__atomic`` builtins, which GCC and Clang both accept on plain integers.
"""

from dataclasses import dataclass

from litmus.services import exprs
from litmus.services.types import Order

from .exceptions import UnsupportedConstruct

MAX_OBSERVED_REGISTERS = 8

ATOMIC_ORDERS = {
    Order.RLX: '__ATOMIC_RELAXED',
    Order.ACQ: '__ATOMIC_ACQUIRE',
    Order.REL: '__ATOMIC_RELEASE',
    Order.ACQ_REL: '__ATOMIC_ACQ_REL',
    Order.SC: '__ATOMIC_SEQ_CST',
}


@dataclass(frozen=True)
class PreparedSource:
    """A translation unit plus where each source register is expected to live."""

    test: object
    text: str
    register_plan: tuple = ()

    def register_for(self, tid, reg):
        for thread, name, machine in self.register_plan:
            if thread == tid and name == reg:
                return machine
        return None


def register_plan(test):
    """
    (thread, register, machine register) triples: the k-th register of a
    thread lives in ``X<k>``.
    """
    plan = []
    for thread in test.threads:
        names = thread.register_names()
        if len(names) > MAX_OBSERVED_REGISTERS:
            raise UnsupportedConstruct(f'more than {MAX_OBSERVED_REGISTERS} registers in {thread.name}',
                                       test.name)
        plan.extend((thread.tid, name, f'X{index}') for index, name in enumerate(names))
    return tuple(plan)


def prepare_source(test):
    if test.is_asm:
        raise UnsupportedConstruct('an asm-dialect test', test.name)
    if not test.threads:
        raise UnsupportedConstruct('a test without threads', test.name)

    observables = ' '.join(test.observable_keys()) or '(none)'
    lines = [
        f'// litmus: {test.name}',
        f'// threads: {len(test.threads)}',
        f'// observables: {observables}',
    ]
    persisted = test.meta('persisted')
    if persisted:
        lines.append(f'// persisted: {persisted}')
    lines += ['', '#include <stdint.h>', '']
    for loc in test.shared_locations():
        lines.append(f'extern {test.init.type_of(loc).name} {loc};')
    for thread in test.threads:
        lines.append('')
        lines.extend(_render_function(test, thread))
    return PreparedSource(test, '\n'.join(lines) + '\n', register_plan(test))


def _render_function(test, thread):
    lines = [f'void {thread.name}(void)', '{']
    for name, int_type in thread.registers:
        lines.append(f'  {int_type.name} {name} = 0;')
    lines.extend(_render_body(test, thread.body, '  '))
    lines.append('}')
    return lines


def _render_body(test, body, indent):
    lines = []
    for stmt in body:
        if isinstance(stmt, exprs.If):
            lines.append(f'{indent}if ({c_expr(stmt.cond)}) {{')
            lines.extend(_render_body(test, stmt.then, indent + '  '))
            if stmt.orelse:
                lines.append(f'{indent}}} else {{')
                lines.extend(_render_body(test, stmt.orelse, indent + '  '))
            lines.append(f'{indent}}}')
        else:
            lines.append(f'{indent}{_render_statement(test, stmt)};')
    return lines


def _render_statement(test, stmt):
    if isinstance(stmt, exprs.Load):
        if stmt.order is Order.NA:
            return f'{stmt.reg} = {stmt.loc}'
        return f'{stmt.reg} = __atomic_load_n(&{stmt.loc}, {_order(test, stmt.order)})'
    if isinstance(stmt, exprs.Store):
        if stmt.order is Order.NA:
            return f'{stmt.loc} = {c_expr(stmt.expr)}'
        return f'__atomic_store_n(&{stmt.loc}, {c_expr(stmt.expr)}, {_order(test, stmt.order)})'
    if isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
        builtin = '__atomic_fetch_add' if isinstance(stmt, exprs.FetchAdd) else '__atomic_exchange_n'
        call = f'{builtin}(&{stmt.loc}, {c_expr(stmt.expr)}, {_order(test, stmt.order)})'
        return f'{stmt.reg} = {call}' if stmt.reg else f'(void){call}'
    if isinstance(stmt, exprs.Fence):
        return f'__atomic_thread_fence({_order(test, stmt.order)})'
    if isinstance(stmt, exprs.Assign):
        return f'{stmt.reg} = {c_expr(stmt.expr)}'
    raise UnsupportedConstruct(type(stmt).__name__, test.name)


def _order(test, order):
    try:
        return ATOMIC_ORDERS[order]
    except KeyError:
        raise UnsupportedConstruct(f'ordering {order.value} on an atomic builtin', test.name) from None


def c_expr(expr):
    if isinstance(expr, exprs.Const):
        return str(expr.value)
    if isinstance(expr, exprs.Reg):
        return expr.name
    if isinstance(expr, exprs.Add):
        return f'({c_expr(expr.left)} + {c_expr(expr.right)})'
    if isinstance(expr, exprs.Eq):
        return f'({c_expr(expr.left)} == {c_expr(expr.right)})'
    raise UnsupportedConstruct(type(expr).__name__)
