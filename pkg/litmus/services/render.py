"""
Render litmus tests back to text; ``parse(render(t)) == t`` for parsed tests.
"""

from . import exprs
from .instructions import CondOp, Imm, Instruction, Label, LabelRef, Mem, RegOp, Stuck, SymOp
from .types import INT, And, Atom, Not, Or, Order, TrueCond


def render_litmus(test):
    lines = [f'{test.dialect.value} {test.name}']
    lines.extend(f'@{key}: {value}' for key, value in test.metadata)
    lines.append(_render_init(test))
    for thread in test.threads:
        if test.is_asm:
            lines.extend(_render_asm_thread(thread))
        else:
            lines.extend(_render_source_thread(test, thread))
    if test.locations:
        keys = ' '.join(f'{_observable_text(test, obs)};' for obs in test.locations)
        lines.append(f'locations [{keys}]')
    lines.append(render_final(test))
    return '\n'.join(lines) + '\n'


def render_final(test):
    final = test.final
    return f'{final.quantifier.value} ({_render_cond(test, final.condition, top=True)})'


def render_outcome_keys(test):
    return [obs.key(test.dialect) for obs in test.observables()]


# ============================================
# INIT
# ============================================

def _render_init(test):
    init = test.init
    items = [f'{tid}:{reg}={value}' for tid, reg, value in init.registers]
    for loc, value in init.values:
        int_type = init.type_of(loc)
        prefix = '' if int_type == INT else f'{int_type.name} '
        items.append(f'{prefix}{loc}={value}' if test.is_asm else f'{prefix}{loc} = {value}')
    items.extend(f'layout({c.base}, {c.other}, {c.offset})' for c in init.layout)
    if not items:
        return '{ }'
    return '{ ' + '; '.join(items) + '; }'


# ============================================
# SOURCE THREADS
# ============================================

def _render_source_thread(test, thread):
    used = []
    for stmt in exprs.walk(thread.body):
        if isinstance(stmt, exprs.MEMORY_STATEMENTS) and stmt.loc not in used:
            used.append(stmt.loc)
    params = ', '.join(f'{_param_type(test, loc)}* {loc}' for loc in used)
    lines = [f'{thread.name} ({params}) {{']
    declared = set()
    lines.extend(_render_body(thread, thread.body, declared, indent=1))
    lines.append('}')
    return lines


def _param_type(test, loc):
    int_type = test.init.type_of(loc)
    return 'atomic_int' if int_type == INT else f'_Atomic({int_type.name})'


def _render_body(thread, body, declared, indent):
    pad = '  ' * indent
    lines = []
    for stmt in body:
        if isinstance(stmt, exprs.If):
            lines.append(f'{pad}if ({render_expr(stmt.cond)}) {{')
            lines.extend(_render_body(thread, stmt.then, declared, indent + 1))
            if stmt.orelse:
                lines.append(f'{pad}}} else {{')
                lines.extend(_render_body(thread, stmt.orelse, declared, indent + 1))
            lines.append(f'{pad}}}')
            continue
        lines.append(pad + _render_statement(thread, stmt, declared))
    return lines


def _render_statement(thread, stmt, declared):
    if isinstance(stmt, exprs.Fence):
        return f'atomic_thread_fence({stmt.order.c_name});'
    if isinstance(stmt, exprs.Store):
        if stmt.order is Order.NA:
            return f'*{stmt.loc} = {render_expr(stmt.expr)};'
        return (f'atomic_store_explicit({stmt.loc}, {render_expr(stmt.expr)}, '
                f'{stmt.order.c_name});')
    if isinstance(stmt, exprs.Load):
        if stmt.order is Order.NA:
            rhs = f'*{stmt.loc}'
        else:
            rhs = f'atomic_load_explicit({stmt.loc}, {stmt.order.c_name})'
        return f'{_define(thread, stmt.reg, declared)} = {rhs};'
    if isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
        call = 'atomic_fetch_add_explicit' if isinstance(stmt, exprs.FetchAdd) \
            else 'atomic_exchange_explicit'
        rhs = f'{call}({stmt.loc}, {render_expr(stmt.expr)}, {stmt.order.c_name})'
        if stmt.reg is None:
            return f'{rhs};'
        return f'{_define(thread, stmt.reg, declared)} = {rhs};'
    if isinstance(stmt, exprs.Assign):
        return f'{_define(thread, stmt.reg, declared)} = {render_expr(stmt.expr)};'
    raise TypeError(f'not a source statement: {stmt!r}')


def _define(thread, reg, declared):
    if reg in declared:
        return reg
    declared.add(reg)
    return f'{thread.register_type(reg).name} {reg}'


def render_expr(expr):
    if isinstance(expr, exprs.Const):
        return str(expr.value)
    if isinstance(expr, exprs.Reg):
        return expr.name
    if isinstance(expr, exprs.Add):
        left = render_expr(expr.left)
        if isinstance(expr.left, exprs.Eq):
            left = f'({left})'
        right = render_expr(expr.right)
        if isinstance(expr.right, (exprs.Add, exprs.Eq)):
            right = f'({right})'
        return f'{left} + {right}'
    if isinstance(expr, exprs.Eq):
        left = render_expr(expr.left)
        right = render_expr(expr.right)
        if isinstance(expr.left, exprs.Eq):
            left = f'({left})'
        if isinstance(expr.right, exprs.Eq):
            right = f'({right})'
        return f'{left} == {right}'
    raise TypeError(f'not an expression: {expr!r}')


# ============================================
# ASM THREADS
# ============================================

def _render_asm_thread(thread):
    header = thread.name
    if thread.aliases:
        header += ' (' + ', '.join(f'{alias}={reg}' for alias, reg in thread.aliases) + ')'
    lines = [header + ' {']
    for item in thread.body:
        lines.append(render_instruction(item))
    lines.append('}')
    return lines


def render_instruction(item):
    if isinstance(item, Label):
        return f'{item.name}:'
    if isinstance(item, Stuck):
        return '  // stuck'
    if not isinstance(item, Instruction):
        raise TypeError(f'not an instruction: {item!r}')
    if not item.operands:
        return f'  {item.op}'
    return f"  {item.op} {','.join(render_operand(op) for op in item.operands)}"


def render_operand(operand):
    if isinstance(operand, RegOp):
        return operand.name
    if isinstance(operand, Imm):
        return f'#{operand.value}'
    if isinstance(operand, SymOp):
        if operand.modifier:
            return f':{operand.modifier}:{operand.symbol}'
        return operand.symbol
    if isinstance(operand, (LabelRef, CondOp)):
        return operand.name
    if isinstance(operand, Mem):
        if operand.symbol:
            return f'[{operand.symbol}]'
        if operand.slot:
            return f'[{operand.base.name},:{operand.modifier}:{operand.slot}]'
        if operand.offset:
            return f'[{operand.base.name},#{operand.offset}]'
        return f'[{operand.base.name}]'
    raise TypeError(f'not an operand: {operand!r}')


# ============================================
# FINAL STATE
# ============================================

def _observable_text(test, observable):
    if observable.is_register and not test.is_asm:
        return f'{observable.thread}:{observable.name}'
    return observable.key(test.dialect)


def _render_cond(test, cond, top=False):
    if isinstance(cond, TrueCond):
        return 'true'
    if isinstance(cond, Atom):
        return f'{_observable_text(test, cond.observable)}={cond.value}'
    if isinstance(cond, Not):
        return f'~{_wrap(test, cond.item)}'
    if isinstance(cond, And):
        return ' /\\ '.join(_wrap(test, item) for item in cond.items)
    if isinstance(cond, Or):
        return ' \\/ '.join(_wrap(test, item) for item in cond.items)
    raise TypeError(f'not a condition: {cond!r}')


def _wrap(test, cond):
    text = _render_cond(test, cond)
    if isinstance(cond, (And, Or)):
        return f'({text})'
    return text
