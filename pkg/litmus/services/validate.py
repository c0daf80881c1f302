"""
Invariant checks over a LitmusTest; problems are returned, never raised.
"""

from collections import Counter
from dataclasses import dataclass

from . import exprs
from .instructions import Instruction, Label, LabelRef, Mem, SymOp, is_register
from .types import Dialect, Order

# ============================================
# DIAGNOSTIC CODES
# ============================================
UNDECLARED_OBSERVABLE = 'UndeclaredObservable'
DUPLICATE_INIT = 'DuplicateInit'
MISSING_INIT = 'MissingInit'
THREAD_NUMBERING = 'ThreadNumbering'
NO_THREADS = 'NoThreads'
CYCLIC_LAYOUT = 'CyclicLayout'
DIALECT_MISMATCH = 'DialectMismatch'
UNRESOLVED_LABEL = 'UnresolvedLabel'
NON_ATOMIC_ORDER = 'NonAtomicOrder'


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f'{self.code}: {self.message}'


def validate_test(test):
    """Return every invariant violation of ``test``; an empty list means valid."""
    diagnostics = []
    diagnostics.extend(_check_threads(test))
    diagnostics.extend(_check_init(test))
    diagnostics.extend(_check_dialect(test))
    diagnostics.extend(_check_observables(test))
    return diagnostics


def _check_threads(test):
    if not test.threads:
        yield Diagnostic(NO_THREADS, test.name, 'a test needs at least one thread')
    for index, thread in enumerate(test.threads):
        if thread.tid != index:
            yield Diagnostic(THREAD_NUMBERING, thread.name,
                             f'thread ids must be P0..P{len(test.threads) - 1}')


def _check_init(test):
    counts = Counter(loc for loc, _ in test.init.values)
    for loc, count in counts.items():
        if count > 1:
            yield Diagnostic(DUPLICATE_INIT, loc, f'{loc} is initialised {count} times')

    declared = set(counts)
    for loc in sorted(_locations_referenced(test) - declared):
        yield Diagnostic(MISSING_INIT, loc, f'{loc} is used but absent from the init block')

    edges = {}
    for constraint in test.init.layout:
        edges.setdefault(constraint.base, set()).add(constraint.other)
    if _has_cycle(edges):
        yield Diagnostic(CYCLIC_LAYOUT, test.name, 'layout constraints form a cycle')


def _check_dialect(test):
    for thread in test.threads:
        for item in _items(thread.body):
            is_instruction = isinstance(item, (Instruction, Label))
            if test.is_asm and not is_instruction:
                yield Diagnostic(DIALECT_MISMATCH, thread.name,
                                 f'{type(item).__name__} in an asm test')
            if not test.is_asm and is_instruction:
                yield Diagnostic(DIALECT_MISMATCH, thread.name,
                                 f'instruction {item} in a source test')
            if isinstance(item, (exprs.FetchAdd, exprs.Exchange, exprs.Fence)) \
                    and item.order is Order.NA:
                yield Diagnostic(NON_ATOMIC_ORDER, thread.name,
                                 f'{type(item).__name__} cannot be non-atomic')
        if test.is_asm:
            labels = {item.name for item in thread.body if isinstance(item, Label)}
            for item in thread.body:
                if isinstance(item, Instruction) and item.op not in ('BL', 'CALL'):
                    for operand in item.operands:
                        if isinstance(operand, LabelRef) and operand.name not in labels:
                            yield Diagnostic(UNRESOLVED_LABEL, thread.name,
                                             f'no label {operand.name} in {thread.name}')


def _check_observables(test):
    locations = set(test.init.locations())
    for observable in test.observables():
        key = observable.key(test.dialect)
        if not observable.is_register:
            if observable.name not in locations:
                yield Diagnostic(UNDECLARED_OBSERVABLE, key, f'unknown location {key}')
            continue
        if observable.thread >= len(test.threads):
            yield Diagnostic(UNDECLARED_OBSERVABLE, key, f'no thread P{observable.thread}')
            continue
        thread = test.threads[observable.thread]
        if test.dialect is Dialect.SOURCE:
            known = thread.register_names()
        else:
            known = [alias for alias, _ in thread.aliases]
        if test.dialect is Dialect.SOURCE and observable.name not in known:
            yield Diagnostic(UNDECLARED_OBSERVABLE, key, f'P{observable.thread} has no {observable.name}')
        elif test.is_asm and observable.name not in known \
                and not is_register(observable.name):
            yield Diagnostic(UNDECLARED_OBSERVABLE, key, f'P{observable.thread} has no {observable.name}')


def _items(body):
    return list(exprs.walk(body))


def _locations_referenced(test):
    found = set()
    for thread in test.threads:
        for item in _items(thread.body):
            if isinstance(item, exprs.MEMORY_STATEMENTS):
                found.add(item.loc)
            elif isinstance(item, Instruction):
                for operand in item.operands:
                    if isinstance(operand, Mem):
                        found.update(filter(None, (operand.symbol, operand.slot)))
                    elif isinstance(operand, SymOp) and item.op not in ('BL', 'CALL'):
                        found.add(operand.symbol)
    found.update(value for _, _, value in test.init.registers if isinstance(value, str))
    return found


def _has_cycle(edges):
    visiting, done = set(), set()

    def visit(node):
        if node in done:
            return False
        if node in visiting:
            return True
        visiting.add(node)
        if any(visit(succ) for succ in edges.get(node, ())):
            return True
        visiting.discard(node)
        done.add(node)
        return False

    return any(visit(node) for node in list(edges))
