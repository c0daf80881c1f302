"""
Assembly peephole optimizer.

Compiled tests materialise every global's address through the GOT
(``ADRP; LDR [..,:got_lo12:]``) before touching it, tripling the events
the simulator has to order. The rules here fold those sequences back
into direct accesses. A rule only deletes a read of a GOT slot no thread
can write; a match that fails this guard is skipped and recorded.

Every rewrite removes at least one instruction, so running the rules to
a fixpoint terminates.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable

from litmus.services.instructions import (
    BRANCH_FAMILIES,
    Instruction,
    Label,
    LabelRef,
    Mem,
    Stuck,
    SymOp,
    reg_key,
    register_written,
    registers_read,
    spec_for,
)

from .exceptions import GuardViolation, TransformError

logger = logging.getLogger(__name__)

RMW_FAMILIES = frozenset({'ldadd', 'swp', 'cas', 'stadd'})
WRITING_FAMILIES = frozenset({'store'}) | RMW_FAMILIES
ACCESS_FAMILIES = frozenset({'load', 'store'}) | RMW_FAMILIES
# Register-only definitions the dead-def rule may delete.
PURE_FAMILIES = frozenset({'mov', 'add', 'sub', 'eor', 'adrp', 'cset'})
BOUNDARY_FAMILIES = BRANCH_FAMILIES | {'call', 'ret', 'cas'}


@dataclass(frozen=True)
class PeepholeRule:
    """``rewrite(scope, body)`` returns a shorter body, or None when nothing matched."""

    name: str
    description: str
    rewrite: Callable


@dataclass
class OptStats:
    events_before: int = 0
    events_after: int = 0
    rules_fired: Counter = field(default_factory=Counter)
    guard_violations: list = field(default_factory=list)

    @property
    def fired(self):
        return sum(self.rules_fired.values())


def count_events(test):
    """Static memory events of an asm test; an RMW counts as two."""
    total = 0
    for thread in test.threads:
        for item in thread.body:
            spec = spec_for(test.dialect, item.op) if isinstance(item, Instruction) else None
            if spec is None:
                continue
            if spec.family in RMW_FAMILIES:
                total += 2
            elif spec.family in ('load', 'store', 'fence'):
                total += 1
    return total


# ============================================
# SCOPE
# ============================================

class _Scope:
    """Dataflow queries over one thread body, plus guard bookkeeping."""

    def __init__(self, test, thread, shared_slots, stats):
        self.dialect = test.dialect
        self.tid = thread.tid
        self.shared_slots = shared_slots
        self.stats = stats
        self.observed = _observed_keys(test, thread)

    def spec(self, item):
        if not isinstance(item, Instruction):
            return None
        return spec_for(self.dialect, item.op)

    def reads(self, item):
        spec = self.spec(item)
        if spec is None:
            return set()
        return {op.key for op in registers_read(item, spec)}

    def writes(self, item):
        spec = self.spec(item)
        if spec is None:
            return None
        target = register_written(item, spec)
        return target.key if target is not None else None

    def is_boundary(self, item):
        if isinstance(item, (Label, Stuck)):
            return True
        spec = self.spec(item)
        return spec is not None and spec.family in BOUNDARY_FAMILIES

    def next_touch(self, body, index, key):
        """Index of the next item after ``index`` reading or writing ``key``."""
        for position in range(index + 1, len(body)):
            item = body[position]
            if self.is_boundary(item):
                return None
            if key in self.reads(item) or self.writes(item) == key:
                return position
        return None

    def dead_after(self, body, index, key):
        """
        True when no path from ``index`` reads ``key`` before redefining it.

        Branches are followed to both successors; the thread's end reads
        the observed registers.
        """
        labels = {item.name: position for position, item in enumerate(body) if isinstance(item, Label)}
        pending, seen = [index + 1], set()
        while pending:
            position = pending.pop()
            while position not in seen:
                seen.add(position)
                if position >= len(body):
                    if key in self.observed:
                        return False
                    break
                item = body[position]
                if isinstance(item, Stuck):
                    break
                if key in self.reads(item):
                    return False
                if self.writes(item) == key:
                    break
                family = getattr(self.spec(item), 'family', None)
                if family == 'call':
                    return False
                if family == 'ret':
                    if key in self.observed:
                        return False
                    break
                if family in BRANCH_FAMILIES:
                    target = _branch_target(item)
                    if target not in labels:
                        return False
                    pending.append(labels[target])
                    if family == 'b':
                        break
                position += 1
        return True

    def dead_or_redefined(self, body, index, key):
        return self.writes(body[index]) == key or self.dead_after(body, index, key)

    def guard(self, rule, slot):
        if slot not in self.shared_slots:
            return True
        violation = GuardViolation(rule, slot, self.tid)
        seen = {(v.rule, v.location, v.thread) for v in self.stats.guard_violations}
        if (rule, slot, self.tid) not in seen:
            logger.warning('%s', violation)
            self.stats.guard_violations.append(violation)
        return False


def _branch_target(item):
    for operand in item.operands:
        if isinstance(operand, LabelRef):
            return operand.name
    return None


def _observed_keys(test, thread):
    aliases = dict(thread.aliases)
    keys = set()
    for observable in test.observables():
        if observable.thread != thread.tid:
            continue
        try:
            keys.add(reg_key(aliases.get(observable.name, observable.name)))
        except ValueError:
            continue
    return keys


def _shared_slots(test):
    """GOT slots some thread may write, or that the init state names."""
    slots = {loc for loc in test.init.locations() if loc.endswith('@got')}
    for thread in test.threads:
        for item in thread.body:
            spec = spec_for(test.dialect, item.op) if isinstance(item, Instruction) else None
            if spec is None or spec.family not in WRITING_FAMILIES:
                continue
            mem = item.operands[-1]
            if mem.slot and mem.modifier == 'got_lo12':
                slots.add(f'{mem.slot}@got')
            elif mem.symbol and mem.symbol.endswith('@got'):
                slots.add(mem.symbol)
    return slots


# ============================================
# RULES
# ============================================

def _is_got_load(scope, item, base_key, symbol):
    spec = scope.spec(item)
    if spec is None or spec.family != 'load' or spec.acquire:
        return False
    mem = item.operands[-1]
    return (mem.base is not None and mem.base.key == base_key
            and mem.slot == symbol and mem.modifier == 'got_lo12')


def _direct_access(scope, item, key):
    """True when ``item`` accesses ``[key]`` and uses ``key`` for nothing else."""
    spec = scope.spec(item)
    if spec is None or spec.family not in ACCESS_FAMILIES:
        return False
    mem = item.operands[-1]
    if mem.base is None or mem.base.key != key or mem.slot or mem.offset:
        return False
    return all(op.key != key for op in _data_reads(item, spec))


def _data_reads(item, spec):
    """Register operands an access reads besides its address."""
    ops = item.operands
    if spec.family == 'load':
        candidates = ()
    elif spec.family == 'cas':
        candidates = ops[:2]
    else:
        candidates = ops[:1]
    return [op for op in candidates if hasattr(op, 'key') and not op.is_zero]


def _retarget(item, symbol):
    return Instruction(item.op, item.operands[:-1] + (Mem(symbol=symbol),))


def _adrp_collapse(scope, body):
    """
    ``ADRP Xa,:got:s; LDR Xb,[Xa,:got_lo12:s]; <op> [Xb]``  =>  ``<op> [s]``
    ``ADRP Xa,s; ADD Xb,Xa,:lo12:s; <op> [Xb]``              =>  ``<op> [s]``
    ``ADRP Xa,s; <op> [Xa,:lo12:s]``                         =>  ``<op> [s]``
    """
    for i, item in enumerate(body):
        spec = scope.spec(item)
        if spec is None or spec.family != 'adrp':
            continue
        page, symbol = item.operands[0], item.operands[1]
        if not isinstance(symbol, SymOp):
            continue
        j = scope.next_touch(body, i, page.key)
        if j is None:
            continue
        use = body[j]
        use_spec = scope.spec(use)

        if symbol.modifier == 'got':
            if not _is_got_load(scope, use, page.key, symbol.symbol):
                continue
            address = use.operands[0].key
        elif symbol.modifier is None and use_spec.family in ACCESS_FAMILIES:
            mem = use.operands[-1]
            if (mem.base is None or mem.base.key != page.key or mem.slot != symbol.symbol
                    or mem.modifier != 'lo12'
                    or any(op.key == page.key for op in _data_reads(use, use_spec))):
                continue
            if not scope.dead_or_redefined(body, j, page.key):
                continue
            return body[:i] + body[i + 1:j] + (_retarget(use, symbol.symbol),) + body[j + 1:]
        elif symbol.modifier is None and use_spec.family == 'add':
            ops = use.operands
            if not (len(ops) == 3 and getattr(ops[1], 'key', None) == page.key
                    and ops[2] == SymOp(symbol.symbol, 'lo12')):
                continue
            address = ops[0].key
        else:
            continue

        if address != page.key and not scope.dead_after(body, j, page.key):
            continue
        k = scope.next_touch(body, j, address)
        if k is None or not _direct_access(scope, body[k], address):
            continue
        if not scope.dead_or_redefined(body, k, address):
            continue
        if symbol.modifier == 'got' and not scope.guard('adrp-collapse', f'{symbol.symbol}@got'):
            continue
        return body[:i] + body[i + 1:j] + body[j + 1:k] + (_retarget(body[k], symbol.symbol),) + body[k + 1:]
    return None


def _dead_def(scope, body):
    """A register-only definition whose result is never read."""
    for i, item in enumerate(body):
        spec = scope.spec(item)
        if spec is None or spec.family not in PURE_FAMILIES:
            continue
        key = scope.writes(item)
        if key is not None and scope.dead_after(body, i, key):
            return body[:i] + body[i + 1:]
    return None


def _reload(scope, body):
    """
    A GOT load into a register that already holds that address, together
    with the ``ADRP`` that fed it when it reuses the same register.
    """
    holds = {}
    for i, item in enumerate(body):
        if scope.is_boundary(item):
            holds.clear()
            continue
        spec = scope.spec(item)
        if spec is None:
            continue
        if spec.family == 'adrp' and isinstance(item.operands[1], SymOp) and item.operands[1].modifier == 'got':
            key, symbol = item.operands[0].key, item.operands[1].symbol
            j = scope.next_touch(body, i, key)
            if (holds.get(key) == symbol and j is not None and _is_got_load(scope, body[j], key, symbol)
                    and body[j].operands[0].key == key and scope.guard('reload', f'{symbol}@got')):
                return body[:i] + body[i + 1:j] + body[j + 1:]
        if spec.family == 'load' and item.operands[-1].modifier == 'got_lo12' and item.operands[-1].slot:
            key, symbol = item.operands[0].key, item.operands[-1].slot
            base = item.operands[-1].base
            if (holds.get(key) == symbol and base is not None and base.key != key
                    and scope.guard('reload', f'{symbol}@got')):
                return body[:i] + body[i + 1:]
            holds = {reg: sym for reg, sym in holds.items() if reg != key}
            holds[key] = symbol
            continue
        written = scope.writes(item)
        if written is not None:
            holds.pop(written, None)
    return None


RULES = {rule.name: rule for rule in (
    PeepholeRule('adrp-collapse', 'fold GOT or page address materialisation into the access', _adrp_collapse),
    PeepholeRule('dead-def', 'drop register definitions that are never read', _dead_def),
    PeepholeRule('reload', 'drop reloads of an address a register already holds', _reload),
)}


def select_rules(names=None):
    if names is None:
        return list(RULES.values())
    if isinstance(names, str):
        names = [name.strip() for name in names.split(',') if name.strip()]
    selected = []
    for name in names:
        if isinstance(name, PeepholeRule):
            selected.append(name)
        elif name in RULES:
            selected.append(RULES[name])
        else:
            raise TransformError(f'unknown peephole rule {name!r}; known: {", ".join(RULES)}')
    return selected


def optimize_asm(test, rules=None):
    """
    Apply ``rules`` (all by default) to every thread until none fires.

    Returns the optimised test and an ``OptStats``.
    """
    if not test.is_asm:
        raise TransformError(f'{test.name}: the peephole optimizer needs an asm test')
    selected = select_rules(rules)
    stats = OptStats(events_before=count_events(test))
    shared = _shared_slots(test)

    threads = []
    for thread in test.threads:
        scope = _Scope(test, thread, shared, stats)
        body = thread.body
        while True:
            for rule in selected:
                rewritten = rule.rewrite(scope, body)
                if rewritten is not None:
                    body = rewritten
                    stats.rules_fired[rule.name] += 1
                    break
            else:
                break
        threads.append(replace(thread, body=body))

    optimized = replace(test, threads=tuple(threads))
    stats.events_after = count_events(optimized)
    if stats.fired:
        logger.info('Optimised %s: %d -> %d events (%s)', test.name, stats.events_before,
                    stats.events_after, ', '.join(f'{k} x{v}' for k, v in sorted(stats.rules_fired.items())))
    return optimized, stats
