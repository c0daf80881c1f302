"""
Local-data persistence: copy thread-local registers into fresh globals at
the end of each thread so a compiled test cannot discard them.

The appended stores are non-atomic writes to globals no other thread
touches, so they never change which executions of the original events
are allowed; they only make the registers observable through memory.
"""

import logging
from dataclasses import dataclass, replace

import yaml

from litmus.services import exprs
from litmus.services.types import Observable, Order

from .exceptions import NameCollision, TransformError

logger = logging.getLogger(__name__)

AUTO = 'auto'
OFF = 'off'


@dataclass(frozen=True)
class PersistencePlan:
    """
    ``entries`` holds (thread, register, global) triples in thread order.
    Globals are named ``<prefix><thread>_<register>``.
    """

    entries: tuple = ()
    prefix: str = 'q'

    def __bool__(self):
        return bool(self.entries)

    @classmethod
    def from_registers(cls, registers, prefix='q'):
        """Build a plan from ``{thread: [register, ...]}``; duplicates collapse."""
        entries = []
        for tid in sorted(registers, key=_thread_number):
            number = _thread_number(tid)
            for reg in dict.fromkeys(registers[tid] or ()):
                entries.append((number, reg, f'{prefix}{number}_{reg}'))
        return cls(tuple(entries), prefix)

    @classmethod
    def every_register(cls, test, prefix='q'):
        return cls.from_registers(
            {thread.tid: thread.register_names() for thread in test.threads}, prefix)

    def for_thread(self, tid):
        return [(reg, name) for thread, reg, name in self.entries if thread == tid]

    def globals(self):
        return tuple(name for _, _, name in self.entries)


def _thread_number(tid):
    if isinstance(tid, int):
        return tid
    text = str(tid)
    if text.upper().startswith('P'):
        text = text[1:]
    try:
        return int(text)
    except ValueError:
        raise TransformError(f'not a thread name: {tid!r}') from None


def load_plan(path):
    """Read a YAML plan (``P1: [r0]``; an optional ``prefix`` key)."""
    with open(path, encoding='utf-8') as handle:
        document = yaml.safe_load(handle) or {}
    if not isinstance(document, dict):
        raise TransformError(f'{path}: expected a mapping of threads to registers')
    document = dict(document)
    prefix = document.pop('prefix', 'q')
    return PersistencePlan.from_registers(document, prefix)


def resolve_plan(test, plan):
    """Turn the ``auto``/``off``/path/mapping spellings into a plan."""
    if plan is None or plan == OFF:
        return PersistencePlan()
    if isinstance(plan, PersistencePlan):
        return plan
    if plan == AUTO:
        return PersistencePlan.every_register(test)
    if isinstance(plan, dict):
        return PersistencePlan.from_registers(plan)
    return load_plan(plan)


def persist_locals(test, plan=AUTO):
    """
    ``test`` with each planned register stored to its global at thread end.

    Globals are zero-initialised with the register's width and added to
    the ``locations`` clause. An empty plan returns ``test`` unchanged.
    """
    if test.is_asm:
        raise TransformError(f'{test.name}: persistence applies to source tests only')
    plan = resolve_plan(test, plan)
    if not plan:
        return test

    taken = set(test.shared_locations())
    for thread in test.threads:
        taken.update(thread.register_names())
    for name in plan.globals():
        if name in taken:
            raise NameCollision(name)
        taken.add(name)

    init = test.init
    threads = []
    for thread in test.threads:
        stores = []
        for reg, name in plan.for_thread(thread.tid):
            if reg not in thread.register_names():
                raise TransformError(f'{thread.name} has no register {reg!r} to persist')
            init = init.with_location(name, 0, thread.register_type(reg))
            stores.append(exprs.Store(name, exprs.Reg(reg), Order.NA))
        threads.append(replace(thread, body=thread.body + tuple(stores)))

    known_tids = {thread.tid for thread in test.threads}
    for tid, reg, _ in plan.entries:
        if tid not in known_tids:
            raise TransformError(f'{test.name} has no thread P{tid}')

    observables = tuple(Observable.location(name) for name in plan.globals())
    persisted = replace(
        test,
        init=init,
        threads=tuple(threads),
        locations=tuple(dict.fromkeys(test.locations + observables)),
    )
    logger.debug('Persisted %d register(s) of %s', len(plan.entries), test.name)
    return persisted.with_metadata(persisted=','.join(plan.globals()))
