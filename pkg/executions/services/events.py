"""
Events, relations and candidate executions.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from litmus.services.types import Order


class EventKind(str, Enum):
    READ = 'R'
    WRITE = 'W'
    FENCE = 'F'
    RMW_READ = 'RMW-R'
    RMW_WRITE = 'RMW-W'

    @property
    def is_read(self):
        return self in (EventKind.READ, EventKind.RMW_READ)

    @property
    def is_write(self):
        return self in (EventKind.WRITE, EventKind.RMW_WRITE)

    @property
    def is_rmw(self):
        return self in (EventKind.RMW_READ, EventKind.RMW_WRITE)


INIT_THREAD = -1


@dataclass(frozen=True)
class Event:
    """
    One memory event of a candidate execution.

    ``order`` is the source ordering annotation (None for asm events);
    asm ordering lives in ``tags``: ``A`` (LDAR), ``Q`` (LDAPR), ``L``
    (STLR) and the DMB domain for fences.
    """

    id: int
    thread: int
    kind: EventKind
    loc: Optional[str] = None
    value: object = None
    order: Optional[Order] = None
    tags: frozenset = frozenset()
    origin: tuple = ()

    @property
    def is_init(self):
        return self.thread == INIT_THREAD

    @property
    def is_atomic(self):
        return self.order is not None and self.order.is_atomic

    def label(self):
        """``a:R(Rlx)[x]=0`` style description."""
        annotation = self.order.value if self.order is not None else ''.join(sorted(self.tags))
        annotation = f'({annotation})' if annotation else ''
        if self.kind is EventKind.FENCE:
            return f'e{self.id}:F{annotation}'
        where = 'init' if self.is_init else f'P{self.thread}'
        return f'e{self.id}:{self.kind.value}{annotation}[{self.loc}]={self.value} @{where}'

    def signature(self):
        """Identity of the statement that produced the event, stable across candidates."""
        return (self.thread, self.kind, self.origin)


@dataclass(frozen=True)
class Relation:
    name: str
    pairs: frozenset = frozenset()

    def __contains__(self, pair):
        return pair in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def matrix(self, size):
        result = np.zeros((size, size), dtype=bool)
        for source, target in self.pairs:
            result[source, target] = True
        return result

    @classmethod
    def from_matrix(cls, name, matrix):
        sources, targets = np.nonzero(matrix)
        return cls(name, frozenset(zip(sources.tolist(), targets.tolist())))


@dataclass(frozen=True)
class CandidateExecution:
    """
    Events plus po, rf and co; fr is always derived.

    ``registers`` holds, per thread, the final register bindings of the
    chosen path with every read value substituted.
    """

    events: tuple
    po: Relation
    rf: Relation
    co: Relation
    rmw: Relation = field(default_factory=lambda: Relation('rmw'))
    addr: Relation = field(default_factory=lambda: Relation('addr'))
    data: Relation = field(default_factory=lambda: Relation('data'))
    ctrl: Relation = field(default_factory=lambda: Relation('ctrl'))
    path_choices: tuple = ()
    init_writes: tuple = ()
    registers: tuple = ()

    @property
    def size(self):
        return len(self.events)

    @property
    def fr(self):
        return derive_fr(self)

    def reads(self):
        return [event for event in self.events if event.kind.is_read]

    def writes(self):
        return [event for event in self.events if event.kind.is_write]

    def rf_source(self, read_id):
        for source, target in self.rf.pairs:
            if target == read_id:
                return source
        return None

    def final_memory(self):
        """Value of the co-maximal write of every location."""
        latest = {}
        for event in self.writes():
            later = any(source == event.id for source, _ in self.co.pairs)
            if not later:
                latest[event.loc] = event.value
        return latest

    def register_file(self, thread):
        return dict(self.registers[thread]) if thread < len(self.registers) else {}


def derive_fr(execution):
    """fr = rf^-1 ; co: a read is fr-before every write co-after its source."""
    sources = {target: source for source, target in execution.rf.pairs}
    co_after = {}
    for earlier, later in execution.co.pairs:
        co_after.setdefault(earlier, set()).add(later)
    pairs = set()
    for read, source in sources.items():
        for write in co_after.get(source, ()):
            pairs.add((read, write))
    return Relation('fr', frozenset(pairs))
