"""
Evaluate relation expressions against one candidate execution.
"""

import numpy as np

from executions.services.events import EventKind, Relation
from litmus.services.types import Order

from . import exprs as E
from . import relations as rel
from .exceptions import ModelError, UnknownBaseRelation


def _event_classes(event):
    """Names of every event class ``event`` belongs to."""
    names = set(event.tags)
    kind = event.kind
    if kind.is_read:
        names |= {'R', 'M'}
    if kind.is_write:
        names |= {'W', 'M'}
    if kind.is_rmw:
        names.add('RMW')
    if kind is EventKind.FENCE:
        names.add('F')
        if 'ISH' in event.tags or event.order is Order.SC:
            names.add('FULL')
    if event.is_init:
        names.add('INIT')
    if event.order is not None:
        names.add('ATOMIC' if event.order.is_atomic else 'NA')
        if event.order.is_acquire:
            names.add('ACQ')
        if event.order.is_release:
            names.add('REL')
        if event.order is Order.SC:
            names.add('SC')
    return names


EVENT_CLASSES = frozenset({
    'R', 'W', 'F', 'M', 'RMW', 'NA', 'ATOMIC', 'ACQ', 'REL', 'SC',
    'A', 'Q', 'L', 'ISH', 'ISHLD', 'ISHST', 'INIT', 'FULL',
})


class Evaluation:
    """
    Relations of one execution, computed on demand and cached.

    Named sub-expressions are cached by name, so ``hb`` shared by several
    constraints is evaluated once per execution.
    """

    def __init__(self, execution):
        self.execution = execution
        self.size = execution.size
        self.classes = [_event_classes(event) for event in execution.events]
        self._cache = {}

    # -- event classes ------------------------------------------------------

    def mask(self, events):
        if isinstance(events, E.SetName):
            if events.name not in EVENT_CLASSES:
                raise ModelError(f'unknown event class {events.name!r}')
            return np.array([events.name in names for names in self.classes], dtype=bool)
        if isinstance(events, E.SetUnion):
            return self.mask(events.left) | self.mask(events.right)
        if isinstance(events, E.SetInter):
            return self.mask(events.left) & self.mask(events.right)
        if isinstance(events, E.SetDiff):
            return self.mask(events.left) & ~self.mask(events.right)
        raise TypeError(f'not an event-class expression: {events!r}')

    # -- base relations -----------------------------------------------------

    def base(self, name):
        key = ('base', name)
        if key not in self._cache:
            self._cache[key] = self._compute_base(name)
        return self._cache[key]

    def _compute_base(self, name):
        execution = self.execution
        size = self.size
        if name in ('po', 'rf', 'co', 'rmw', 'addr', 'data', 'ctrl'):
            return getattr(execution, name).matrix(size)
        if name == 'fr':
            return execution.fr.matrix(size)
        if name == 'id':
            return rel.identity(size)
        if name == 'loc':
            locs = np.array([str(event.loc) for event in execution.events])
            located = np.array([event.loc is not None for event in execution.events])
            return (locs[:, None] == locs[None, :]) & np.outer(located, located)
        if name in ('int', 'ext'):
            threads = np.array([event.thread for event in execution.events])
            same = threads[:, None] == threads[None, :]
            return same if name == 'int' else ~same
        if name == 'po-loc':
            return self.base('po') & self.base('loc')
        for prefix in ('rf', 'co', 'fr'):
            if name == prefix + 'e':
                return self.base(prefix) & self.base('ext')
            if name == prefix + 'i':
                return self.base(prefix) & self.base('int')
        raise UnknownBaseRelation(name)

    # -- expressions ----------------------------------------------------------

    def relation(self, expr):
        if isinstance(expr, E.Base):
            return self.base(expr.name)
        if isinstance(expr, E.Named):
            key = ('named', expr.name)
            if key not in self._cache:
                self._cache[key] = self.relation(expr.inner)
            return self._cache[key]
        if isinstance(expr, E.Filter):
            return rel.identity_on(self.mask(expr.events))
        if isinstance(expr, E.Union):
            return self.relation(expr.left) | self.relation(expr.right)
        if isinstance(expr, E.Inter):
            return self.relation(expr.left) & self.relation(expr.right)
        if isinstance(expr, E.Diff):
            return self.relation(expr.left) & ~self.relation(expr.right)
        if isinstance(expr, E.Seq):
            return rel.compose(self.relation(expr.left), self.relation(expr.right))
        if isinstance(expr, E.Inverse):
            return self.relation(expr.inner).T.copy()
        if isinstance(expr, E.Plus):
            return rel.transitive_closure(self.relation(expr.inner))
        if isinstance(expr, E.Star):
            return rel.reflexive_closure(rel.transitive_closure(self.relation(expr.inner)))
        if isinstance(expr, E.Opt):
            return rel.reflexive_closure(self.relation(expr.inner))
        raise TypeError(f'not a relation expression: {expr!r}')


def eval_relation(expr, execution):
    """``expr`` evaluated over the events of ``execution``."""
    matrix = Evaluation(execution).relation(expr)
    return Relation.from_matrix(E.describe(expr), matrix)
