"""
Data-race detection over allowed executions.
"""

import itertools


def conflicting(first, second):
    """Same location, at least one write and at least one non-atomic access."""
    if first.is_init or second.is_init:
        return False
    if first.loc is None or first.loc != second.loc:
        return False
    if not (first.kind.is_write or second.kind.is_write):
        return False
    return not (first.is_atomic and second.is_atomic)


def races_in(execution, happens_before):
    """
    Conflicting pairs of ``execution`` unordered by ``happens_before``.

    ``happens_before`` is the model's hb as a boolean matrix over the
    execution's events.
    """
    accesses = [event for event in execution.events if event.kind.is_read or event.kind.is_write]
    races = []
    for first, second in itertools.combinations(accesses, 2):
        if first.thread == second.thread or not conflicting(first, second):
            continue
        if happens_before[first.id, second.id] or happens_before[second.id, first.id]:
            continue
        races.append((first, second))
    return races
