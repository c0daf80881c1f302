"""
Bounded unrolling of backward branches in asm thread bodies.

A loop ``head: ... Bcc head`` becomes ``factor`` copies of its body. Each
copy ends with the inverted branch jumping to the loop exit, and the last
copy falls into a ``Stuck`` marker, so paths needing more iterations than
``factor`` are infeasible.
"""

import logging
from dataclasses import replace

from litmus.services.instructions import (
    BRANCH_FAMILIES,
    Instruction,
    Label,
    LabelRef,
    Stuck,
    spec_for,
)

from .exceptions import RecursionUnsupported

logger = logging.getLogger(__name__)

INVERTED = {
    'B.EQ': 'B.NE', 'B.NE': 'B.EQ', 'CBZ': 'CBNZ', 'CBNZ': 'CBZ',
    'BEQ': 'BNE', 'BNE': 'BEQ', 'BZ': 'BNZ', 'BNZ': 'BZ',
}

CALL_OPS = ('BL', 'CALL')


def unroll(test, factor):
    if factor < 1:
        raise ValueError(f'unroll factor must be at least 1, got {factor}')
    if not test.is_asm:
        return test
    threads = []
    for thread in test.threads:
        for item in thread.body:
            if isinstance(item, Instruction) and item.op in CALL_OPS:
                raise RecursionUnsupported(thread.tid, item.op)
        body = unroll_body(test.dialect, thread.body, factor)
        if body != thread.body:
            logger.debug('Unrolled %s of %s by %d', thread.name, test.name, factor)
        threads.append(replace(thread, body=body))
    return replace(test, threads=tuple(threads))


def unroll_body(dialect, body, factor):
    items = list(body)
    generation = 0
    while True:
        loop = _first_backward_branch(dialect, items)
        if loop is None:
            return tuple(items)
        start, end = loop
        items[start:end + 1] = _expand(dialect, items[start:end + 1], factor, generation)
        generation += 1


def _first_backward_branch(dialect, items):
    labels = {}
    for index, item in enumerate(items):
        if isinstance(item, Label):
            labels[item.name] = index
        elif isinstance(item, Instruction):
            spec = spec_for(dialect, item.op)
            if spec is not None and spec.family in BRANCH_FAMILIES:
                target = item.operands[-1].name
                if target in labels:
                    return labels[target], index
    return None


def _expand(dialect, segment, factor, generation):
    head = segment[0].name
    branch = segment[-1]
    inner_labels = {item.name for item in segment if isinstance(item, Label)}
    exit_label = f'{head}_x{generation}'
    inverted = INVERTED.get(branch.op)

    expanded = []
    for copy in range(factor):
        suffix = f'_u{generation}_{copy}'
        for item in segment[:-1]:
            expanded.append(_relabel(item, inner_labels, suffix))
        if inverted is not None:
            operands = branch.operands[:-1] + (LabelRef(exit_label),)
            expanded.append(Instruction(inverted, operands))
    expanded.append(Stuck())
    expanded.append(Label(exit_label))
    return expanded


def _relabel(item, inner_labels, suffix):
    if isinstance(item, Label):
        return Label(item.name + suffix)
    if isinstance(item, Instruction):
        operands = tuple(
            LabelRef(op.name + suffix) if isinstance(op, LabelRef) and op.name in inner_labels else op
            for op in item.operands
        )
        return Instruction(item.op, operands)
    return item
