"""
Outcome comparison: is every compiled outcome allowed for the source?

Source outcomes are projected onto the observables the mapping covers and
target outcomes are renamed to source keys, so both sides speak about the
same state. A target outcome the source never allows is a positive
difference, the signal of a concurrency miscompilation.
"""

import logging
from dataclasses import dataclass, field

from django.conf import settings
from django.db import models

from executions.services.outcomes import Outcome

from .mapping import StateMapping, rename_outcome

logger = logging.getLogger(__name__)

IGNORE_RACY = 'ignore-racy'
COMPARE_ANYWAY = 'compare-anyway'
RACY_POLICIES = (IGNORE_RACY, COMPARE_ANYWAY)


class Classification(models.TextChoices):
    EQUAL = 'equal', 'Equal'
    POSITIVE = 'positive', 'Positive'
    NEGATIVE = 'negative', 'Negative'
    # Never produced: a novel outcome already makes a report Positive.
    MIXED = 'mixed', 'Mixed'
    UB_FILTERED = 'ub-filtered', 'UB-filtered'


def classify(novel, missing):
    if novel:
        return Classification.POSITIVE
    if missing:
        return Classification.NEGATIVE
    return Classification.EQUAL


@dataclass(frozen=True)
class DiffReport:
    classification: Classification
    novel_outcomes: frozenset = frozenset()
    missing_outcomes: frozenset = frozenset()
    source_outcomes: frozenset = frozenset()
    target_outcomes: frozenset = frozenset()
    mapping: StateMapping = field(default_factory=StateMapping)
    dropped: tuple = ()
    races: tuple = ()
    source_name: str = 'source'
    target_name: str = 'target'

    @property
    def is_positive(self):
        return self.classification == Classification.POSITIVE

    @property
    def table(self):
        return render_compare_table(self)

    def sorted_novel(self):
        return sorted(self.novel_outcomes, key=Outcome.sort_key)

    def sorted_missing(self):
        return sorted(self.missing_outcomes, key=Outcome.sort_key)


def racy_policy_setting():
    return getattr(settings, 'PIPELINE', {}).get('RACY_POLICY', IGNORE_RACY)


def compare_outcomes(src_out, tgt_out, mapping, *, races=(), racy_policy=None,
                     source_name='source', target_name='target'):
    """
    Classify ``tgt_out`` against ``src_out`` under ``mapping``.

    ``races`` are the data races of the source test. With the
    ``ignore-racy`` policy a racy source is not compared at all and the
    report is marked UB-filtered.
    """
    policy = racy_policy or racy_policy_setting()
    if policy not in RACY_POLICIES:
        raise ValueError(f'unknown racy-source policy {policy!r}')
    if races and policy == IGNORE_RACY:
        logger.info('%s has %d data race(s); comparison skipped', source_name, len(races))
        return DiffReport(Classification.UB_FILTERED, mapping=mapping, races=tuple(races),
                          source_name=source_name, target_name=target_name)

    keys = mapping.source_keys()
    source = frozenset(outcome.project(keys) for outcome in src_out)
    target, dropped = set(), set()
    for outcome in tgt_out:
        renamed, lost = rename_outcome(mapping, outcome)
        target.add(renamed)
        dropped.update(lost)
    target = frozenset(target)
    if dropped:
        logger.warning('%s: dropped unmapped target observable(s) %s',
                       target_name, ', '.join(sorted(dropped)))

    novel, missing = target - source, source - target
    report = DiffReport(
        classification=classify(novel, missing),
        novel_outcomes=novel,
        missing_outcomes=missing,
        source_outcomes=source,
        target_outcomes=target,
        mapping=mapping,
        dropped=tuple(sorted(dropped)),
        races=tuple(races),
        source_name=source_name,
        target_name=target_name,
    )
    logger.info('%s vs %s: %s (%d novel, %d missing)', source_name, target_name,
                report.classification.label, len(novel), len(missing))
    return report


def render_compare_table(report):
    """
    Source outcomes on the left, target outcomes on the right, one row per
    outcome. Target outcomes use target names; novel ones carry a ``+``.
    """
    to_target = report.mapping.inverse()
    rows = []
    for outcome in sorted(report.source_outcomes | report.target_outcomes, key=Outcome.sort_key):
        left = outcome.render() if outcome in report.source_outcomes else ''
        right = ''
        if outcome in report.target_outcomes:
            right = rename_outcome(to_target, outcome)[0].render()
            if outcome in report.novel_outcomes:
                right = f'+{right}'
        rows.append((left, right))

    left_header = f'{report.source_name} ({len(report.source_outcomes)})'
    right_header = f'{report.target_name} ({len(report.target_outcomes)})'
    width = max([len(left_header)] + [len(left) for left, _ in rows])
    lines = [f'{left_header:<{width}} | {right_header}', f'{"-" * width}-+-{"-" * len(right_header)}']
    lines.extend(f'{left:<{width}} | {right}'.rstrip() for left, right in rows)
    return '\n'.join(lines) + '\n'
