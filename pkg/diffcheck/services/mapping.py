"""
State mappings between source-test and compiled-test observables.

Source registers are keyed ``1:r0`` and compiled ones ``P1_r0``; shared
locations keep their names. Compilers may also report where a source
register ended up (``hints``), which takes precedence over the naming
convention.
"""

import logging
from dataclasses import dataclass

from executions.services.outcomes import Outcome

from .exceptions import AmbiguousMapping, IncompatibleWidths, MissingBinding

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StateMapping:
    """``pairs`` holds (source key, target key) pairs; both sides are unique."""

    pairs: tuple = ()
    unmapped_source: frozenset = frozenset()
    unmapped_target: frozenset = frozenset()

    def __post_init__(self):
        seen = {}
        for source, target in self.pairs:
            if target in seen and seen[target] != source:
                raise AmbiguousMapping(target, (seen[target], source))
            seen[target] = source
        sources = [source for source, _ in self.pairs]
        if len(sources) != len(set(sources)):
            duplicate = next(s for s in sources if sources.count(s) > 1)
            raise AmbiguousMapping(duplicate, [t for s, t in self.pairs if s == duplicate])

    @classmethod
    def identity(cls, keys):
        return cls(tuple((key, key) for key in keys))

    def as_dict(self):
        return dict(self.pairs)

    def source_keys(self):
        return tuple(source for source, _ in self.pairs)

    def target_keys(self):
        return tuple(target for _, target in self.pairs)

    def target_of(self, source):
        return self.as_dict().get(source)

    def inverse(self):
        return StateMapping(
            tuple((target, source) for source, target in self.pairs),
            unmapped_source=self.unmapped_target,
            unmapped_target=self.unmapped_source,
        )

    def is_total(self):
        return not self.unmapped_source


def _conventional_key(source_key, target):
    """``1:r0`` -> ``P1_r0`` for asm targets; locations and same-dialect keys are unchanged."""
    if ':' not in source_key or not target.is_asm:
        return source_key
    tid, reg = source_key.split(':', 1)
    return f'P{tid}_{reg}'


def _normalise_hints(hints):
    normalised = {}
    for source, targets in (hints or {}).items():
        if isinstance(targets, str):
            targets = [targets]
        normalised[str(source)] = list(dict.fromkeys(targets))
    return normalised


def _check_widths(src, tgt, source_key, target_key):
    source_types, target_types = dict(src.init.types), dict(tgt.init.types)
    if source_key in source_types and target_key in target_types:
        source_bits, target_bits = source_types[source_key].bits, target_types[target_key].bits
        if source_bits != target_bits:
            raise IncompatibleWidths(source_key, target_key, source_bits, target_bits)


def infer_state_mapping(src, tgt, hints=None):
    """
    Map each observable of ``src`` onto an observable of ``tgt``.

    ``hints`` maps a source key to the target key (or keys) the compiler
    placed it in; a hint naming two targets raises ``AmbiguousMapping``.
    Source observables with no counterpart end up in ``unmapped_source``;
    target observables nobody maps to end up in ``unmapped_target``.
    """
    hints = _normalise_hints(hints)
    target_keys = tgt.observable_keys()
    available = set(target_keys)

    pairs, unmapped = [], set()
    for source_key in src.observable_keys():
        if source_key in hints:
            candidates = hints[source_key]
            if len(candidates) > 1:
                raise AmbiguousMapping(source_key, candidates)
            candidate = candidates[0] if candidates else None
        else:
            candidate = _conventional_key(source_key, tgt)
        if candidate is None or candidate not in available:
            unmapped.add(source_key)
            continue
        _check_widths(src, tgt, source_key, candidate)
        pairs.append((source_key, candidate))

    mapped_targets = {target for _, target in pairs}
    mapping = StateMapping(
        tuple(pairs),
        unmapped_source=frozenset(unmapped),
        unmapped_target=frozenset(key for key in target_keys if key not in mapped_targets),
    )
    if mapping.unmapped_source:
        logger.info('%s -> %s leaves %s unmapped', src.name, tgt.name,
                    ', '.join(sorted(mapping.unmapped_source)))
    return mapping


def rename_outcome(mapping, outcome):
    """Rename ``outcome`` to source keys; returns it with the target keys it dropped."""
    values = outcome.as_dict()
    renamed = {}
    for source, target in mapping.pairs:
        if target not in values:
            raise MissingBinding(target)
        renamed[source] = values[target]
    mapped = set(mapping.target_keys())
    dropped = tuple(key for key in outcome.keys() if key not in mapped)
    return Outcome.from_dict(renamed), dropped


def apply_mapping(mapping, outcome):
    """``outcome`` over source keys; unmapped target bindings are dropped with a warning."""
    renamed, dropped = rename_outcome(mapping, outcome)
    if dropped:
        logger.warning('Dropped unmapped target observable(s) %s', ', '.join(dropped))
    return renamed
