"""
Candidate-execution enumeration.

Candidates are the product of one path per thread, a location guess for
every dynamic write, an rf source for every read and a per-location co
order. Read values are never invented: each read takes the value of its
rf source, solved lazily through the symbolic terms of the paths, and
combinations whose values are cyclic or contradict a path constraint are
discarded before co is chosen.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field

from .events import INIT_THREAD, CandidateExecution, Event, EventKind, Relation
from .exceptions import CandidateExplosion, SimulationTimeout, UnresolvableAddress
from .paths import initial_value, location_type, thread_paths
from . import values as V

logger = logging.getLogger(__name__)


@dataclass
class EnumerationStats:
    """Counters shared with the caller; ``examined`` is what the cap limits."""

    examined: int = 0
    candidates: int = 0
    started: float = field(default_factory=time.monotonic)

    @property
    def elapsed(self):
        return time.monotonic() - self.started


@dataclass(frozen=True)
class Budget:
    cap: int = 1_000_000
    timeout: float = 120.0
    check_interval: int = 256


class _Cyclic(Exception):
    pass


class _Infeasible(Exception):
    pass


def enumerate_candidates(test, paths=None, budget=None, stats=None):
    """
    Yield every candidate execution of an unrolled test.

    ``paths`` may carry precomputed ``thread_paths`` per thread. Raises
    ``CandidateExplosion`` once more than ``budget.cap`` combinations were
    examined and ``SimulationTimeout`` past ``budget.timeout`` seconds.
    """
    budget = budget or Budget()
    stats = stats if stats is not None else EnumerationStats()
    if paths is None:
        paths = [thread_paths(test, thread) for thread in test.threads]
    for combination in itertools.product(*paths):
        yield from _Combination(test, combination, budget, stats).candidates()


class _Combination:
    """One path per thread; enumerates guesses, rf and co for it."""

    def __init__(self, test, paths, budget, stats):
        self.test = test
        self.paths = paths
        self.budget = budget
        self.stats = stats

        self.locations = list(test.init.locations())
        for path in paths:
            for event in path.events:
                if event.loc is not None and event.loc not in self.locations:
                    self.locations.append(event.loc)
        # GOT slots point at their symbols.
        for loc in list(self.locations):
            if loc.endswith('@got') and loc[:-len('@got')] not in self.locations:
                self.locations.append(loc[:-len('@got')])

        # Event ids: init writes first, then each thread in order.
        self.init_ids = {loc: index for index, loc in enumerate(self.locations)}
        self.ids = {}
        next_id = len(self.locations)
        for path in paths:
            for event in path.events:
                self.ids[(path.tid, event.index)] = next_id
                next_id += 1

        self.events = {(path.tid, event.index): event for path in paths for event in path.events}
        self.writes = [key for key, event in self.events.items() if event.kind.is_write]
        self.reads = [key for key, event in self.events.items() if event.kind.is_read]
        self.dynamic_writes = [key for key in self.writes if self.events[key].loc is None]
        self.rmw_pairs = [((key[0], event.partner), key) for key, event in self.events.items()
                          if event.kind is EventKind.RMW_WRITE]

    # -- budget -----------------------------------------------------------

    def _tick(self):
        stats = self.stats
        stats.examined += 1
        if stats.examined > self.budget.cap:
            raise CandidateExplosion(stats.examined, self.budget.cap)
        if stats.examined % self.budget.check_interval == 0 and stats.elapsed > self.budget.timeout:
            raise SimulationTimeout(self.budget.timeout, stats.elapsed)

    # -- enumeration ------------------------------------------------------

    def candidates(self):
        for guess in itertools.product(self.locations, repeat=len(self.dynamic_writes)):
            write_loc = {key: self.events[key].loc for key in self.writes}
            write_loc.update(zip(self.dynamic_writes, guess))
            options = [self._sources(read, write_loc) for read in self.reads]
            for choice in itertools.product(*options):
                self._tick()
                rf = dict(zip(self.reads, choice))
                try:
                    resolved = self._solve(rf, write_loc)
                except (_Cyclic, _Infeasible):
                    continue
                yield from self._with_coherence(rf, write_loc, resolved)

    def _sources(self, read, write_loc):
        """Writes a read may take its value from: init or same-location writes."""
        loc = self.events[read].loc
        if loc is None:
            return [('init', name) for name in self.locations] + list(self.writes)
        sources = [('init', loc)]
        sources.extend(key for key in self.writes if write_loc[key] == loc)
        return sources

    def _solve(self, rf, write_loc):
        """Concrete values of every read; raises on cycles or violated constraints."""
        values = {}
        active = set()

        def lookup(key):
            if key in values:
                return values[key]
            if key in active:
                raise _Cyclic()
            active.add(key)
            source = rf[key]
            if source[0] == 'init':
                loc = source[1]
                value = initial_value(self.test, loc)
            else:
                loc = write_loc[source]
                value = V.evaluate(self.events[source].value, lookup)
            if isinstance(value, int):
                value = location_type(self.test, loc).wrap(value)
            active.discard(key)
            values[key] = value
            return value

        for read in self.reads:
            lookup(read)

        for path in self.paths:
            for condition, taken in path.constraints:
                if V.truth(V.evaluate(condition, lookup)) != taken:
                    raise _Infeasible()

        layout = self.test.init.layout
        for key, event in self.events.items():
            if event.loc is not None or event.kind is EventKind.FENCE:
                continue
            try:
                loc = V.resolve_address(V.evaluate(event.address, lookup), layout)
            except UnresolvableAddress:
                raise _Infeasible()
            if event.kind.is_write:
                expected = write_loc[key]
            else:
                source = rf[key]
                expected = source[1] if source[0] == 'init' else write_loc[source]
            if loc != expected:
                raise _Infeasible()
        return values

    def _with_coherence(self, rf, write_loc, values):
        by_loc = {}
        for key in self.writes:
            by_loc.setdefault(write_loc[key], []).append(key)
        locs = sorted(by_loc)
        orders = [list(itertools.permutations(by_loc[loc])) for loc in locs]
        for chosen in itertools.product(*orders):
            self._tick()
            co = dict(zip(locs, chosen))
            if not self._atomic(rf, write_loc, co):
                continue
            self.stats.candidates += 1
            yield self._build(rf, write_loc, values, co)

    def _atomic(self, rf, write_loc, co):
        """An RMW write must immediately follow, in co, the write its read took from."""
        for read, write in self.rmw_pairs:
            order = co[write_loc[write]]
            position = order.index(write) + 1
            source = rf[read]
            if source[0] == 'init':
                source_position = 0 if source[1] == write_loc[write] else None
            else:
                source_position = order.index(source) + 1 if source in order else None
            if source_position is None or position != source_position + 1:
                return False
        return True

    # -- materialisation ----------------------------------------------------

    def _build(self, rf, write_loc, values, co):
        lookup = values.__getitem__
        events = []
        for loc in self.locations:
            events.append(Event(
                id=self.init_ids[loc], thread=INIT_THREAD, kind=EventKind.WRITE, loc=loc,
                value=V.render_value(initial_value(self.test, loc)),
            ))
        for path in self.paths:
            for sym in path.events:
                key = (path.tid, sym.index)
                if sym.kind is EventKind.FENCE:
                    loc, value = None, None
                elif sym.kind.is_write:
                    loc = write_loc[key]
                    value = V.evaluate(sym.value, lookup)
                    if isinstance(value, int):
                        value = location_type(self.test, loc).wrap(value)
                else:
                    source = rf[key]
                    loc = source[1] if source[0] == 'init' else write_loc[source]
                    value = values[key]
                events.append(Event(
                    id=self.ids[key], thread=path.tid, kind=sym.kind, loc=loc,
                    value=V.render_value(value), order=sym.order, tags=sym.tags,
                    origin=sym.origin,
                ))

        po, addr, data, ctrl = set(), set(), set(), set()
        for path in self.paths:
            ids = [self.ids[(path.tid, sym.index)] for sym in path.events]
            po.update(itertools.combinations(ids, 2))
            for sym in path.events:
                target = self.ids[(path.tid, sym.index)]
                addr.update((self.ids[(path.tid, dep)], target) for dep in sym.addr_deps)
                data.update((self.ids[(path.tid, dep)], target) for dep in sym.data_deps)
                ctrl.update((self.ids[(path.tid, dep)], target) for dep in sym.ctrl_deps)

        rf_pairs = set()
        for read, source in rf.items():
            source_id = self.init_ids[source[1]] if source[0] == 'init' else self.ids[source]
            rf_pairs.add((source_id, self.ids[read]))

        co_pairs = set()
        for loc, order in co.items():
            chain = [self.init_ids[loc]] + [self.ids[key] for key in order]
            co_pairs.update(itertools.combinations(chain, 2))
        rmw = {(self.ids[read], self.ids[write]) for read, write in self.rmw_pairs}
        registers = tuple(
            {key: V.evaluate(value, lookup) for key, value in path.registers}
            for path in self.paths
        )
        return CandidateExecution(
            events=tuple(sorted(events, key=lambda event: event.id)),
            po=Relation('po', frozenset(po)),
            rf=Relation('rf', frozenset(rf_pairs)),
            co=Relation('co', frozenset(co_pairs)),
            rmw=Relation('rmw', frozenset(rmw)),
            addr=Relation('addr', frozenset(addr)),
            data=Relation('data', frozenset(data)),
            ctrl=Relation('ctrl', frozenset(ctrl)),
            path_choices=tuple(path.choices for path in self.paths),
            init_writes=tuple(self.init_ids[loc] for loc in self.locations),
            registers=tuple(tuple(sorted(file.items())) for file in registers),
        )
