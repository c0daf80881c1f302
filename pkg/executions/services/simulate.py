"""
Simulation: enumerate, filter through a model, project to outcomes.
"""

import logging
from dataclasses import dataclass, field

from django.conf import settings

from memory_models.services import Evaluation, check_model, lookup

from .candidates import Budget, EnumerationStats, enumerate_candidates
from .exceptions import IncompatibleModel
from .herd import render_log
from .outcomes import outcome_of, outcomes_of
from .paths import thread_paths
from .races import races_in
from .unroll import unroll

logger = logging.getLogger(__name__)

DEFAULTS = {
    'CANDIDATE_CAP': 1_000_000,
    'TIMEOUT_SECONDS': 120,
    'UNROLL_FACTOR': 2,
    'TIME_CHECK_INTERVAL': 256,
}


def simulation_setting(name):
    return getattr(settings, 'SIMULATION', {}).get(name, DEFAULTS[name])


@dataclass(frozen=True)
class SimulationStats:
    candidates: int = 0
    allowed: int = 0
    elapsed: float = 0.0
    examined: int = 0


@dataclass(frozen=True)
class SimulationResult:
    test: object
    model: object
    outcomes: object
    stats: SimulationStats
    races: tuple = ()
    positive: int = 0
    negative: int = 0

    @property
    def log(self):
        return render_log(self)


@dataclass
class _Tally:
    allowed: list = field(default_factory=list)
    positive: int = 0
    negative: int = 0
    races: dict = field(default_factory=dict)


def simulate(test, model, *, unroll_factor=None, cap=None, timeout=None, collect_races=False):
    """
    Outcomes of ``test`` allowed by ``model``.

    Budget arguments default to the ``SIMULATION`` settings. Raises
    ``IncompatibleModel`` when the model does not cover the test dialect,
    ``CandidateExplosion`` or ``SimulationTimeout`` when a budget runs out.
    """
    model = lookup(model)
    if not model.applies_to(test.dialect):
        raise IncompatibleModel(model.name, test.dialect.value)

    factor = unroll_factor if unroll_factor is not None else simulation_setting('UNROLL_FACTOR')
    budget = Budget(
        cap=cap if cap is not None else simulation_setting('CANDIDATE_CAP'),
        timeout=timeout if timeout is not None else simulation_setting('TIMEOUT_SECONDS'),
        check_interval=simulation_setting('TIME_CHECK_INTERVAL'),
    )
    stats = EnumerationStats()
    unrolled = unroll(test, factor)
    paths = [thread_paths(unrolled, thread) for thread in unrolled.threads]
    race_hb = _race_happens_before(test, model) if collect_races else None

    tally = _Tally()
    for execution in enumerate_candidates(unrolled, paths, budget, stats):
        evaluation = Evaluation(execution)
        if not check_model(model, execution, evaluation):
            continue
        tally.allowed.append(execution)
        if race_hb is not None:
            for pair in races_in(execution, evaluation.relation(race_hb)):
                key = tuple(event.signature() for event in pair)
                tally.races.setdefault(key, pair)

    outcomes = outcomes_of(test, tally.allowed)
    for execution in tally.allowed:
        if test.final.evaluate(outcome_of(test, execution).as_dict(), test.dialect):
            tally.positive += 1
        else:
            tally.negative += 1

    result = SimulationResult(
        test=test,
        model=model,
        outcomes=outcomes,
        stats=SimulationStats(
            candidates=stats.candidates,
            allowed=len(tally.allowed),
            elapsed=stats.elapsed,
            examined=stats.examined,
        ),
        races=tuple(tally.races[key] for key in sorted(tally.races, key=repr)),
        positive=tally.positive,
        negative=tally.negative,
    )
    logger.info('Simulated %s under %s: %d outcome(s), %d/%d allowed in %.3fs',
                test.name, model.name, len(outcomes), result.stats.allowed,
                result.stats.candidates, result.stats.elapsed)
    return result


def _race_happens_before(test, model):
    if test.is_asm:
        return None
    return model.happens_before or lookup('rc11_lite').happens_before


def detect_races(test, model, **options):
    """Conflicting, hb-unordered access pairs with a non-atomic side, over allowed executions."""
    return list(simulate(test, model, collect_races=True, **options).races)
