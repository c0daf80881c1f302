"""
herd-style simulation logs.
"""

from litmus.services.render import render_final
from litmus.services.types import Quantifier


def observation(result):
    if not result.positive:
        return 'Never'
    if not result.negative:
        return 'Always'
    return 'Sometimes'


def condition_holds(result):
    quantifier = result.test.final.quantifier
    if quantifier is Quantifier.EXISTS:
        return result.positive > 0
    if quantifier is Quantifier.NOT_EXISTS:
        return result.positive == 0
    return result.negative == 0


def render_log(result, with_time=True):
    """
    Log text for a ``SimulationResult``::

        Test MP Allowed
        States 3
        1:r0=0; 1:r1=0;
        ...
        Ok
        Witnesses
        Positive: 1 Negative: 5
        Condition exists (1:r0=1 /\\ 1:r1=0)
        Observation MP Sometimes 1 5
        Time MP 0.01
    """
    test = result.test
    lines = [f'Test {test.name} Allowed', f'States {len(result.outcomes)}']
    lines.extend(outcome.herd_line() for outcome in result.outcomes)
    lines.append('Ok' if condition_holds(result) else 'No')
    lines.append('Witnesses')
    lines.append(f'Positive: {result.positive} Negative: {result.negative}')
    lines.append(f'Condition {render_final(test)}')
    lines.append(f'Observation {test.name} {observation(result)} {result.positive} {result.negative}')
    if with_time:
        lines.append(f'Time {test.name} {result.stats.elapsed:.2f}')
    return '\n'.join(lines) + '\n'
