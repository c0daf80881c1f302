"""
Outcomes: final observable states of allowed executions.
"""

from dataclasses import dataclass, field

from litmus.services.instructions import reg_key

from . import values as V


def _value_key(value):
    return (0, value, '') if isinstance(value, int) else (1, 0, str(value))


@dataclass(frozen=True)
class Outcome:
    """Bindings from observable key to value, kept sorted by key."""

    bindings: tuple = ()

    @classmethod
    def from_dict(cls, values):
        return cls(tuple(sorted(values.items())))

    def as_dict(self):
        return dict(self.bindings)

    def keys(self):
        return tuple(key for key, _ in self.bindings)

    def get(self, key, default=None):
        for name, value in self.bindings:
            if name == key:
                return value
        return default

    def project(self, keys):
        keep = set(keys)
        return Outcome(tuple(item for item in self.bindings if item[0] in keep))

    def sort_key(self):
        return tuple((key, _value_key(value)) for key, value in self.bindings)

    def herd_line(self):
        """``0:r0=0; 1:r0=1;``"""
        return ' '.join(f'{key}={value};' for key, value in self.bindings)

    def render(self):
        """``[0:r0=0; 1:r0=1;]``"""
        return f'[{self.herd_line()}]'

    def __str__(self):
        return self.render()


@dataclass(frozen=True)
class OutcomeSet:
    """
    Distinct outcomes with one witness execution each.

    Equality compares the outcomes only; witnesses are informative.
    """

    outcomes: frozenset = frozenset()
    witnesses: dict = field(default_factory=dict, compare=False, hash=False)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self):
        return len(self.outcomes)

    def __contains__(self, outcome):
        return outcome in self.outcomes

    def sorted(self):
        return sorted(self.outcomes, key=Outcome.sort_key)

    def witness(self, outcome):
        return self.witnesses.get(outcome)

    def render(self):
        return [outcome.render() for outcome in self.sorted()]


def outcome_of(test, execution):
    """Project one execution on the test's observables."""
    memory = execution.final_memory()
    bindings = {}
    for observable in test.observables():
        key = observable.key(test.dialect)
        if not observable.is_register:
            value = memory.get(observable.name, test.init.value_of(observable.name))
        else:
            registers = execution.register_file(observable.thread)
            value = registers.get(_register_key(test, observable), 0)
        bindings[key] = V.render_value(value)
    return Outcome.from_dict(bindings)


def outcomes_of(test, executions):
    """Deduplicated outcomes of ``executions``; the first execution seen is the witness."""
    witnesses = {}
    for execution in executions:
        outcome = outcome_of(test, execution)
        witnesses.setdefault(outcome, execution)
    return OutcomeSet(frozenset(witnesses), witnesses)


def _register_key(test, observable):
    if not test.is_asm:
        return observable.name
    thread = test.thread(observable.thread)
    aliases = dict(thread.aliases)
    return reg_key(aliases.get(observable.name, observable.name))
