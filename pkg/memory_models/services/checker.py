"""
Checking candidate executions against a model.
"""

from dataclasses import dataclass

from . import relations as rel
from .evaluator import Evaluation
from .models import ConstraintKind, lookup

HOLDS = {
    ConstraintKind.ACYCLIC: rel.is_acyclic,
    ConstraintKind.IRREFLEXIVE: rel.is_irreflexive,
    ConstraintKind.EMPTY: rel.is_empty,
}


@dataclass(frozen=True)
class Verdict:
    allowed: bool
    violated: tuple = ()

    def __bool__(self):
        return self.allowed


def check_model(model, execution, evaluation=None):
    """
    Evaluate every constraint of ``model``; ``violated`` lists all failures.

    ``evaluation`` may be passed in to share cached relations with a
    caller that inspects the same execution afterwards.
    """
    model = lookup(model)
    evaluation = evaluation or Evaluation(execution)
    violated = tuple(
        constraint.label for constraint in model.constraints
        if not HOLDS[constraint.kind](evaluation.relation(constraint.expr))
    )
    return Verdict(allowed=not violated, violated=violated)
