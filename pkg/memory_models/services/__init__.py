from .checker import Verdict, check_model
from .evaluator import Evaluation, eval_relation
from .exceptions import ModelError, UnknownBaseRelation, UnknownModel
from .exprs import RelationExpr, describe
from .models import Constraint, ConstraintKind, ModelSpec, RaceSemantics, builtin_models, lookup

__all__ = [
    'Constraint', 'ConstraintKind', 'Evaluation', 'ModelError', 'ModelSpec',
    'RaceSemantics', 'RelationExpr', 'UnknownBaseRelation', 'UnknownModel',
    'Verdict', 'builtin_models', 'check_model', 'describe', 'eval_relation', 'lookup',
]
