"""
Model specifications and the builtin registry.

Each model is a list of constraints over relation expressions. The
formulations are simplified versions of the published models: SC, x86
TSO, RC11 with and without its load-buffering ban, and an Armv8 subset
that distinguishes LDAR from LDAPR.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from litmus.services.types import Dialect

from .exceptions import UnknownModel
from .exprs import RelationExpr, base, cls, describe, named, on, seq, union
from .exprs import SetName as S


class ConstraintKind(str, Enum):
    ACYCLIC = 'acyclic'
    IRREFLEXIVE = 'irreflexive'
    EMPTY = 'empty'


class RaceSemantics(str, Enum):
    UB_ON_RACE = 'ub-on-race'
    RACE_FREE = 'race-free-by-construction'


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    expr: RelationExpr
    label: str

    def describe(self, expand=False):
        return f'{self.kind.value} {describe(self.expr, expand)} as {self.label}'


@dataclass(frozen=True)
class ModelSpec:
    name: str
    dialects: tuple
    constraints: tuple
    race_semantics: RaceSemantics = RaceSemantics.RACE_FREE
    happens_before: Optional[RelationExpr] = None
    description: str = ''

    def __post_init__(self):
        labels = [constraint.label for constraint in self.constraints]
        if len(labels) != len(set(labels)):
            raise ValueError(f'duplicate constraint label in model {self.name!r}')

    def applies_to(self, dialect):
        return dialect in self.dialects

    @property
    def labels(self):
        return tuple(constraint.label for constraint in self.constraints)

    def without(self, label, name, description=''):
        """A copy of this model with one constraint dropped."""
        kept = tuple(c for c in self.constraints if c.label != label)
        return ModelSpec(name, self.dialects, kept, self.race_semantics,
                         self.happens_before, description or self.description)


def acyclic(expr, label):
    return Constraint(ConstraintKind.ACYCLIC, expr, label)


def irreflexive(expr, label):
    return Constraint(ConstraintKind.IRREFLEXIVE, expr, label)


def empty(expr, label):
    return Constraint(ConstraintKind.EMPTY, expr, label)


# ============================================
# SHARED RELATIONS
# ============================================

po, rf, co, fr = base('po'), base('rf'), base('co'), base('fr')
rmw = base('rmw')
po_loc = base('po-loc')
rfe, coe, fre = base('rfe'), base('coe'), base('fre')

coherence_order = po_loc | rf | co | fr
com = named('com', rf | co | fr)
eco = named('eco', (rf | co | fr).plus())

ALL_DIALECTS = tuple(Dialect)


def _sc():
    return ModelSpec(
        name='sc',
        dialects=ALL_DIALECTS,
        constraints=(acyclic(po | com, 'sc'),),
        description='Sequential consistency',
    )


def _tso():
    plain_w = S('W') - S('RMW')
    plain_r = S('R') - S('RMW')
    ppo = named('ppo', po - seq(on(plain_w), po, on(plain_r)))
    fence = named('mfence', seq(po, cls('FULL'), po))
    return ModelSpec(
        name='tso',
        dialects=ALL_DIALECTS,
        constraints=(
            acyclic(coherence_order, 'sc-per-location'),
            acyclic(ppo | rfe | co | fr | fence, 'tso'),
        ),
        description='x86 total store order',
    )


def _rc11_happens_before():
    release = on(S('REL') & S('W')) | seq(on(S('REL') & S('F')), po, on(S('W') & S('ATOMIC')))
    release_sequence = seq(cls('W'), po_loc, on(S('W') & S('ATOMIC'))).opt()
    acquire = on(S('ACQ') & S('R')) | seq(on(S('R') & S('ATOMIC')), po, on(S('ACQ') & S('F')))
    sw = named('sw', seq(release, release_sequence, seq(rf, rmw).star(), rf, acquire))
    return named('hb', (po | sw).plus())


def _rc11_lite():
    hb = _rc11_happens_before()
    return ModelSpec(
        name='rc11_lite',
        dialects=(Dialect.SOURCE,),
        constraints=(
            acyclic(coherence_order, 'coherence'),
            irreflexive(hb, 'hb'),
            irreflexive(seq(hb, eco), 'hb-coherence'),
            acyclic(po | rf, 'no-lb'),
        ),
        race_semantics=RaceSemantics.UB_ON_RACE,
        happens_before=hb,
        description='RC11 without SC-fence totality',
    )


def _armv8_lite():
    addr, data, ctrl = base('addr'), base('data'), base('ctrl')
    M, W, R = S('M'), S('W'), S('R')
    dob = named('dob', union(addr, data, seq(ctrl, on(W)), seq(addr, po, on(W))))
    bob = named('bob', union(
        seq(po, cls('ISH'), po),
        seq(on(R), po, cls('ISHLD'), po, on(M)),
        seq(on(W), po, cls('ISHST'), po, on(W)),
        seq(on(M), po, on(W & S('L'))),
        seq(on(R & (S('A') | S('Q'))), po, on(M)),
        seq(on(W & S('L')), po, on(R & S('A'))),
    ))
    ob = named('ob', union(rfe, coe, fre, dob, bob, rmw))
    return ModelSpec(
        name='armv8_lite',
        dialects=(Dialect.AARCH64, Dialect.ABSTRACT),
        constraints=(
            acyclic(coherence_order, 'internal'),
            acyclic(ob, 'external'),
        ),
        description='Armv8 AArch64 subset (LDAR, LDAPR, STLR, DMB)',
    )


def builtin_models():
    """Name -> ModelSpec for every builtin model, in registry order."""
    rc11_lite = _rc11_lite()
    rc11_lb = rc11_lite.without('no-lb', 'rc11_lb', 'RC11 permitting load buffering')
    models = (_sc(), _tso(), rc11_lite, rc11_lb, _armv8_lite())
    return {model.name: model for model in models}


_REGISTRY = builtin_models()


def lookup(name):
    if isinstance(name, ModelSpec):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownModel(name, _REGISTRY) from None
