"""
Pattern generator: instantiate the classic two-thread shapes over a grid
of orderings, widths, false dependencies and fences.
"""

import itertools
import logging
from dataclasses import dataclass

import yaml

from litmus.services import exprs
from litmus.services.types import (
    INT,
    And,
    Atom,
    Dialect,
    FinalPredicate,
    InitState,
    IntType,
    LitmusTest,
    Observable,
    Order,
    Thread,
)

from .exceptions import InvalidGrid, UnsupportedShape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Access:
    kind: str        # 'R' or 'W'
    loc: str
    value: int = 0


def R(loc):
    return Access('R', loc)


def W(loc, value=1):
    return Access('W', loc, value)


@dataclass(frozen=True)
class Shape:
    name: str
    threads: tuple
    # (thread or None for a location, register or location, value)
    relaxed_outcome: tuple


SHAPES = {shape.name: shape for shape in (
    Shape('MP', ((W('x'), W('y')), (R('y'), R('x'))),
          ((1, 'r0', 1), (1, 'r1', 0))),
    Shape('LB', ((R('x'), W('y')), (R('y'), W('x'))),
          ((0, 'r0', 1), (1, 'r0', 1))),
    Shape('SB', ((W('x'), R('y')), (W('y'), R('x'))),
          ((0, 'r0', 0), (1, 'r0', 0))),
    Shape('S', ((W('x', 2), W('y')), (R('y'), W('x'))),
          ((None, 'x', 2), (1, 'r0', 1))),
    Shape('R', ((W('x'), W('y')), (W('y', 2), R('x'))),
          ((None, 'y', 2), (1, 'r0', 0))),
    Shape('2+2W', ((W('x'), W('y', 2)), (W('y'), W('x', 2))),
          ((None, 'x', 1), (None, 'y', 1))),
    Shape('W+RR', ((W('x'),), (R('x'), R('x'))),
          ((1, 'r0', 1), (1, 'r1', 0))),
)}

DEPENDENCIES = ('none', 'data', 'ctrl')
LOAD_ORDERS = (Order.NA, Order.RLX, Order.ACQ, Order.SC)
STORE_ORDERS = (Order.NA, Order.RLX, Order.REL, Order.SC)
WIDTHS = ('int8_t', 'uint8_t', 'int16_t', 'uint16_t', 'int32_t', 'uint32_t', 'int64_t')
VARIABLES = ('x', 'y')


@dataclass(frozen=True)
class PatternSpec:
    """
    One grid point. ``dependencies`` holds one kind per thread; a kind a
    thread cannot carry is normalised to ``none``.
    """

    shape: str
    load_order: Order = Order.RLX
    store_order: Order = Order.RLX
    widths: tuple = (('x', 'int'), ('y', 'int'))
    dependencies: tuple = ('none', 'none')
    fence: Order = None

    @property
    def name(self):
        short = {'int': 'i32', 'int32_t': 'i32', 'uint32_t': 'u32'}
        widths = '.'.join(short.get(w, w.replace('uint', 'u').replace('int', 'i').replace('_t', ''))
                          for _, w in self.widths)
        parts = [self.shape, f'{self.load_order.value}.{self.store_order.value}', widths]
        if any(kind != 'none' for kind in self.dependencies):
            parts.append('.'.join(self.dependencies))
        if self.fence is not None:
            parts.append(f'F{self.fence.value}')
        return '+'.join(parts)


def _dependency_slot(accesses):
    """Kinds of false dependency a thread can carry from its first load."""
    if len(accesses) < 2 or accesses[0].kind != 'R':
        return ()
    return ('data', 'ctrl') if accesses[1].kind == 'W' else ('ctrl',)


def normalise(spec):
    shape = SHAPES.get(spec.shape)
    if shape is None:
        raise UnsupportedShape(spec.shape)
    kinds = list(spec.dependencies) + ['none'] * (len(shape.threads) - len(spec.dependencies))
    kinds = tuple(kind if kind in _dependency_slot(accesses) else 'none'
                  for kind, accesses in zip(kinds, shape.threads))
    kinds_used = {access.kind for accesses in shape.threads for access in accesses}
    load_order = spec.load_order if 'R' in kinds_used else Order.RLX
    return PatternSpec(spec.shape, load_order, spec.store_order, spec.widths, kinds, spec.fence)


def build_test(spec):
    """The source-dialect litmus test of one grid point."""
    spec = normalise(spec)
    shape = SHAPES[spec.shape]
    types = {loc: IntType.parse(width) for loc, width in spec.widths}
    threads = []
    for tid, (accesses, dependency) in enumerate(zip(shape.threads, spec.dependencies)):
        threads.append(_build_thread(tid, accesses, dependency, spec, types))

    atoms = []
    for tid, name, value in shape.relaxed_outcome:
        observable = Observable.location(name) if tid is None else Observable(tid, name)
        atoms.append(Atom(observable, value))
    init = InitState(
        values=tuple((loc, 0) for loc in VARIABLES),
        types=tuple((loc, t) for loc, t in types.items() if t != INT),
    )
    return LitmusTest(
        name=spec.name,
        dialect=Dialect.SOURCE,
        init=init,
        threads=tuple(threads),
        final=FinalPredicate(condition=And(tuple(atoms))),
        metadata=(('shape', spec.shape),),
    )


def _build_thread(tid, accesses, dependency, spec, types):
    body, registers = [], []
    for index, access in enumerate(accesses):
        if access.kind == 'R':
            reg = f'r{len(registers)}'
            registers.append((reg, types.get(access.loc, INT)))
            statement = exprs.Load(reg, access.loc, spec.load_order)
        else:
            value = exprs.Const(access.value)
            if index == 1 and dependency == 'data':
                value = exprs.Add(exprs.Const(access.value - 1), _tautology())
            statement = exprs.Store(access.loc, value, spec.store_order)
        if index == 1:
            if spec.fence is not None:
                body.append(exprs.Fence(spec.fence))
            if dependency == 'ctrl':
                statement = exprs.If(_tautology(), (statement,))
        body.append(statement)
    return Thread(tid=tid, body=tuple(body), registers=tuple(registers))


def _tautology():
    return exprs.Eq(exprs.Reg('r0'), exprs.Reg('r0'))


# ============================================
# GRIDS
# ============================================

def _orders(values, allowed, key):
    orders = []
    for value in values:
        try:
            order = Order(value)
        except ValueError:
            raise InvalidGrid(f'{key}: unknown ordering {value!r}')
        if order not in allowed:
            raise InvalidGrid(f'{key}: {order.value} is not valid here')
        orders.append(order)
    return orders


def expand_grid(grid):
    """
    Every PatternSpec of a grid document, deduplicated by name.

    Keys: ``shapes``, ``loads``, ``stores``, ``widths`` (per variable),
    ``dependencies`` (kinds; unordered pairs are formed across threads)
    and ``fences`` (``none`` or an ordering).
    """
    unknown = set(grid) - {'shapes', 'loads', 'stores', 'widths', 'dependencies', 'fences'}
    if unknown:
        raise InvalidGrid(f'unknown grid keys: {", ".join(sorted(unknown))}')
    shapes = grid.get('shapes') or sorted(SHAPES)
    for shape in shapes:
        if shape not in SHAPES:
            raise UnsupportedShape(shape)
    loads = _orders(grid.get('loads', ['Rlx']), LOAD_ORDERS, 'loads')
    stores = _orders(grid.get('stores', ['Rlx']), STORE_ORDERS, 'stores')

    widths = grid.get('widths') or {}
    per_variable = []
    for loc in VARIABLES:
        choices = widths.get(loc, ['int'])
        for width in choices:
            try:
                IntType.parse(width)
            except ValueError:
                raise InvalidGrid(f'widths.{loc}: unsupported type {width!r}')
        per_variable.append([(loc, width) for width in choices])

    kinds = grid.get('dependencies', ['none'])
    for kind in kinds:
        if kind not in DEPENDENCIES:
            raise InvalidGrid(f'dependencies: unknown kind {kind!r}')
    pairs = list(itertools.combinations_with_replacement(kinds, 2))
    fences = [None if f == 'none' else _orders([f], tuple(Order), 'fences')[0]
              for f in grid.get('fences', ['none'])]

    specs = {}
    for shape, load, store, width, pair, fence in itertools.product(
            shapes, loads, stores, itertools.product(*per_variable), pairs, fences):
        spec = normalise(PatternSpec(shape, load, store, tuple(width), pair, fence))
        specs.setdefault(spec.name, spec)
    return list(specs.values())


def load_grid(path):
    with open(path, encoding='utf-8') as handle:
        grid = yaml.safe_load(handle) or {}
    if not isinstance(grid, dict):
        raise InvalidGrid(f'{path}: expected a mapping at top level')
    return grid


def generate_pattern_tests(grid):
    """Tests for a grid document or an iterable of PatternSpecs, in grid order."""
    specs = expand_grid(grid) if isinstance(grid, dict) else list(grid)
    tests = [build_test(spec) for spec in specs]
    logger.info('Generated %d pattern test(s)', len(tests))
    return tests
