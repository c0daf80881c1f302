"""
Litmus-test data model.

Every type here is a frozen dataclass built from tuples, so a parsed test
can be shared between threads and Celery workers without copying.
"""

from dataclasses import dataclass, field, replace
from enum import Enum


# ============================================
# DIALECTS AND ORDERINGS
# ============================================

class Dialect(str, Enum):
    SOURCE = 'C'
    AARCH64 = 'AArch64'
    ABSTRACT = 'ABS'

    @property
    def is_asm(self):
        return self is not Dialect.SOURCE

    @classmethod
    def from_header(cls, keyword):
        for dialect in cls:
            if dialect.value == keyword:
                return dialect
        raise ValueError(f'unknown litmus header {keyword!r}')


class Order(str, Enum):
    NA = 'NA'
    RLX = 'Rlx'
    ACQ = 'Acq'
    REL = 'Rel'
    ACQ_REL = 'AcqRel'
    SC = 'SC'

    @property
    def is_atomic(self):
        return self is not Order.NA

    @property
    def is_acquire(self):
        return self in (Order.ACQ, Order.ACQ_REL, Order.SC)

    @property
    def is_release(self):
        return self in (Order.REL, Order.ACQ_REL, Order.SC)

    @property
    def c_name(self):
        return C_ORDER_NAMES[self]

    @classmethod
    def from_c(cls, name):
        for order, c_name in C_ORDER_NAMES.items():
            if c_name == name:
                return order
        raise ValueError(f'unknown memory order {name!r}')


C_ORDER_NAMES = {
    Order.RLX: 'memory_order_relaxed',
    Order.ACQ: 'memory_order_acquire',
    Order.REL: 'memory_order_release',
    Order.ACQ_REL: 'memory_order_acq_rel',
    Order.SC: 'memory_order_seq_cst',
}


# ============================================
# VALUES
# ============================================

@dataclass(frozen=True)
class IntType:
    """Fixed-width integer; arithmetic wraps at ``bits``."""

    bits: int = 32
    signed: bool = True

    @property
    def name(self):
        if self == INT:
            return 'int'
        return f"{'' if self.signed else 'u'}int{self.bits}_t"

    def wrap(self, value):
        mask = (1 << self.bits) - 1
        value &= mask
        if self.signed and value >> (self.bits - 1):
            value -= 1 << self.bits
        return value

    @classmethod
    def parse(cls, name):
        name = name.strip()
        if name.startswith('_Atomic(') and name.endswith(')'):
            name = name[len('_Atomic('):-1]
        if name.startswith('atomic_'):
            name = name[len('atomic_'):]
        if name in INT_ALIASES:
            return INT_ALIASES[name]
        raise ValueError(f'unsupported integer type {name!r}')


INT = IntType(32, True)

INT_ALIASES = {
    'int': INT,
    'long': IntType(64, True),
    'unsigned': IntType(32, False),
    'uint': IntType(32, False),
    'llong': IntType(64, True),
    'ullong': IntType(64, False),
}
for _bits in (8, 16, 32, 64):
    INT_ALIASES[f'int{_bits}_t'] = IntType(_bits, True)
    INT_ALIASES[f'uint{_bits}_t'] = IntType(_bits, False)

# Types the source grammar accepts as declaration keywords.
TYPE_KEYWORDS = frozenset(
    list(INT_ALIASES) + [f'atomic_{name}' for name in INT_ALIASES] + ['_Atomic']
)


# ============================================
# OBSERVABLES AND FINAL PREDICATE
# ============================================

@dataclass(frozen=True, order=True)
class Observable:
    """A thread-local register (``thread`` set) or a shared location."""

    thread: int = -1
    name: str = ''

    @property
    def is_register(self):
        return self.thread >= 0

    def key(self, dialect):
        """Outcome key: ``1:r0`` for source tests, ``P1_r0`` for asm tests."""
        if not self.is_register:
            return self.name
        if dialect.is_asm:
            return f'P{self.thread}_{self.name}'
        return f'{self.thread}:{self.name}'

    @classmethod
    def location(cls, name):
        return cls(-1, name)


@dataclass(frozen=True)
class Atom:
    observable: Observable
    value: int


@dataclass(frozen=True)
class Not:
    item: object


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class TrueCond:
    pass


class Quantifier(str, Enum):
    EXISTS = 'exists'
    NOT_EXISTS = '~exists'
    FORALL = 'forall'


@dataclass(frozen=True)
class FinalPredicate:
    quantifier: Quantifier = Quantifier.EXISTS
    condition: object = field(default_factory=TrueCond)

    def observables(self):
        found = []
        _collect_atoms(self.condition, found)
        return tuple(dict.fromkeys(atom.observable for atom in found))

    def evaluate(self, bindings, dialect):
        """Evaluate the condition against an outcome keyed by observable keys."""
        return _evaluate(self.condition, bindings, dialect)


def _collect_atoms(cond, found):
    if isinstance(cond, Atom):
        found.append(cond)
    elif isinstance(cond, Not):
        _collect_atoms(cond.item, found)
    elif isinstance(cond, (And, Or)):
        for item in cond.items:
            _collect_atoms(item, found)


def _evaluate(cond, bindings, dialect):
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, Atom):
        return bindings.get(cond.observable.key(dialect)) == cond.value
    if isinstance(cond, Not):
        return not _evaluate(cond.item, bindings, dialect)
    if isinstance(cond, And):
        return all(_evaluate(item, bindings, dialect) for item in cond.items)
    if isinstance(cond, Or):
        return any(_evaluate(item, bindings, dialect) for item in cond.items)
    raise TypeError(f'not a condition: {cond!r}')


# ============================================
# INITIAL STATE
# ============================================

@dataclass(frozen=True)
class LayoutConstraint:
    base: str
    other: str
    offset: int


@dataclass(frozen=True)
class InitState:
    """
    Initial memory and register state.

    ``values`` keeps assignments in source order and may hold duplicates
    until validation reports them; lookups use the last assignment.
    ``registers`` binds asm registers to integers or location names.
    """

    values: tuple = ()
    types: tuple = ()
    registers: tuple = ()
    layout: tuple = ()

    def locations(self):
        return tuple(dict.fromkeys(loc for loc, _ in self.values))

    def value_of(self, loc, default=0):
        found = default
        for name, value in self.values:
            if name == loc:
                found = value
        return found

    def type_of(self, loc):
        for name, int_type in self.types:
            if name == loc:
                return int_type
        return INT

    def register_value(self, thread, reg):
        for tid, name, value in self.registers:
            if tid == thread and name == reg:
                return value
        return None

    def with_location(self, loc, value=0, int_type=INT):
        types = self.types
        if int_type != INT:
            types = types + ((loc, int_type),)
        return replace(self, values=self.values + ((loc, value),), types=types)


# ============================================
# THREADS AND TESTS
# ============================================

@dataclass(frozen=True)
class Thread:
    """
    One thread body.

    Source threads list ``registers`` as (name, IntType) pairs in order of
    first appearance. Asm threads list ``aliases`` as (alias, register)
    pairs naming the machine registers observed at thread end.
    """

    tid: int
    body: tuple = ()
    registers: tuple = ()
    aliases: tuple = ()

    @property
    def name(self):
        return f'P{self.tid}'

    def register_type(self, reg):
        for name, int_type in self.registers:
            if name == reg:
                return int_type
        return INT

    def register_names(self):
        return tuple(name for name, _ in self.registers)

    def alias_for(self, reg):
        for alias, target in self.aliases:
            if target == reg:
                return alias
        return None


@dataclass(frozen=True)
class LitmusTest:
    name: str
    dialect: Dialect
    init: InitState
    threads: tuple
    final: FinalPredicate
    locations: tuple = ()
    metadata: tuple = ()

    @property
    def is_asm(self):
        return self.dialect.is_asm

    def observables(self):
        """Observables named by the final predicate plus the ``locations`` clause."""
        return tuple(dict.fromkeys(self.final.observables() + self.locations))

    def observable_keys(self):
        return tuple(obs.key(self.dialect) for obs in self.observables())

    def shared_locations(self):
        return self.init.locations()

    def thread(self, tid):
        for thread in self.threads:
            if thread.tid == tid:
                return thread
        raise KeyError(f'P{tid}')

    def meta(self, key, default=None):
        for name, value in self.metadata:
            if name == key:
                return value
        return default

    def with_metadata(self, **entries):
        merged = dict(self.metadata)
        merged.update({key: str(value) for key, value in entries.items()})
        return replace(self, metadata=tuple(merged.items()))
