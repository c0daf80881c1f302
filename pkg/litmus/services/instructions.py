"""
Assembly-dialect instruction model.

One ``OPCODES`` table per ISA maps a mnemonic to an ``OpSpec`` naming its
semantic family; the execution engine and the optimizer dispatch on the
family, never on the spelling. The abstract ISA reuses the AArch64 subset's
families under generic mnemonics.
"""

import re
from dataclasses import dataclass
from typing import Optional

from .types import Dialect


# ============================================
# OPERANDS
# ============================================

@dataclass(frozen=True)
class RegOp:
    name: str

    @property
    def key(self):
        return reg_key(self.name)

    @property
    def width(self):
        return reg_width(self.name)

    @property
    def is_zero(self):
        return self.key is None


@dataclass(frozen=True)
class Imm:
    value: int


@dataclass(frozen=True)
class SymOp:
    """A symbol operand, optionally with a relocation modifier (``:lo12:x``)."""

    symbol: str
    modifier: Optional[str] = None


@dataclass(frozen=True)
class Mem:
    """
    Address operand.

    ``[x]`` sets ``symbol``; ``[X1]`` and ``[X1,#8]`` set ``base``/``offset``;
    ``[X1,:lo12:x]`` sets ``base`` and ``slot`` and addresses the slot that
    holds the address of ``x``.
    """

    symbol: Optional[str] = None
    base: Optional[RegOp] = None
    slot: Optional[str] = None
    offset: int = 0
    modifier: str = 'lo12'

    @property
    def is_stack(self):
        return self.base is not None and self.base.key == 'SP'


@dataclass(frozen=True)
class LabelRef:
    name: str


@dataclass(frozen=True)
class CondOp:
    name: str


@dataclass(frozen=True)
class Instruction:
    op: str
    operands: tuple = ()


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class Stuck:
    """Marks an exhausted unroll; any path reaching it is infeasible."""


# ============================================
# OPCODE TABLES
# ============================================

@dataclass(frozen=True)
class OpSpec:
    family: str
    acquire: Optional[str] = None   # 'A' (LDAR) or 'Q' (LDAPR)
    release: bool = False
    size: Optional[int] = None
    signed: bool = False


def _aarch64_table():
    table = {
        'LDR': OpSpec('load'),
        'LDRB': OpSpec('load', size=8),
        'LDRH': OpSpec('load', size=16),
        'LDRSB': OpSpec('load', size=8, signed=True),
        'LDRSH': OpSpec('load', size=16, signed=True),
        'LDRSW': OpSpec('load', size=32, signed=True),
        'LDAR': OpSpec('load', acquire='A'),
        'LDARB': OpSpec('load', acquire='A', size=8),
        'LDARH': OpSpec('load', acquire='A', size=16),
        'LDAPR': OpSpec('load', acquire='Q'),
        'LDAPRB': OpSpec('load', acquire='Q', size=8),
        'LDAPRH': OpSpec('load', acquire='Q', size=16),
        'STR': OpSpec('store'),
        'STRB': OpSpec('store', size=8),
        'STRH': OpSpec('store', size=16),
        'STLR': OpSpec('store', release=True),
        'STLRB': OpSpec('store', release=True, size=8),
        'STLRH': OpSpec('store', release=True, size=16),
        'STADD': OpSpec('stadd'),
        'STADDL': OpSpec('stadd', release=True),
        'DMB': OpSpec('fence'),
        'ADRP': OpSpec('adrp'),
        'ADD': OpSpec('add'),
        'SUB': OpSpec('sub'),
        'EOR': OpSpec('eor'),
        'SUBS': OpSpec('subs'),
        'CMP': OpSpec('cmp'),
        'MOV': OpSpec('mov'),
        'CSET': OpSpec('cset'),
        'CBZ': OpSpec('cbz'),
        'CBNZ': OpSpec('cbnz'),
        'B': OpSpec('b'),
        'B.EQ': OpSpec('bcond'),
        'B.NE': OpSpec('bcond'),
        'BL': OpSpec('call'),
        'RET': OpSpec('ret'),
        'NOP': OpSpec('nop'),
    }
    for base, family in (('LDADD', 'ldadd'), ('SWP', 'swp'), ('CAS', 'cas')):
        for suffix, acquire, release in (('', None, False), ('A', 'A', False),
                                         ('L', None, True), ('AL', 'A', True)):
            table[base + suffix] = OpSpec(family, acquire=acquire, release=release)
    return table


AARCH64_OPCODES = _aarch64_table()

ABSTRACT_OPCODES = {
    'LOAD': OpSpec('load'),
    'LOAD.ACQ': OpSpec('load', acquire='A'),
    'STORE': OpSpec('store'),
    'STORE.REL': OpSpec('store', release=True),
    'FENCE': OpSpec('fence'),
    'MOV': OpSpec('mov'),
    'ADD': OpSpec('add'),
    'XOR': OpSpec('eor'),
    'CMP': OpSpec('cmp'),
    'BEQ': OpSpec('bcond'),
    'BNE': OpSpec('bcond'),
    'BZ': OpSpec('cbz'),
    'BNZ': OpSpec('cbnz'),
    'JMP': OpSpec('b'),
    'CALL': OpSpec('call'),
    'RET': OpSpec('ret'),
    'NOP': OpSpec('nop'),
}

OPCODES = {
    Dialect.AARCH64: AARCH64_OPCODES,
    Dialect.ABSTRACT: ABSTRACT_OPCODES,
}

MEMORY_FAMILIES = frozenset({'load', 'store', 'ldadd', 'swp', 'cas', 'stadd'})
BRANCH_FAMILIES = frozenset({'b', 'bcond', 'cbz', 'cbnz'})

BARRIERS = {
    'ISH': 'ISH', 'SY': 'ISH', 'ISHLD': 'ISHLD', 'LD': 'ISHLD',
    'ISHST': 'ISHST', 'ST': 'ISHST',
}


def spec_for(dialect, op):
    return OPCODES[dialect].get(op)


def branch_condition(op):
    """Condition tested by a conditional branch: 'EQ' or 'NE'."""
    if op in ('B.EQ', 'BEQ'):
        return 'EQ'
    if op in ('B.NE', 'BNE'):
        return 'NE'
    return None


# ============================================
# REGISTERS
# ============================================

_AARCH64_REG = re.compile(r'^([WX])(\d+|ZR)$')
_ABSTRACT_REG = re.compile(r'^[rR](\d+)$')


def is_register(name):
    name = name.upper()
    return bool(_AARCH64_REG.match(name) or _ABSTRACT_REG.match(name)
                or name in ('SP', 'WSP'))


def reg_key(name):
    """
    Canonical state key of a register.

    W<n> and X<n> share ``R<n>``; the zero registers have no key.
    """
    upper = name.upper()
    if upper in ('SP', 'WSP'):
        return 'SP'
    match = _AARCH64_REG.match(upper)
    if match:
        return None if match.group(2) == 'ZR' else f'R{int(match.group(2))}'
    match = _ABSTRACT_REG.match(upper)
    if match:
        return f'R{int(match.group(1))}'
    raise ValueError(f'not a register: {name!r}')


def reg_width(name):
    return 32 if name.upper().startswith('W') else 64


def normalize_register(name):
    """Spelling used in rendered asm: upper case for AArch64, ``r<n>`` otherwise."""
    if _ABSTRACT_REG.match(name):
        return name.lower()
    return name.upper()


# ============================================
# OPERAND HELPERS
# ============================================

def registers_read(instr, spec):
    """Register operands an instruction reads, in operand order."""
    ops = instr.operands
    family = spec.family
    reads = []
    if family in ('load', 'store', 'ldadd', 'swp', 'cas', 'stadd'):
        mem = ops[-1]
        if family == 'store':
            reads.append(ops[0])
        elif family in ('ldadd', 'swp', 'stadd'):
            reads.append(ops[0])
        elif family == 'cas':
            reads.extend([ops[0], ops[1]])
        if mem.base is not None:
            reads.append(mem.base)
    elif family in ('add', 'sub', 'eor', 'subs'):
        reads.extend(op for op in ops[1:] if isinstance(op, RegOp))
    elif family == 'mov':
        reads.extend(op for op in ops[1:] if isinstance(op, RegOp))
    elif family == 'cmp':
        reads.extend(op for op in ops if isinstance(op, RegOp))
    elif family in ('cbz', 'cbnz'):
        reads.append(ops[0])
    return tuple(op for op in dict.fromkeys(reads) if not op.is_zero)


def register_written(instr, spec):
    """Register an instruction defines, or None."""
    ops = instr.operands
    family = spec.family
    if family in ('load', 'adrp', 'add', 'sub', 'eor', 'subs', 'mov', 'cset'):
        target = ops[0]
    elif family in ('ldadd', 'swp'):
        target = ops[1]
    elif family == 'cas':
        target = ops[0]
    else:
        return None
    return None if target.is_zero else target


def memory_operand(instr, spec):
    if spec.family in MEMORY_FAMILIES:
        return instr.operands[-1]
    return None
