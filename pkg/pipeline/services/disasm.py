"""
Disassembly to litmus: read ``objdump -dr`` output of a compiled unit and
rebuild an AArch64 litmus test from its thread functions.

Addresses in an unlinked object mean nothing on their own (every ``ADRP``
shows page 0), so symbols come from the relocation lines objdump prints
under the instructions they patch. An address operand with no relocation
to explain it cannot be mapped back to a location and is an error.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from litmus.services import parse_asm_litmus
from litmus.services.instructions import Instruction, reg_key, register_written, spec_for
from litmus.services.types import INT, And, Atom, Not, Or, TrueCond
from transforms.services.peephole import optimize_asm

from .exceptions import ThreadMismatch, UnmappedAddress

logger = logging.getLogger(__name__)

SECTION_RE = re.compile(r'^Disassembly of section (\S+):$')
FUNCTION_RE = re.compile(r'^([0-9a-f]+) <([\w.$]+)>:$')
RELOCATION_RE = re.compile(r'^\s*([0-9a-f]+):\s+(R_AARCH64_\w+)\s+(\S+)$')
INSTRUCTION_RE = re.compile(r'^\s*([0-9a-f]+):\s+(?:[0-9a-f]{8}\s+)?([a-z][\w.]*)(?:\s+(.*))?$')
BRANCH_TARGET_RE = re.compile(r'^([0-9a-f]+)(?:\s+<([^>]+)>)?$')
IMMEDIATE_RE = re.compile(r'^#(-?(?:0x[0-9a-f]+|\d+))$')

BRANCHES = frozenset({'b', 'bl', 'cbz', 'cbnz', 'b.eq', 'b.ne'})
PAGE_RELOCATIONS = {'R_AARCH64_ADR_GOT_PAGE': ':got:{}', 'R_AARCH64_ADR_PREL_PG_HI21': '{}'}
LO12_RELOCATIONS = {
    'R_AARCH64_LD64_GOT_LO12_NC': 'got_lo12',
    'R_AARCH64_LDST8_ABS_LO12_NC': 'lo12',
    'R_AARCH64_LDST16_ABS_LO12_NC': 'lo12',
    'R_AARCH64_LDST32_ABS_LO12_NC': 'lo12',
    'R_AARCH64_LDST64_ABS_LO12_NC': 'lo12',
}


@dataclass(frozen=True)
class Relocation:
    offset: int
    kind: str
    symbol: str
    addend: int = 0


@dataclass(frozen=True)
class DisasmInstr:
    address: int
    mnemonic: str
    operands: str = ''


@dataclass
class DisasmFunction:
    name: str
    section: str
    start: int
    instructions: list = field(default_factory=list)

    @property
    def end(self):
        if not self.instructions:
            return self.start
        return self.instructions[-1].address + 4


class SymbolMap:
    """Relocations by (section, offset)."""

    def __init__(self):
        self._relocations = {}

    def __len__(self):
        return len(self._relocations)

    def add(self, section, relocation):
        self._relocations[(section, relocation.offset)] = relocation

    def at(self, section, offset) -> Optional[Relocation]:
        return self._relocations.get((section, offset))

    def require(self, section, offset):
        relocation = self.at(section, offset)
        if relocation is None:
            raise UnmappedAddress(f'{section}+0x{offset:x}')
        return relocation


def _relocation(offset, kind, target):
    symbol, _, addend = target.partition('+')
    if addend and int(addend, 16) != 0:
        raise UnmappedAddress(f'{target} (relocation at 0x{offset:x})')
    return Relocation(offset, kind, symbol)


def parse_objdump(text):
    """Functions by name, in order of appearance, and the relocations that patch them."""
    functions, symbols = {}, SymbolMap()
    section, current = '.text', None
    for line in text.splitlines():
        line = re.sub(r'\s*//.*$', '', line.rstrip())
        if not line.strip():
            continue
        match = SECTION_RE.match(line)
        if match:
            section, current = match.group(1), None
            continue
        match = FUNCTION_RE.match(line)
        if match:
            current = DisasmFunction(match.group(2), section, int(match.group(1), 16))
            functions[current.name] = current
            continue
        match = RELOCATION_RE.match(line)
        if match:
            symbols.add(section, _relocation(int(match.group(1), 16), match.group(2), match.group(3)))
            continue
        match = INSTRUCTION_RE.match(line)
        if match and current is not None:
            current.instructions.append(
                DisasmInstr(int(match.group(1), 16), match.group(2), (match.group(3) or '').strip()))
    logger.debug('Parsed %d function(s) and %d relocation(s)', len(functions), len(symbols))
    return functions, symbols


# ============================================
# INSTRUCTION TRANSLATION
# ============================================

def split_operands(text):
    parts, depth, current = [], 0, []
    for char in text:
        if char == '[':
            depth += 1
        elif char == ']':
            depth -= 1
        if char == ',' and depth == 0:
            parts.append(''.join(current).strip())
            current = []
        else:
            current.append(char)
    if ''.join(current).strip():
        parts.append(''.join(current).strip())
    return parts


def _plain(operand):
    match = IMMEDIATE_RE.match(operand)
    if match:
        return f'#{int(match.group(1), 0)}'
    return operand.upper()


def _memory(operand, relocation):
    inner = split_operands(operand.strip()[1:-1].rstrip('!'))
    base = inner[0].upper()
    if relocation is not None and relocation.kind in LO12_RELOCATIONS:
        return f'[{base},:{LO12_RELOCATIONS[relocation.kind]}:{relocation.symbol}]'
    if len(inner) == 1 or _plain(inner[1]) == '#0':
        return f'[{base}]'
    return f'[{base},{_plain(inner[1])}]'


class _FunctionTranslator:

    def __init__(self, function, symbols):
        self.function = function
        self.symbols = symbols

    def relocation(self, instr):
        return self.symbols.at(self.function.section, instr.address)

    def branch_targets(self):
        targets = set()
        for instr in self.function.instructions:
            if instr.mnemonic in BRANCHES and instr.mnemonic != 'bl':
                targets.add(self._target_address(instr))
        return targets

    def _target_address(self, instr):
        match = BRANCH_TARGET_RE.match(split_operands(instr.operands)[-1])
        if match is None:
            raise UnmappedAddress(instr.operands)
        address = int(match.group(1), 16)
        if not self.function.start <= address <= self.function.end:
            raise UnmappedAddress(f'0x{address:x} (branch in {self.function.name})')
        return address

    def lines(self):
        targets = self.branch_targets()
        lines = []
        for instr in self.function.instructions:
            if instr.address in targets:
                lines.append(f'L{instr.address:x}:')
            lines.append(self.translate(instr))
        if self.function.end in targets:
            lines.append(f'L{self.function.end:x}:')
        return lines

    def translate(self, instr):
        mnemonic = instr.mnemonic.upper()
        operands = split_operands(instr.operands)
        relocation = self.relocation(instr)

        if instr.mnemonic == 'bl':
            relocation = self.symbols.require(self.function.section, instr.address)
            return f'BL {relocation.symbol}'
        if instr.mnemonic in BRANCHES:
            label = f'L{self._target_address(instr):x}'
            return f"{mnemonic} {','.join([_plain(op) for op in operands[:-1]] + [label])}"
        if instr.mnemonic == 'adrp':
            relocation = self.symbols.require(self.function.section, instr.address)
            if relocation.kind not in PAGE_RELOCATIONS:
                raise UnmappedAddress(f'{relocation.kind} on adrp at 0x{instr.address:x}')
            page = PAGE_RELOCATIONS[relocation.kind].format(relocation.symbol)
            return f'ADRP {_plain(operands[0])},{page}'
        if instr.mnemonic == 'add' and relocation is not None:
            if relocation.kind != 'R_AARCH64_ADD_ABS_LO12_NC':
                raise UnmappedAddress(f'{relocation.kind} on add at 0x{instr.address:x}')
            return f'ADD {_plain(operands[0])},{_plain(operands[1])},:lo12:{relocation.symbol}'

        rendered = []
        for operand in operands:
            if operand.startswith('['):
                rendered.append(_memory(operand, relocation))
            else:
                rendered.append(_plain(operand))
        if not rendered:
            return mnemonic
        return f"{mnemonic} {','.join(rendered)}"


# ============================================
# LITMUS RECONSTRUCTION
# ============================================

def _render_init(test):
    items = []
    for loc, value in test.init.values:
        int_type = test.init.type_of(loc)
        prefix = '' if int_type == INT else f'{int_type.name} '
        items.append(f'{prefix}{loc}={value}')
    return '{ ' + ''.join(f'{item}; ' for item in items) + '}'


def _keep(cond, mapped):
    """``cond`` with register atoms outside ``mapped`` replaced by ``true``."""
    if isinstance(cond, Atom):
        observable = cond.observable
        if observable.is_register and (observable.thread, observable.name) not in mapped:
            return TrueCond()
        return cond
    if isinstance(cond, Not):
        item = _keep(cond.item, mapped)
        return item if isinstance(item, TrueCond) else Not(item)
    if isinstance(cond, And):
        items = tuple(item for item in (_keep(i, mapped) for i in cond.items)
                      if not isinstance(item, TrueCond))
        if not items:
            return TrueCond()
        return items[0] if len(items) == 1 else And(items)
    if isinstance(cond, Or):
        items = tuple(_keep(item, mapped) for item in cond.items)
        if any(isinstance(item, TrueCond) for item in items):
            return TrueCond()
        return items[0] if len(items) == 1 else Or(items)
    return cond


def _written_registers(test, thread):
    written = set()
    for item in thread.body:
        spec = spec_for(test.dialect, item.op) if isinstance(item, Instruction) else None
        if spec is not None:
            target = register_written(item, spec)
            if target is not None:
                written.add(target.key)
    return written


def asm_to_litmus(source, functions, symbols, register_plan=(), rules=None, name=None):
    """
    Rebuild ``source`` as an AArch64 litmus test from its compiled functions.

    ``register_plan`` lists (thread, register, machine register) triples;
    a source register becomes observable only when its planned machine
    register is written by the compiled thread. Register atoms of the
    final condition with no such register become ``true``. The result is
    run through the peephole optimizer; returns the test and its
    ``OptStats``.
    """
    expected = [thread.name for thread in source.threads]
    missing = [fname for fname in expected if fname not in functions]
    if missing:
        raise ThreadMismatch(expected, list(functions))

    lines = [f'AArch64 {name or source.name}', _render_init(source)]
    for fname in expected:
        lines.append(f'{fname} {{')
        lines.extend(f'  {line}' for line in _FunctionTranslator(functions[fname], symbols).lines())
        lines.append('}')
    lines.append('exists (true)')
    parsed = parse_asm_litmus('\n'.join(lines) + '\n')

    mapped, threads = set(), []
    for thread in parsed.threads:
        written = _written_registers(parsed, thread)
        aliases = []
        for tid, reg, machine in register_plan:
            if tid == thread.tid and reg_key(machine) in written:
                aliases.append((reg, machine))
                mapped.add((tid, reg))
        threads.append(replace(thread, aliases=tuple(aliases)))

    locations = tuple(observable for observable in source.locations
                      if not observable.is_register or (observable.thread, observable.name) in mapped)
    target = replace(
        parsed,
        threads=tuple(threads),
        final=replace(source.final, condition=_keep(source.final.condition, mapped)),
        locations=locations,
    )
    dropped = [obs.key(source.dialect) for obs in source.observables()
               if obs.is_register and (obs.thread, obs.name) not in mapped]
    if dropped:
        logger.info('%s: register(s) %s did not survive compilation', source.name, ', '.join(dropped))

    optimized, stats = optimize_asm(target, rules)
    optimized = optimized.with_metadata(events_before=stats.events_before, events_after=stats.events_after)
    return optimized, stats
