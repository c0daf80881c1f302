"""
One test through one compiler profile: persist, compile, disassemble,
rebuild the litmus test, simulate both sides and compare.

A stage failure never escapes ``run_pipeline``; it is recorded with the
stage that raised it so a batch keeps going.
"""

import logging
import shutil
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from diffcheck.serializers import DiffRecordSerializer, diff_record_line
from diffcheck.services import DiffError, compare_outcomes, infer_state_mapping
from executions.services.exceptions import SimulationError
from executions.services.simulate import simulate
from litmus.services import LitmusError, load_litmus_file, render_litmus
from memory_models.services import ModelError
from transforms.services.exceptions import TransformError
from transforms.services.persistence import persist_locals, resolve_plan

from .disasm import asm_to_litmus, parse_objdump
from .exceptions import PipelineError
from .l2c import prepare_source
from .mapping_compiler import CompileOptions, compile_mapping, render_objdump
from .profiles import MAPPING, PREBUILT_ASM, pipeline_setting
from .toolchain import compile_and_disassemble

logger = logging.getLogger(__name__)

STAGES = (
    'parse', 'persist', 'prepare', 'compile', 'disassemble', 's2l',
    'simulate-source', 'simulate-target', 'compare',
)
STAGE_ERRORS = (
    PipelineError, LitmusError, SimulationError, ModelError, DiffError, TransformError, OSError,
)


def parse_rule_list(spelling):
    """``'adrp-collapse,reload'`` -> a tuple of rule names; empty means every rule."""
    if not spelling:
        return None
    return tuple(rule.strip() for rule in spelling.split(',') if rule.strip()) or None


@dataclass(frozen=True)
class RunOptions:
    """``persist`` takes the spellings ``resolve_plan`` accepts; None reads the setting."""

    persist: object = None
    racy_policy: Optional[str] = None
    output_dir: Optional[Path] = None
    peephole_rules: Optional[tuple] = None

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        if data.get('output_dir'):
            data['output_dir'] = Path(data['output_dir'])
        return cls(**data)

    def to_dict(self):
        return {
            'persist': self.persist,
            'racy_policy': self.racy_policy,
            'output_dir': str(self.output_dir) if self.output_dir else None,
            'peephole_rules': list(self.peephole_rules) if self.peephole_rules else None,
        }


@dataclass
class PipelineRun:
    test_name: str
    profile_name: str
    report: object = None
    failure_stage: str = ''
    error: str = ''
    timings: dict = field(default_factory=dict)
    artifact_dir: str = ''

    @property
    def failed(self):
        return bool(self.failure_stage)

    @property
    def classification(self):
        return '' if self.report is None else self.report.classification.value

    @property
    def is_positive(self):
        return self.report is not None and self.report.is_positive

    def as_dict(self):
        record = {
            'name': self.test_name,
            'profile': self.profile_name,
            'classification': self.classification,
            'failure_stage': self.failure_stage,
            'error': self.error,
            'novel_outcomes': [],
            'missing_outcomes': [],
            'dropped': [],
            'races': [],
            'timings': {stage: round(seconds, 6) for stage, seconds in self.timings.items()},
            'artifact_dir': self.artifact_dir,
        }
        if self.report is not None:
            diff = DiffRecordSerializer(self.report, context={'name': self.test_name}).data
            for key in ('novel_outcomes', 'missing_outcomes', 'dropped', 'races'):
                record[key] = list(diff[key])
        return record


class _Run:
    """Stage bookkeeping for one run."""

    def __init__(self, record, artifact_dir):
        self.record = record
        self.stage = None
        self.artifact_dir = artifact_dir

    @contextmanager
    def step(self, stage):
        self.stage = stage
        started = time.perf_counter()
        try:
            yield
        finally:
            self.record.timings[stage] = time.perf_counter() - started

    def write(self, filename, text):
        if self.artifact_dir is not None:
            (self.artifact_dir / filename).write_text(text, encoding='utf-8')


def _artifact_dir(options, profile, test):
    if options.output_dir is None:
        return None
    directory = Path(options.output_dir) / profile.name / test.name
    # A re-run must not leave artifacts from stages it never reached.
    if directory.exists():
        shutil.rmtree(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def run_pipeline(test, profile, options=None):
    """
    Run ``test`` through ``profile``; returns a ``PipelineRun``.

    Artifacts (``src.litmus``, ``unit.c``, ``disasm.txt``, ``tgt.litmus``,
    ``src.log``, ``tgt.log``, ``diff.json``) go to
    ``<output_dir>/<profile>/<test>/`` when an output directory is set.
    """
    options = options or RunOptions()
    record = PipelineRun(test.name, profile.name)
    run = _Run(record, None)
    try:
        run.stage = 'persist'
        run.artifact_dir = _artifact_dir(options, profile, test)
        record.artifact_dir = str(run.artifact_dir) if run.artifact_dir else ''
        source, target = _compile(run, test, profile, options)

        with run.step('simulate-source'):
            src_result = simulate(source, profile.source_model, collect_races=True)
        run.write('src.log', src_result.log)
        with run.step('simulate-target'):
            tgt_result = simulate(target, profile.target_model)
        run.write('tgt.log', tgt_result.log)

        with run.step('compare'):
            mapping = infer_state_mapping(source, target)
            record.report = compare_outcomes(
                src_result.outcomes, tgt_result.outcomes, mapping,
                races=src_result.races,
                racy_policy=options.racy_policy,
                source_name=source.name,
                target_name=f'{target.name}@{profile.name}',
            )
        run.write('diff.json', _diff_json(record))
    except STAGE_ERRORS as exc:
        record.failure_stage = run.stage
        record.error = str(exc)
        logger.warning('%s via %s failed at %s: %s', test.name, profile.name, run.stage, exc)
    else:
        logger.info('%s via %s: %s', test.name, profile.name, record.report.classification.label)
    return record


def _compile(run, test, profile, options):
    """The persisted source test and its compiled litmus test."""
    if profile.kind == PREBUILT_ASM:
        with run.step('s2l'):
            target = load_litmus_file(profile.prebuilt_path(test.name))
        run.write('src.litmus', render_litmus(test))
        run.write('tgt.litmus', render_litmus(target))
        return test, target

    with run.step('persist'):
        spelling = options.persist if options.persist is not None else pipeline_setting('PERSIST_LOCALS', 'auto')
        source = persist_locals(test, resolve_plan(test, spelling)) if not test.is_asm else test
    run.write('src.litmus', render_litmus(source))

    with run.step('prepare'):
        prepared = prepare_source(source)
    run.write('unit.c', prepared.text)

    plan = ()
    if profile.kind == MAPPING:
        with run.step('compile'):
            unit = compile_mapping(source, CompileOptions.from_profile(profile))
            listing = render_objdump(unit)
        plan = prepared.register_plan
    else:
        listing, _ = compile_and_disassemble(prepared.text, profile, run.artifact_dir, step=run.step)
    run.write('disasm.txt', listing)

    with run.step('s2l'):
        functions, symbols = parse_objdump(listing)
        target, _ = asm_to_litmus(source, functions, symbols, plan, rules=options.peephole_rules)
        target = target.with_metadata(compiler=profile.name)
    run.write('tgt.litmus', render_litmus(target))
    return source, target


def _diff_json(record):
    return diff_record_line(record.report, name=record.test_name, timings=record.timings) + '\n'
