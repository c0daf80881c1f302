import json
import subprocess
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.conf import settings
from django.contrib.auth import get_user_model
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings
from rest_framework import status
from rest_framework.test import APITestCase

from config.celery import app as celery_app
from diffcheck.services import Classification, compare_outcomes, infer_state_mapping
from executions.services.simulate import simulate
from litmus.services import load_litmus_file, parse_litmus
from pipeline.factories import BatchRunFactory, PipelineRunRecordFactory
from pipeline.models import BatchRun, PipelineRunRecord
from pipeline.services.batch import record_batch, run_batch
from pipeline.services.disasm import SymbolMap, asm_to_litmus, parse_objdump
from pipeline.services.exceptions import (
    CompileFailed,
    DisassembleFailed,
    InvalidProfile,
    StageTimeout,
    ThreadMismatch,
    ToolNotFound,
    UnknownProfile,
    UnmappedAddress,
    UnsupportedConstruct,
)
from pipeline.services.l2c import prepare_source, register_plan
from pipeline.services.mapping_compiler import CompileOptions, compile_mapping, render_objdump
from pipeline.services.profiles import CompilerProfile, get_profile, load_profiles, parse_profiles
from pipeline.services.runner import RunOptions, run_pipeline
from pipeline.services.summary import COLUMNS, render_summary, summarize
from pipeline.services.toolchain import compile_and_disassemble, expand_command, run_tool
from pipeline.tasks import run_pipeline_task
from transforms.services.generator import PatternSpec, build_test, generate_pattern_tests, load_grid
from transforms.services.persistence import persist_locals

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'
GRIDS = Path(settings.BASE_DIR) / 'transforms' / 'grids'
GOLDEN = Path(__file__).resolve().parent / 'golden'

ONE_THREAD = """C ONE
{ x = 0; }
P0 (atomic_int* x) {
  atomic_store_explicit(x, 1, memory_order_relaxed);
}
exists (x=1)
"""

WIDE_IMMEDIATE = """C WIDE
{ x = 0; }
P0 (atomic_int* x) {
  atomic_store_explicit(x, 70000, memory_order_relaxed);
}
exists (x=70000)
"""

NINE_REGISTERS = 'C NINE\n{ x = 0; }\nP0 (atomic_int* x) {\n' + ''.join(
    f'  int r{i} = atomic_load_explicit(x, memory_order_relaxed);\n' for i in range(9)
) + '}\nexists (0:r0=0)\n'

UNRELOCATED_ADRP = """
Disassembly of section .text:

0000000000000000 <P0>:
   0:	adrp	x8, 0 <P0>
   4:	ret
"""

ESCAPING_BRANCH = """
Disassembly of section .text:

0000000000000000 <P0>:
   0:	b	40 <P1>
   4:	ret
"""

OFFSET_RELOCATION = """
Disassembly of section .text:

0000000000000000 <P0>:
   0:	adrp	x8, 0 <P0>
			0: R_AARCH64_ADR_PREL_PG_HI21	x+0x4
   4:	ret
"""

NO_ARTIFACTS = {**settings.PIPELINE, 'OUTPUT_DIR': ''}

ARTIFACTS = ('src.litmus', 'unit.c', 'disasm.txt', 'tgt.litmus', 'src.log', 'tgt.log', 'diff.json')


def corpus(name):
    return load_litmus_file(CORPUS / name)


def golden(name):
    return (GOLDEN / name).read_text(encoding='utf-8')


def mnemonics(unit, index):
    return [instr.mnemonic for instr in unit.functions[index].instructions()]


def without_timings(record):
    return {key: value for key, value in record.items() if key != 'timings'}


class EagerCeleryMixin:
    """Run Celery groups in-process."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._eager = celery_app.conf.task_always_eager
        celery_app.conf.task_always_eager = True

    @classmethod
    def tearDownClass(cls):
        celery_app.conf.task_always_eager = cls._eager
        super().tearDownClass()


# ============================================
# LITMUS TO C
# ============================================

class LitmusToCTests(SimpleTestCase):

    def test_translation_unit_for_persisted_load_buffering(self):
        prepared = prepare_source(persist_locals(corpus('LB.litmus'), 'auto'))
        text = prepared.text
        self.assertIn('// persisted: q0_r0,q1_r0', text)
        self.assertIn('extern int q1_r0;', text)
        self.assertIn('void P0(void)', text)
        self.assertIn('  int r0 = 0;', text)
        self.assertIn('  r0 = __atomic_load_n(&x, __ATOMIC_RELAXED);', text)
        self.assertIn('  __atomic_store_n(&y, 1, __ATOMIC_RELAXED);', text)
        self.assertIn('  q0_r0 = r0;', text)

    def test_register_plan(self):
        self.assertEqual(register_plan(corpus('LB.litmus')), ((0, 'r0', 'X0'), (1, 'r0', 'X0')))
        prepared = prepare_source(corpus('LB.litmus'))
        self.assertEqual(prepared.register_for(1, 'r0'), 'X0')
        self.assertIsNone(prepared.register_for(1, 'r7'))

    def test_release_acquire_builtins(self):
        text = prepare_source(corpus('MP+rmw.litmus')).text
        self.assertIn('__atomic_store_n(&y, 1, __ATOMIC_RELEASE)', text)
        self.assertIn('r1 = __atomic_fetch_add(&y, 1, __ATOMIC_ACQUIRE)', text)

    def test_control_dependency_becomes_an_if(self):
        text = prepare_source(build_test(PatternSpec('LB', dependencies=('ctrl', 'ctrl')))).text
        self.assertIn('if ((r0 == r0)) {', text)

    def test_unsupported_inputs(self):
        with self.assertRaises(UnsupportedConstruct):
            prepare_source(corpus('asm/LB.litmus'))
        with self.assertRaises(UnsupportedConstruct):
            prepare_source(parse_litmus(NINE_REGISTERS))


# ============================================
# MAPPING COMPILER
# ============================================

class MappingCompilerTests(SimpleTestCase):

    def test_load_buffering_listing_matches_golden(self):
        unit = compile_mapping(persist_locals(corpus('LB.litmus'), 'auto'), CompileOptions())
        self.assertEqual(render_objdump(unit), golden('LB-mapping-O2.objdump'))

    def test_unoptimised_code_keeps_every_access(self):
        unit = compile_mapping(corpus('MP+rmw.litmus'), CompileOptions(opt_level=0))
        self.assertEqual(mnemonics(unit, 1), ['mov', 'adrp', 'ldr', 'ldadda', 'adrp', 'ldr', 'ldr', 'ret'])

    def test_dead_results_are_deleted_and_fetch_add_loses_its_acquire(self):
        unit = compile_mapping(corpus('MP+rmw.litmus'), CompileOptions(opt_level=2))
        self.assertEqual(mnemonics(unit, 1), ['mov', 'adrp', 'ldr', 'stadd', 'ret'])

    def test_persisted_register_keeps_its_load(self):
        source = persist_locals(corpus('MP+rmw.litmus'), {'P1': ['r0']})
        ops = mnemonics(compile_mapping(source), 1)
        self.assertIn('stadd', ops)
        self.assertNotIn('ldadda', ops)
        self.assertEqual(ops.count('str'), 1)

    def test_false_dependencies_fold_away(self):
        test = persist_locals(build_test(PatternSpec('LB', dependencies=('data', 'ctrl'))), 'auto')
        optimised = compile_mapping(test, CompileOptions(opt_level=2))
        unoptimised = compile_mapping(test, CompileOptions(opt_level=0))
        for index in (0, 1):
            self.assertFalse({'cmp', 'cset', 'cbz', 'b.ne'} & set(mnemonics(optimised, index)))
        self.assertIn('cmp', mnemonics(unoptimised, 0))
        self.assertIn('b.ne', mnemonics(unoptimised, 1))
        self.assertIn('<P1+0x', render_objdump(unoptimised))

    def test_non_pic_addressing(self):
        unit = compile_mapping(persist_locals(corpus('LB.litmus'), 'auto'), CompileOptions(pic=False))
        listing = render_objdump(unit)
        self.assertIn('R_AARCH64_ADR_PREL_PG_HI21\tx', listing)
        self.assertIn('R_AARCH64_LDST32_ABS_LO12_NC\tq0_r0', listing)
        self.assertNotIn('GOT', listing)

    def test_acquire_pc_loads(self):
        unit = compile_mapping(corpus('MP.litmus'), CompileOptions(acquire_pc=True))
        self.assertIn('ldapr', mnemonics(unit, 1))
        self.assertIn('stlr', mnemonics(unit, 0))

    def test_unsupported_constructs(self):
        with self.assertRaises(UnsupportedConstruct):
            compile_mapping(parse_litmus(WIDE_IMMEDIATE))
        with self.assertRaises(UnsupportedConstruct):
            compile_mapping(corpus('asm/LB.litmus'))


# ============================================
# DISASSEMBLY TO LITMUS
# ============================================

class DisassemblyTests(SimpleTestCase):

    def test_mapping_listing_round_trips_to_an_equal_test(self):
        source = persist_locals(corpus('MP.litmus'), 'auto')
        prepared = prepare_source(source)
        functions, symbols = parse_objdump(render_objdump(compile_mapping(source)))
        target, stats = asm_to_litmus(source, functions, symbols, prepared.register_plan)
        self.assertEqual([thread.name for thread in target.threads], ['P0', 'P1'])
        self.assertLess(stats.events_after, stats.events_before)
        self.assertEqual(target.meta('events_after'), str(stats.events_after))
        src = simulate(source, 'rc11_lite', collect_races=True)
        tgt = simulate(target, 'armv8_lite')
        report = compare_outcomes(src.outcomes, tgt.outcomes, infer_state_mapping(source, target),
                                  races=src.races)
        self.assertEqual(report.classification, Classification.EQUAL)

    def test_toolchain_listing_exposes_the_deleted_acquire(self):
        source = persist_locals(corpus('MP+rmw.litmus'), {'P1': ['r0']})
        functions, symbols = parse_objdump(golden('MP+rmw-toolchain.objdump'))
        self.assertEqual(list(functions), ['P0', 'P1'])
        self.assertEqual(functions['P1'].start, 0x1c)
        target, _ = asm_to_litmus(source, functions, symbols)
        self.assertIn('STADD', [item.op for item in target.thread(1).body])
        src = simulate(source, 'rc11_lite', collect_races=True)
        tgt = simulate(target, 'armv8_lite')
        report = compare_outcomes(src.outcomes, tgt.outcomes, infer_state_mapping(source, target),
                                  races=src.races)
        self.assertEqual(report.classification, Classification.POSITIVE)
        self.assertEqual([o.render() for o in report.sorted_novel()], ['[q1_r0=0; y=2;]'])

    def test_unmapped_registers_leave_the_final_condition(self):
        source = corpus('MP+rmw.litmus')
        functions, symbols = parse_objdump(render_objdump(compile_mapping(source)))
        with self.assertLogs('pipeline.services.disasm', level='INFO'):
            target, _ = asm_to_litmus(source, functions, symbols, register_plan(source))
        self.assertEqual(target.observable_keys(), ('y',))

    def test_adrp_without_relocation(self):
        functions, symbols = parse_objdump(UNRELOCATED_ADRP)
        with self.assertRaises(UnmappedAddress):
            asm_to_litmus(parse_litmus(ONE_THREAD), functions, symbols)

    def test_branch_outside_the_function(self):
        functions, symbols = parse_objdump(ESCAPING_BRANCH)
        with self.assertRaises(UnmappedAddress):
            asm_to_litmus(parse_litmus(ONE_THREAD), functions, symbols)

    def test_relocation_with_an_offset(self):
        with self.assertRaises(UnmappedAddress):
            parse_objdump(OFFSET_RELOCATION)

    def test_missing_thread_function(self):
        functions, symbols = parse_objdump(UNRELOCATED_ADRP)
        with self.assertRaises(ThreadMismatch) as context:
            asm_to_litmus(corpus('SB.litmus'), functions, symbols)
        self.assertEqual(context.exception.found, ('P0',))
        with self.assertRaises(ThreadMismatch):
            asm_to_litmus(corpus('SB.litmus'), {}, SymbolMap())


# ============================================
# PROFILES AND TOOLS
# ============================================

class ProfileTests(SimpleTestCase):

    def test_shipped_profiles(self):
        profiles = load_profiles()
        self.assertIn('mapping-O2', profiles)
        self.assertEqual(profiles['gcc-O2'].kind, 'toolchain')
        self.assertTrue(profiles['gcc-O2'].spawns_processes)
        self.assertFalse(profiles['mapping-O0'].spawns_processes)
        self.assertEqual(profiles['mapping-O0'].option('opt_level'), 0)
        self.assertEqual(profiles['corpus-asm'].prebuilt_path('LB'), CORPUS / 'asm' / 'LB.litmus')

    def test_model_overrides(self):
        profile = get_profile('mapping-O2').with_models(source_model='rc11_lb')
        self.assertEqual((profile.source_model, profile.target_model), ('rc11_lb', 'armv8_lite'))
        self.assertEqual(CompilerProfile.from_dict(profile.to_dict()), profile)

    def test_unknown_profile(self):
        with self.assertRaises(UnknownProfile) as context:
            get_profile('icc-O2')
        self.assertIn('mapping-O2', context.exception.known)

    def test_invalid_profiles(self):
        invalid = [
            {'profiles': [{'name': 'a'}, {'name': 'a'}]},
            {'profiles': [{'name': 'cc', 'kind': 'toolchain', 'compile_command': ['cc', '-c'],
                           'disassemble_command': ['objdump', '-dr', '{input}']}]},
            {'profiles': [{'name': 'abs', 'kind': 'mapping', 'isa': 'ABS'}]},
            {'profiles': [{'name': 'power', 'target_model': 'power'}]},
            {'profiles': [{'name': 'asm', 'kind': 'prebuilt-asm'}]},
            {'profiles': [{'name': 'O9', 'options': {'opt_level': 9}}]},
            {'profiles': [{'name': 'linked', 'kind': 'toolchain',
                           'compile_command': ['cc', '-g', '{input}', '-o', '{output}'],
                           'disassemble_command': ['objdump', '-dr', '{input}']}]},
            {'profiles': [{'name': 'stripped', 'kind': 'toolchain',
                           'compile_command': ['cc', '-c', '{input}', '-o', '{output}'],
                           'disassemble_command': ['objdump', '-dr', '{input}']}]},
            {'entries': []},
        ]
        for document in invalid:
            with self.subTest(document=document):
                with self.assertRaises(InvalidProfile):
                    parse_profiles(document)

    def test_abstract_isa_profile(self):
        profiles = parse_profiles({'profiles': [
            {'name': 'abs-asm', 'kind': 'prebuilt-asm', 'isa': 'ABS', 'prebuilt_dir': 'abs'},
        ]})
        self.assertEqual(profiles['abs-asm'].isa, 'ABS')
        self.assertEqual(profiles['abs-asm'].target_model, 'armv8_lite')

    def test_toolchain_flags(self):
        profiles = parse_profiles({'profiles': [{
            'name': 'cc', 'kind': 'toolchain',
            'compile_command': ['cc', '-O1', '-g', '-c', '{input}', '-o', '{output}'],
            'disassemble_command': ['objdump', '-dr', '{input}'],
        }]})
        self.assertTrue(profiles['cc'].spawns_processes)

    def test_malformed_profiles_file(self):
        with tempfile.NamedTemporaryFile('w', suffix='.json', delete=False) as handle:
            handle.write('{"profiles": [')
        try:
            with self.assertRaises(InvalidProfile):
                load_profiles(handle.name)
        finally:
            Path(handle.name).unlink()


class ToolchainTests(SimpleTestCase):

    def test_expand_command(self):
        argv = expand_command(['cc', '-c', '{input}', '-o', '{output}'], input=Path('a.c'), output='a.o')
        self.assertEqual(argv, ['cc', '-c', 'a.c', '-o', 'a.o'])

    def test_missing_tool(self):
        with self.assertRaises(ToolNotFound):
            run_tool(['no-such-compiler-for-litmus'], 'compile', CompileFailed)

    @mock.patch('pipeline.services.toolchain.subprocess.run')
    def test_nonzero_exit(self, run):
        run.return_value = subprocess.CompletedProcess(['cc'], 1, '', 'unit.c:3: error: boom\n')
        with self.assertRaises(CompileFailed) as context:
            run_tool(['cc'], 'compile', CompileFailed)
        self.assertEqual(context.exception.exit_code, 1)
        self.assertIn('boom', str(context.exception))

    @mock.patch('pipeline.services.toolchain.subprocess.run')
    def test_compile_and_disassemble(self, run):
        run.side_effect = [
            subprocess.CompletedProcess(['cc'], 0, '', ''),
            subprocess.CompletedProcess(['objdump'], 0, golden('MP+rmw-toolchain.objdump'), ''),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            listing, symbols = compile_and_disassemble('int x;\n', get_profile('gcc-O2'), Path(tmp))
            self.assertEqual((Path(tmp) / 'unit.c').read_text(encoding='utf-8'), 'int x;\n')
        self.assertEqual(listing, golden('MP+rmw-toolchain.objdump'))
        self.assertIsInstance(symbols, SymbolMap)
        self.assertGreater(len(symbols), 0)
        compile_argv, disassemble_argv = (call.args[0] for call in run.call_args_list)
        self.assertEqual(compile_argv[-3:], [str(Path(tmp) / 'unit.c'), '-o', str(Path(tmp) / 'unit.o')])
        self.assertEqual(disassemble_argv[-1], str(Path(tmp) / 'unit.o'))

    @mock.patch('pipeline.services.toolchain.subprocess.run')
    def test_compile_and_disassemble_failures(self, run):
        profile = get_profile('gcc-O2')
        cases = [
            ([FileNotFoundError()], ToolNotFound),
            ([subprocess.CompletedProcess(['cc'], 1, '', 'unit.c:1: error\n')], CompileFailed),
            ([subprocess.CompletedProcess(['cc'], 0, '', ''),
              subprocess.CompletedProcess(['objdump'], 2, '', 'unit.o: file format not recognized\n')],
             DisassembleFailed),
        ]
        for effects, error in cases:
            with self.subTest(error=error.__name__):
                run.side_effect = effects
                with self.assertRaises(error):
                    compile_and_disassemble('int x;\n', profile)

    @mock.patch('pipeline.services.toolchain.subprocess.run')
    def test_timeout(self, run):
        run.side_effect = subprocess.TimeoutExpired(['cc'], 5)
        with self.assertRaises(StageTimeout):
            run_tool(['cc'], 'compile', CompileFailed, timeout=5)


# ============================================
# RUNS
# ============================================

class RunPipelineTests(SimpleTestCase):

    def setUp(self):
        self.profile = get_profile('mapping-O2')

    def test_load_buffering_is_positive(self):
        run = run_pipeline(corpus('LB.litmus'), self.profile)
        self.assertFalse(run.failed)
        self.assertEqual(run.report.classification, Classification.POSITIVE)
        self.assertEqual(len(run.report.novel_outcomes), 1)
        self.assertEqual(run.report.target_name, 'LB@mapping-O2')

    def test_load_buffering_with_a_permissive_source_model(self):
        run = run_pipeline(corpus('LB.litmus'), self.profile.with_models(source_model='rc11_lb'))
        self.assertEqual(run.report.classification, Classification.EQUAL)

    def test_message_passing_is_equal(self):
        for name in ('mapping-O0', 'mapping-O2', 'mapping-O2-nopic', 'mapping-O2-rcpc'):
            with self.subTest(profile=name):
                run = run_pipeline(corpus('MP.litmus'), get_profile(name))
                self.assertEqual(run.report.classification, Classification.EQUAL)

    def test_deleted_acquire_depends_on_persistence(self):
        source = corpus('MP+rmw.litmus')
        masked = run_pipeline(source, self.profile, RunOptions(persist='off'))
        self.assertEqual(masked.report.classification, Classification.EQUAL)

        exposed = run_pipeline(source, self.profile, RunOptions(persist={'P1': ['r0']}))
        self.assertEqual(exposed.report.classification, Classification.POSITIVE)
        novel = [o.render() for o in exposed.report.sorted_novel()]
        self.assertTrue(any('q1_r0=0;' in o and 'y=2;' in o for o in novel))

        kept = run_pipeline(source, self.profile, RunOptions(persist='auto'))
        self.assertEqual(kept.report.classification, Classification.EQUAL)

    def test_unoptimised_control_dependencies_still_simulate(self):
        test = build_test(PatternSpec('LB', dependencies=('ctrl', 'ctrl')))
        source = persist_locals(test, 'auto')
        prepared = prepare_source(source)
        unit = compile_mapping(source, CompileOptions(opt_level=0))
        functions, symbols = parse_objdump(render_objdump(unit))
        target, stats = asm_to_litmus(source, functions, symbols, prepared.register_plan)
        self.assertGreater(stats.rules_fired['adrp-collapse'], 0)
        self.assertLess(stats.events_after, stats.events_before)
        self.assertTrue(simulate(target, 'armv8_lite').stats.allowed)

        run = run_pipeline(test, get_profile('mapping-O0'))
        self.assertFalse(run.failed, run.error)
        self.assertEqual(run.report.classification, Classification.EQUAL)

    def test_racy_source_is_filtered(self):
        run = run_pipeline(corpus('MP+na.litmus'), self.profile)
        self.assertEqual(run.report.classification, Classification.UB_FILTERED)
        self.assertTrue(run.as_dict()['races'])

    def test_prebuilt_asm(self):
        run = run_pipeline(corpus('MP+rmw.litmus'), get_profile('corpus-asm'))
        self.assertEqual(run.report.classification, Classification.POSITIVE)
        self.assertEqual([o.render() for o in run.report.sorted_novel()], ['[1:r0=0; y=2;]'])

    def test_toolchain_profile(self):
        completed = [
            subprocess.CompletedProcess(['cc'], 0, '', ''),
            subprocess.CompletedProcess(['objdump'], 0, golden('MP+rmw-toolchain.objdump'), ''),
        ]
        with mock.patch('pipeline.services.toolchain.subprocess.run', side_effect=completed) as run:
            record = run_pipeline(corpus('MP+rmw.litmus'), get_profile('gcc-O2'),
                                  RunOptions(persist={'P1': ['r0']}))
        self.assertEqual(run.call_count, 2)
        self.assertEqual(run.call_args_list[0].args[0][0], 'aarch64-linux-gnu-gcc')
        self.assertEqual(record.classification, 'positive')
        self.assertEqual(record.as_dict()['novel_outcomes'], ['[q1_r0=0; y=2;]'])

    def test_failures_are_recorded_with_their_stage(self):
        missing_tool = CompilerProfile(
            'missing', kind='toolchain',
            compile_command=('no-such-compiler-for-litmus', '-g', '-c', '{input}', '-o', '{output}'),
            disassemble_command=('objdump', '-dr', '{input}'),
        )
        cases = [
            (corpus('LB.litmus'), missing_tool, 'compile'),
            (corpus('asm/LB.litmus'), self.profile, 'prepare'),
            (corpus('SB.litmus'), get_profile('corpus-asm'), 's2l'),
        ]
        for test, profile, stage in cases:
            with self.subTest(profile=profile.name, test=test.name):
                with self.assertLogs('pipeline.services.runner', level='WARNING'):
                    run = run_pipeline(test, profile)
                self.assertTrue(run.failed)
                self.assertEqual(run.failure_stage, stage)
                self.assertIsNone(run.report)
                self.assertEqual(run.as_dict()['classification'], '')

    def test_runs_are_deterministic(self):
        first = run_pipeline(corpus('LB.litmus'), self.profile).as_dict()
        second = run_pipeline(corpus('LB.litmus'), self.profile).as_dict()
        self.assertEqual(without_timings(first), without_timings(second))

    def test_artifacts(self):
        with tempfile.TemporaryDirectory() as out:
            run = run_pipeline(corpus('LB.litmus'), self.profile, RunOptions(output_dir=Path(out)))
            directory = Path(out) / 'mapping-O2' / 'LB'
            self.assertEqual(run.artifact_dir, str(directory))
            for name in ARTIFACTS:
                self.assertTrue((directory / name).exists(), name)
            self.assertEqual((directory / 'disasm.txt').read_text(encoding='utf-8'),
                             golden('LB-mapping-O2.objdump'))
            record = json.loads((directory / 'diff.json').read_text(encoding='utf-8'))
        self.assertEqual(record['classification'], 'positive')
        self.assertIn('simulate-source', record['timings'])

    def test_rerun_leaves_no_artifacts_past_the_failing_stage(self):
        with tempfile.TemporaryDirectory() as out:
            options = RunOptions(output_dir=Path(out))
            run_pipeline(corpus('LB.litmus'), self.profile, options)
            with override_settings(SIMULATION={**settings.SIMULATION, 'CANDIDATE_CAP': 1}):
                with self.assertLogs('pipeline.services.runner', level='WARNING'):
                    run = run_pipeline(corpus('LB.litmus'), self.profile, options)
            self.assertEqual(run.failure_stage, 'simulate-source')
            written = sorted(path.name for path in Path(run.artifact_dir).iterdir())
        self.assertEqual(written, ['disasm.txt', 'src.litmus', 'tgt.litmus', 'unit.c'])

    def test_task_reports_unparsable_input(self):
        record = run_pipeline_task('not a litmus test', self.profile.to_dict())
        self.assertEqual(record['failure_stage'], 'parse')
        self.assertEqual(record['profile'], 'mapping-O2')


# ============================================
# BATCHES AND SUMMARIES
# ============================================

class SummaryTests(SimpleTestCase):

    def test_empty(self):
        self.assertEqual(render_summary(summarize([])), 'No runs.\n')
        table = summarize([], ['mapping-O2'])
        self.assertEqual(int(table.loc['mapping-O2', 'total']), 0)

    def test_counts_are_conserved(self):
        records = [
            {'profile': 'a', 'classification': 'positive'},
            {'profile': 'a', 'classification': ''},
            {'profile': 'b', 'classification': 'equal'},
            {'profile': 'b', 'classification': 'ub-filtered'},
        ]
        table = summarize(records, ['a', 'b'])
        self.assertEqual(list(table.columns), COLUMNS + ['total'])
        self.assertEqual(int(table.loc['a', 'failed']), 1)
        self.assertEqual(int(table.loc['b', 'ub-filtered']), 1)
        self.assertEqual(int(table['total'].sum()), len(records))
        self.assertIn('mapping', render_summary(summarize([{'profile': 'mapping', 'classification': 'equal'}])))


class BatchTests(EagerCeleryMixin, TestCase):

    def test_empty_batch(self):
        self.assertEqual(run_batch([], [get_profile('mapping-O2')]), [])

    def test_every_test_through_every_profile(self):
        profiles = [get_profile('mapping-O2'), get_profile('mapping-O0')]
        tests = [corpus('LB.litmus'), corpus('MP.litmus'), corpus('SB.litmus')]
        records = run_batch(tests, profiles, parallelism=2)
        self.assertEqual([(r['name'], r['profile']) for r in records],
                         [(t.name, p.name) for t in tests for p in profiles])
        table = summarize(records, [p.name for p in profiles])
        self.assertEqual(int(table['total'].sum()), 6)

        batch = record_batch(records, profiles, name='corpus')
        self.assertEqual(batch.test_count, 3)
        self.assertEqual(batch.records.count(), 6)
        self.assertEqual(sum(row['total'] for row in batch.summary()), 6)

    def test_load_buffering_grid(self):
        tests = generate_pattern_tests(load_grid(GRIDS / 'lb294.yaml'))
        profile = get_profile('mapping-O2')

        strict = summarize(run_batch(tests, [profile], parallelism=8), [profile.name])
        self.assertEqual(int(strict.loc['mapping-O2', 'positive']), 294)

        relaxed = summarize(run_batch(tests, [profile.with_models(source_model='rc11_lb')], parallelism=8))
        self.assertEqual(int(relaxed.loc['mapping-O2', 'positive']), 0)
        self.assertEqual(int(relaxed.loc['mapping-O2', 'failed']), 0)


# ============================================
# COMMANDS
# ============================================

@override_settings(PIPELINE=NO_ARTIFACTS)
class PipelineCommandTests(SimpleTestCase):

    def test_positive_exits_with_one(self):
        stdout = StringIO()
        with self.assertRaises(CommandError) as context:
            call_command('pipeline', str(CORPUS / 'LB.litmus'), profile='mapping-O2', stdout=stdout)
        self.assertEqual(context.exception.returncode, 1)
        self.assertIn('LB@mapping-O2', stdout.getvalue())

    def test_equal(self):
        stdout = StringIO()
        call_command('pipeline', str(CORPUS / 'LB.litmus'), profile='mapping-O2',
                     source_model='rc11_lb', stdout=stdout)
        self.assertIn('Result: Equal', stdout.getvalue())

    def test_unknown_profile(self):
        with self.assertRaises(CommandError) as context:
            call_command('pipeline', str(CORPUS / 'LB.litmus'), profile='icc-O2', stdout=StringIO())
        self.assertEqual(context.exception.returncode, 2)

    def test_failed_run_is_an_infrastructure_failure(self):
        with tempfile.TemporaryDirectory() as tmp:
            profiles = Path(tmp) / 'profiles.json'
            profiles.write_text(json.dumps({'profiles': [{
                'name': 'missing', 'kind': 'toolchain',
                'compile_command': ['no-such-compiler-for-litmus', '-g', '-c', '{input}', '-o', '{output}'],
                'disassemble_command': ['objdump', '-dr', '{input}'],
            }]}), encoding='utf-8')
            with self.assertRaises(CommandError) as context:
                call_command('pipeline', str(CORPUS / 'LB.litmus'), profile='missing',
                             profiles_file=str(profiles), stdout=StringIO())
        self.assertEqual(context.exception.returncode, 2)
        self.assertIn('compile', str(context.exception))


@override_settings(PIPELINE=NO_ARTIFACTS)
class BatchCommandTests(EagerCeleryMixin, TestCase):

    def test_no_positive_differences(self):
        with tempfile.TemporaryDirectory() as tmp:
            jsonl = Path(tmp) / 'runs.jsonl'
            stdout = StringIO()
            call_command('batch', str(CORPUS / 'MP.litmus'), str(CORPUS / 'SB.litmus'),
                         profiles='mapping-O2,mapping-O0', jsonl=str(jsonl), record=True,
                         name='smoke', stdout=stdout)
            lines = jsonl.read_text(encoding='utf-8').splitlines()
        self.assertEqual(len(lines), 4)
        self.assertEqual({json.loads(line)['classification'] for line in lines}, {'equal'})
        self.assertIn('4 run(s), no positive differences', stdout.getvalue())
        batch = BatchRun.objects.get(name='smoke')
        self.assertEqual(batch.profiles, ['mapping-O2', 'mapping-O0'])

    def test_positive_exits_with_one(self):
        stdout = StringIO()
        with self.assertRaises(CommandError) as context:
            call_command('batch', str(CORPUS / 'LB.litmus'), profiles='mapping-O2', stdout=stdout)
        self.assertEqual(context.exception.returncode, 1)
        self.assertIn('mapping-O2', stdout.getvalue())

    def test_unknown_profile(self):
        with self.assertRaises(CommandError) as context:
            call_command('batch', str(CORPUS / 'LB.litmus'), profiles='mapping-O2,icc', stdout=StringIO())
        self.assertEqual(context.exception.returncode, 2)


# ============================================
# API
# ============================================

class PipelineAPITests(APITestCase):

    def setUp(self):
        self.user = get_user_model().objects.create_user(username='analyst', password='litmus-pass')
        self.client.force_authenticate(self.user)
        self.batch = BatchRunFactory(profiles=['mapping-O2'])
        PipelineRunRecordFactory.create_batch(2, batch=self.batch, positive=True)
        PipelineRunRecordFactory(batch=self.batch)
        PipelineRunRecordFactory(batch=self.batch, failed=True)

    def test_batch_list_has_counts(self):
        response = self.client.get('/api/pipeline/batches/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        [batch] = response.data['results']
        self.assertEqual((batch['positive_count'], batch['failed_count']), (2, 1))

    def test_batch_summary(self):
        response = self.client.get(f'/api/pipeline/batches/{self.batch.pk}/summary/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        [row] = response.data
        self.assertEqual(row['profile'], 'mapping-O2')
        self.assertEqual(row['counts']['positive'], 2)
        self.assertEqual(row['counts']['failed'], 1)
        self.assertEqual(row['total'], 4)

    def test_filter_records(self):
        response = self.client.get('/api/pipeline/records/', {'classification': 'positive'})
        self.assertEqual(response.data['count'], 2)
        response = self.client.get('/api/pipeline/records/', {'failed': 'true'})
        self.assertEqual(response.data['count'], 1)
        self.assertEqual(response.data['results'][0]['failure_stage'], 'compile')

    def test_records_summary(self):
        response = self.client.get('/api/pipeline/records/summary/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(sum(row['total'] for row in response.data), PipelineRunRecord.objects.count())

    def test_profiles(self):
        response = self.client.get('/api/pipeline/profiles/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertIn('corpus-asm', [profile['name'] for profile in response.data])

    def test_requires_authentication(self):
        self.client.force_authenticate(None)
        response = self.client.get('/api/pipeline/batches/')
        self.assertIn(response.status_code, (status.HTTP_401_UNAUTHORIZED, status.HTTP_403_FORBIDDEN))
