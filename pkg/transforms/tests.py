import tempfile
from dataclasses import replace
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.test import SimpleTestCase

from executions.services.simulate import simulate
from litmus.services import exprs, load_litmus_file, parse_litmus, render_litmus
from litmus.services.instructions import Instruction, Mem, RegOp
from litmus.services.types import Dialect, Order
from transforms.services.exceptions import InvalidGrid, NameCollision, TransformError, UnsupportedShape
from transforms.services.generator import (
    PatternSpec,
    build_test,
    expand_grid,
    generate_pattern_tests,
    load_grid,
    normalise,
)
from transforms.services.peephole import count_events, optimize_asm
from transforms.services.persistence import PersistencePlan, load_plan, persist_locals

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'
GRIDS = Path(settings.BASE_DIR) / 'transforms' / 'grids'

GOT_LOAD = """AArch64 GOT-LOAD
{ }
P0 (r0=X0) {
  ADRP X1,:got:x
  LDR X1,[X1,:got_lo12:x]
  LDR W0,[X1]
}
exists (P0_r0=0)
"""

PAGE_LOAD = """AArch64 PAGE-LOAD
{ }
P0 (r0=X0) {
  ADRP X1,x
  ADD X1,X1,:lo12:x
  LDR W0,[X1]
}
exists (P0_r0=0)
"""

RELOAD = """AArch64 RELOAD
{ }
P0 (r0=X0) {
  ADRP X8,:got:x
  LDR X8,[X8,:got_lo12:x]
  LDR W0,[X8]
  ADRP X8,:got:x
  LDR X8,[X8,:got_lo12:x]
  MOV W9,#1
  STR W9,[X8]
}
exists (P0_r0=0)
"""

SHARED_SLOT = """AArch64 SHARED-SLOT
{ }
P0 (r0=X0) {
  ADRP X1,:got:x
  LDR X1,[X1,:got_lo12:x]
  LDR W0,[X1]
}
P1 {
  ADRP X3,:got:x
  MOV W2,#1
  STR W2,[X3,:got_lo12:x]
}
exists (P0_r0=0)
"""

GOT_BEFORE_BRANCH = """AArch64 GOT-BRANCH
{ }
P0 (r0=X0) {
  ADRP X8,:got:x
  LDR X8,[X8,:got_lo12:x]
  LDR W0,[X8]
  CMP W0,W0
  B.NE L0
  ADRP X8,:got:y
  LDR X8,[X8,:got_lo12:y]
  MOV W9,#1
  STR W9,[X8]
L0:
  RET
}
exists (P0_r0=0)
"""

GOT_LIVE_ACROSS_BRANCH = """AArch64 GOT-LIVE
{ }
P0 (r0=X0) {
  ADRP X8,:got:x
  LDR X8,[X8,:got_lo12:x]
  LDR W0,[X8]
  CBZ W0,L0
  MOV W9,#1
  STR W9,[X8]
L0:
  RET
}
exists (P0_r0=0)
"""

DEAD_MOV = """AArch64 DEAD-MOV
{ 0:X1=x; }
P0 (r0=X0, r5=X5) {
  MOV W6,#3
  LDR W0,[X1]
  MOV W5,#4
}
exists (P0_r0=0 /\ P0_r5=4)
"""


def corpus(name):
    return load_litmus_file(CORPUS / name)


def outcomes(test, model):
    return {outcome.bindings for outcome in simulate(test, model).outcomes}


# ============================================
# GENERATOR
# ============================================

class GeneratorTests(SimpleTestCase):

    def test_load_buffering_grid_has_294_distinct_tests(self):
        tests = generate_pattern_tests(load_grid(GRIDS / 'lb294.yaml'))
        self.assertEqual(len(tests), 294)
        self.assertEqual(len({test.name for test in tests}), 294)
        self.assertEqual(len({render_litmus(test) for test in tests}), 294)

    def test_shape_grid_covers_every_shape(self):
        specs = expand_grid(load_grid(GRIDS / 'shapes.yaml'))
        self.assertGreaterEqual(len(specs), 200)
        self.assertEqual({spec.shape for spec in specs}, {'MP', 'LB', 'SB', 'S', 'R', '2+2W', 'W+RR'})

    def test_generation_is_deterministic(self):
        grid = load_grid(GRIDS / 'lb294.yaml')
        first = [render_litmus(test) for test in generate_pattern_tests(grid)]
        second = [render_litmus(test) for test in generate_pattern_tests(grid)]
        self.assertEqual(first, second)

    def test_relaxed_load_buffering_matches_the_corpus_shape(self):
        test = build_test(PatternSpec('LB'))
        reference = corpus('LB.litmus')
        self.assertEqual(test.name, 'LB+Rlx.Rlx+i32.i32')
        self.assertEqual(test.final, reference.final)
        self.assertEqual([t.body for t in test.threads], [t.body for t in reference.threads])

    def test_message_passing_with_release_acquire(self):
        test = build_test(PatternSpec('MP', Order.ACQ, Order.REL))
        [write_x, write_y] = test.thread(0).body
        [read_y, read_x] = test.thread(1).body
        self.assertEqual((write_x.order, write_y.order), (Order.REL, Order.REL))
        self.assertEqual((read_y.loc, read_y.order), ('y', Order.ACQ))
        self.assertEqual(outcomes(test, 'rc11_lite'), {
            (('1:r0', 0), ('1:r1', 0)),
            (('1:r0', 0), ('1:r1', 1)),
            (('1:r0', 1), ('1:r1', 1)),
        })

    def test_names_carry_widths_dependencies_and_fences(self):
        spec = PatternSpec('LB', widths=(('x', 'int8_t'), ('y', 'uint16_t')),
                           dependencies=('data', 'ctrl'), fence=Order.SC)
        self.assertEqual(spec.name, 'LB+Rlx.Rlx+i8.u16+data.ctrl+FSC')

    def test_inapplicable_dependencies_are_dropped(self):
        spec = normalise(PatternSpec('SB', dependencies=('data', 'ctrl')))
        self.assertEqual(spec.dependencies, ('none', 'none'))
        mp = normalise(PatternSpec('MP', dependencies=('ctrl', 'data')))
        self.assertEqual(mp.dependencies, ('none', 'none'))

    def test_widths_wrap_values(self):
        test = build_test(PatternSpec('S', widths=(('x', 'int8_t'), ('y', 'int8_t'))))
        self.assertEqual(test.init.type_of('x').bits, 8)
        self.assertEqual(test.thread(1).register_type('r0').bits, 8)

    def test_false_dependencies_do_not_change_relaxed_outcomes(self):
        plain = outcomes(build_test(PatternSpec('LB')), 'rc11_lb')
        data = outcomes(build_test(PatternSpec('LB', dependencies=('data', 'data'))), 'rc11_lb')
        self.assertEqual(plain, data)

    def test_unknown_shape(self):
        with self.assertRaises(UnsupportedShape):
            build_test(PatternSpec('IRIW'))
        with self.assertRaises(UnsupportedShape):
            expand_grid({'shapes': ['IRIW']})

    def test_invalid_grids(self):
        with self.assertRaises(InvalidGrid):
            expand_grid({'shape': ['LB']})
        with self.assertRaises(InvalidGrid):
            expand_grid({'loads': ['Rel']})
        with self.assertRaises(InvalidGrid):
            expand_grid({'widths': {'x': ['float']}})
        with self.assertRaises(InvalidGrid):
            expand_grid({'dependencies': ['addr']})

    def test_generate_command_writes_one_file_per_point(self):
        with tempfile.TemporaryDirectory() as out:
            stdout = StringIO()
            call_command('generate', grid=str(GRIDS / 'lb294.yaml'), out=out, stdout=stdout)
            self.assertEqual(len(list(Path(out).glob('*.litmus'))), 294)
            self.assertIn('Wrote 294 test(s)', stdout.getvalue())


# ============================================
# PERSISTENCE
# ============================================

class PersistenceTests(SimpleTestCase):

    def test_empty_plan_is_identity(self):
        test = corpus('LB.litmus')
        self.assertIs(persist_locals(test, 'off'), test)
        self.assertIs(persist_locals(test, PersistencePlan()), test)
        self.assertIs(persist_locals(test, None), test)

    def test_auto_persists_every_register(self):
        test = persist_locals(corpus('LB.litmus'), 'auto')
        self.assertEqual(test.init.locations(), ('x', 'y', 'q0_r0', 'q1_r0'))
        self.assertEqual(test.observable_keys(), ('0:r0', '1:r0', 'q0_r0', 'q1_r0'))
        last = test.thread(0).body[-1]
        self.assertEqual(last, exprs.Store('q0_r0', exprs.Reg('r0'), Order.NA))
        self.assertEqual(test.meta('persisted'), 'q0_r0,q1_r0')

    def test_original_statements_are_unchanged(self):
        original = corpus('MP+rmw.litmus')
        persisted = persist_locals(original, {'P1': ['r0']})
        for before, after in zip(original.threads, persisted.threads):
            self.assertEqual(after.body[:len(before.body)], before.body)
        self.assertEqual(len(persisted.thread(0).body), len(original.thread(0).body))

    def test_persisted_globals_mirror_registers(self):
        test = persist_locals(corpus('LB.litmus'), 'auto')
        for bindings in outcomes(test, 'rc11_lb'):
            values = dict(bindings)
            self.assertEqual(values['q0_r0'], values['0:r0'])
            self.assertEqual(values['q1_r0'], values['1:r0'])

    def test_persisted_outcome_of_the_rmw_pattern(self):
        test = persist_locals(corpus('MP+rmw.litmus'), {'P1': ['r0']})
        found = {tuple((k, v) for k, v in bindings if k != '1:r0') for bindings in outcomes(test, 'rc11_lite')}
        self.assertNotIn((('q1_r0', 0), ('y', 2)), found)

    def test_plan_files(self):
        with tempfile.NamedTemporaryFile('w', suffix='.yaml', delete=False) as handle:
            handle.write('P1: [r0, r0]\n')
        plan = load_plan(handle.name)
        Path(handle.name).unlink()
        self.assertEqual(plan.entries, ((1, 'r0', 'q1_r0'),))

    def test_name_collision(self):
        test = corpus('LB.litmus')
        clashing = replace(test, init=test.init.with_location('q0_r0'))
        with self.assertRaises(NameCollision):
            persist_locals(clashing, 'auto')

    def test_unknown_register_or_thread(self):
        with self.assertRaises(TransformError):
            persist_locals(corpus('LB.litmus'), {'P0': ['r9']})
        with self.assertRaises(TransformError):
            persist_locals(corpus('LB.litmus'), {'P4': ['r0']})

    def test_asm_tests_are_rejected(self):
        with self.assertRaises(TransformError):
            persist_locals(corpus('asm/LB.litmus'), 'auto')

    def test_persistence_is_conservative_on_race_free_tests(self):
        tests = [test for test in generate_pattern_tests(load_grid(GRIDS / 'shapes.yaml'))
                 if any(thread.registers for thread in test.threads)]
        self.assertGreaterEqual(len(tests), 100)
        for test in tests:
            persisted = persist_locals(test, 'auto')
            keys = test.observable_keys()
            for model in ('rc11_lite', 'rc11_lb'):
                with self.subTest(test=test.name, model=model):
                    before = {o.project(keys) for o in simulate(test, model).outcomes}
                    after = {o.project(keys) for o in simulate(persisted, model).outcomes}
                    self.assertEqual(before, after)


# ============================================
# PEEPHOLE
# ============================================

class PeepholeTests(SimpleTestCase):

    def test_got_materialisation_collapses_to_a_direct_load(self):
        optimized, stats = optimize_asm(parse_litmus(GOT_LOAD))
        self.assertEqual(optimized.thread(0).body, (Instruction('LDR', (RegOp('W0'), Mem(symbol='x'))),))
        self.assertEqual((stats.events_before, stats.events_after), (2, 1))
        self.assertEqual(stats.rules_fired['adrp-collapse'], 1)

    def test_page_materialisation_collapses(self):
        optimized, stats = optimize_asm(parse_litmus(PAGE_LOAD))
        self.assertEqual(optimized.thread(0).body, (Instruction('LDR', (RegOp('W0'), Mem(symbol='x'))),))
        self.assertEqual(stats.events_before, stats.events_after)

    def test_direct_accesses_are_left_alone(self):
        test = corpus('asm/LB3.litmus')
        optimized, stats = optimize_asm(test)
        self.assertEqual(optimized, test)
        self.assertEqual(stats.fired, 0)

    def test_three_thread_load_buffering_after_optimisation(self):
        test = corpus('asm/LB3+got.litmus')
        optimized, stats = optimize_asm(test)
        self.assertLess(stats.events_after, stats.events_before)
        self.assertEqual(count_events(optimized), 6)
        result = simulate(optimized, 'armv8_lite', cap=1000)
        self.assertEqual(len(result.outcomes), 8)
        self.assertIn('States 8\n', result.log)
        self.assertEqual(result.outcomes, simulate(corpus('asm/LB3.litmus'), 'armv8_lite').outcomes)

    def test_reload_of_a_held_address(self):
        optimized, stats = optimize_asm(parse_litmus(RELOAD), ['reload'])
        self.assertEqual(stats.rules_fired['reload'], 1)
        self.assertEqual(len(optimized.thread(0).body), 5)
        self.assertEqual(stats.events_after, stats.events_before - 1)

    def test_all_rules_reach_a_fixpoint(self):
        original = parse_litmus(RELOAD)
        optimized, stats = optimize_asm(original)
        self.assertEqual(len(optimized.thread(0).body), 3)
        self.assertEqual(stats.events_after, 2)
        self.assertEqual(outcomes(optimized, 'armv8_lite'), outcomes(original, 'armv8_lite'))

    def test_dead_definitions_keep_observed_registers(self):
        optimized, stats = optimize_asm(parse_litmus(DEAD_MOV), 'dead-def')
        ops = [item.op for item in optimized.thread(0).body]
        self.assertEqual(ops, ['LDR', 'MOV'])
        self.assertEqual(stats.rules_fired['dead-def'], 1)

    def test_liveness_follows_both_branch_successors(self):
        test = parse_litmus(GOT_BEFORE_BRANCH)
        optimized, stats = optimize_asm(test)
        self.assertEqual(stats.rules_fired['adrp-collapse'], 2)
        self.assertEqual((stats.events_before, stats.events_after), (4, 2))
        self.assertEqual([item.op for item in optimized.thread(0).body if isinstance(item, Instruction)],
                         ['LDR', 'CMP', 'B.NE', 'MOV', 'STR', 'RET'])
        self.assertEqual(outcomes(optimized, 'armv8_lite'), outcomes(test, 'armv8_lite'))

    def test_address_read_on_a_branch_path_is_kept(self):
        test = parse_litmus(GOT_LIVE_ACROSS_BRANCH)
        optimized, stats = optimize_asm(test)
        self.assertEqual(optimized, test)
        self.assertEqual(stats.fired, 0)

    def test_shared_slots_are_guarded(self):
        test = parse_litmus(SHARED_SLOT)
        optimized, stats = optimize_asm(test)
        self.assertEqual(optimized, test)
        self.assertEqual(stats.fired, 0)
        [violation] = stats.guard_violations
        self.assertEqual((violation.rule, violation.location, violation.thread), ('adrp-collapse', 'x@got', 0))

    def test_optimisation_preserves_outcomes_on_the_asm_corpus(self):
        for name in ('asm/LB.litmus', 'asm/MP+rmw.litmus', 'asm/LB3.litmus'):
            test = corpus(name)
            with self.subTest(test=name):
                optimized, _ = optimize_asm(test)
                self.assertEqual(outcomes(optimized, 'armv8_lite'), outcomes(test, 'armv8_lite'))

    def test_rule_selection_errors(self):
        with self.assertRaises(TransformError):
            optimize_asm(parse_litmus(GOT_LOAD), ['constant-fold'])
        with self.assertRaises(TransformError):
            optimize_asm(corpus('LB.litmus'))

    def test_dialect_is_kept(self):
        optimized, _ = optimize_asm(parse_litmus(GOT_LOAD))
        self.assertIs(optimized.dialect, Dialect.AARCH64)
