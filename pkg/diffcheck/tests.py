import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from diffcheck.serializers import diff_record_line
from diffcheck.services import (
    AmbiguousMapping,
    Classification,
    DiffReport,
    MissingBinding,
    StateMapping,
    apply_mapping,
    classify,
    compare_outcomes,
    infer_state_mapping,
    render_compare_table,
)
from diffcheck.services.compare import COMPARE_ANYWAY, IGNORE_RACY
from executions.services.outcomes import Outcome, OutcomeSet
from executions.services.simulate import simulate
from litmus.services import load_litmus_file, parse_litmus
from transforms.services.persistence import persist_locals

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'

# fetch_add compiled with its result dropped: STADD keeps no acquire.
RMW_DELETED = """AArch64 MP+rmw
{ 0:X1=x; 0:X3=y; 1:X1=y; }
P0 {
  MOV W2,#1
  STR W2,[X1]
  STLR W2,[X3]
}
P1 {
  MOV W2,#1
  STADD W2,[X1]
}
exists (y=2)
"""

RMW_DELETED_R0_PERSISTED = """AArch64 MP+rmw
{ 0:X1=x; 0:X3=y; 1:X1=y; 1:X3=x; 1:X4=q1_r0; }
P0 {
  MOV W2,#1
  STR W2,[X1]
  STLR W2,[X3]
}
P1 {
  MOV W2,#1
  STADD W2,[X1]
  LDR W0,[X3]
  STR W0,[X4]
}
locations [q1_r0;]
exists (y=2)
"""

# Persisting the fetch_add result keeps it live, so LDADDA survives.
RMW_KEPT_ALL_PERSISTED = """AArch64 MP+rmw
{ 0:X1=x; 0:X3=y; 1:X1=y; 1:X3=x; 1:X4=q1_r0; 1:X6=q1_r1; }
P0 {
  MOV W2,#1
  STR W2,[X1]
  STLR W2,[X3]
}
P1 {
  MOV W2,#1
  LDADDA W2,W5,[X1]
  LDR W0,[X3]
  STR W0,[X4]
  STR W5,[X6]
}
locations [q1_r0; q1_r1;]
exists (y=2)
"""


def corpus(name):
    return load_litmus_file(CORPUS / name)


def outcomes(*dicts):
    return OutcomeSet(frozenset(Outcome.from_dict(values) for values in dicts))


def compare_tests(src, tgt, source_model='rc11_lite', target_model='armv8_lite', **options):
    mapping = infer_state_mapping(src, tgt)
    src_result = simulate(src, source_model, collect_races=True)
    tgt_result = simulate(tgt, target_model)
    return compare_outcomes(src_result.outcomes, tgt_result.outcomes, mapping,
                            races=src_result.races, source_name=src.name,
                            target_name=tgt.name, **options)


# ============================================
# STATE MAPPING
# ============================================

class StateMappingTests(SimpleTestCase):

    def test_syntactic_register_convention(self):
        mapping = infer_state_mapping(corpus('LB.litmus'), corpus('asm/LB.litmus'))
        self.assertEqual(mapping.as_dict(), {'0:r0': 'P0_r0', '1:r0': 'P1_r0'})
        self.assertTrue(mapping.is_total())
        self.assertEqual(mapping.unmapped_target, frozenset())

    def test_identical_tests_map_to_themselves(self):
        test = corpus('MP.litmus')
        mapping = infer_state_mapping(test, test)
        self.assertEqual(mapping.pairs, tuple((key, key) for key in test.observable_keys()))

    def test_hints_take_precedence(self):
        mapping = infer_state_mapping(corpus('LB.litmus'), corpus('asm/LB.litmus'),
                                      hints={'0:r0': 'P1_r0', '1:r0': 'P0_r0'})
        self.assertEqual(mapping.target_of('0:r0'), 'P1_r0')

    def test_hint_with_two_targets_is_ambiguous(self):
        with self.assertRaises(AmbiguousMapping) as context:
            infer_state_mapping(corpus('LB.litmus'), corpus('asm/LB.litmus'),
                                hints={'0:r0': ['P0_X0', 'P0_X5']})
        self.assertEqual(context.exception.observable, '0:r0')

    def test_two_sources_on_one_target_is_ambiguous(self):
        with self.assertRaises(AmbiguousMapping):
            StateMapping((('0:r0', 'P0_r0'), ('1:r0', 'P0_r0')))

    def test_unmapped_observables_are_reported(self):
        mapping = infer_state_mapping(corpus('MP+rmw.litmus'), parse_litmus(RMW_DELETED_R0_PERSISTED))
        self.assertEqual(mapping.as_dict(), {'y': 'y'})
        self.assertEqual(mapping.unmapped_source, frozenset({'1:r0'}))
        self.assertEqual(mapping.unmapped_target, frozenset({'q1_r0'}))


class ApplyMappingTests(SimpleTestCase):

    def setUp(self):
        self.mapping = StateMapping((('1:r0', 'P1_r0'), ('y', 'y')))

    def test_renames_to_source_keys(self):
        renamed = apply_mapping(self.mapping, Outcome.from_dict({'P1_r0': 1, 'y': 2}))
        self.assertEqual(renamed.as_dict(), {'1:r0': 1, 'y': 2})

    def test_identity_is_a_no_op(self):
        outcome = Outcome.from_dict({'x': 1, 'y': 0})
        self.assertEqual(apply_mapping(StateMapping.identity(['x', 'y']), outcome), outcome)

    def test_unmapped_target_bindings_are_dropped_with_warning(self):
        with self.assertLogs('diffcheck.services.mapping', level='WARNING') as logs:
            renamed = apply_mapping(self.mapping, Outcome.from_dict({'P1_r0': 0, 'y': 2, 'q0': 5}))
        self.assertEqual(renamed.keys(), ('1:r0', 'y'))
        self.assertIn('q0', logs.output[0])

    def test_missing_binding(self):
        with self.assertRaises(MissingBinding) as context:
            apply_mapping(self.mapping, Outcome.from_dict({'y': 1}))
        self.assertEqual(context.exception.name, 'P1_r0')

    def test_inverse_round_trip(self):
        for outcome in simulate(corpus('asm/LB.litmus'), 'armv8_lite').outcomes:
            mapped = apply_mapping(self.mapping_for_lb(), outcome)
            self.assertEqual(apply_mapping(self.mapping_for_lb().inverse(), mapped), outcome)

    @staticmethod
    def mapping_for_lb():
        return StateMapping((('0:r0', 'P0_r0'), ('1:r0', 'P1_r0')))


# ============================================
# COMPARISON
# ============================================

class CompareOutcomesTests(SimpleTestCase):

    def test_compiled_load_buffering_is_positive(self):
        report = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus'))
        self.assertEqual(report.classification, Classification.POSITIVE)
        self.assertEqual(len(report.source_outcomes), 3)
        self.assertEqual(len(report.target_outcomes), 4)
        self.assertEqual([o.render() for o in report.sorted_novel()], ['[0:r0=1; 1:r0=1;]'])
        self.assertEqual(report.missing_outcomes, frozenset())

    def test_load_buffering_allowed_by_rc11_lb(self):
        report = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus'), source_model='rc11_lb')
        self.assertEqual(report.classification, Classification.EQUAL)

    def test_same_sets_are_equal(self):
        values = outcomes({'x': 0}, {'x': 1})
        report = compare_outcomes(values, values, StateMapping.identity(['x']))
        self.assertEqual(report.classification, Classification.EQUAL)
        self.assertFalse(report.novel_outcomes or report.missing_outcomes)

    def test_strict_subset_is_negative(self):
        report = compare_outcomes(outcomes({'x': 0}, {'x': 1}), outcomes({'x': 1}),
                                  StateMapping.identity(['x']))
        self.assertEqual(report.classification, Classification.NEGATIVE)
        self.assertEqual(report.sorted_missing(), [Outcome.from_dict({'x': 0})])

    def test_classification_follows_difference_sets(self):
        report = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus'))
        self.assertEqual(classify(report.novel_outcomes, report.missing_outcomes), report.classification)
        self.assertEqual(report.is_positive, not report.target_outcomes <= report.source_outcomes)
        self.assertNotEqual(classify(set(), set()), Classification.MIXED)

    def test_target_only_global_is_dropped(self):
        with self.assertLogs('diffcheck.services.compare', level='WARNING'):
            report = compare_tests(corpus('MP+rmw.litmus'), parse_litmus(RMW_DELETED_R0_PERSISTED))
        self.assertEqual(report.dropped, ('q1_r0',))
        self.assertEqual(report.classification, Classification.EQUAL)


class RaceGatingTests(SimpleTestCase):

    def test_racy_source_is_filtered(self):
        test = corpus('MP+na.litmus')
        report = compare_tests(test, test, target_model='rc11_lite', racy_policy=IGNORE_RACY)
        self.assertEqual(report.classification, Classification.UB_FILTERED)
        self.assertTrue(report.races)
        self.assertFalse(report.source_outcomes)

    def test_racy_source_compared_anyway(self):
        test = corpus('MP+na.litmus')
        report = compare_tests(test, test, target_model='rc11_lite', racy_policy=COMPARE_ANYWAY)
        self.assertEqual(report.classification, Classification.EQUAL)

    @override_settings(PIPELINE={'RACY_POLICY': COMPARE_ANYWAY})
    def test_policy_defaults_to_settings(self):
        test = corpus('MP+na.litmus')
        self.assertEqual(compare_tests(test, test, target_model='rc11_lite').classification,
                         Classification.EQUAL)

    def test_unknown_policy(self):
        with self.assertRaises(ValueError):
            compare_outcomes(outcomes(), outcomes(), StateMapping(), racy_policy='sometimes')


class LocalVariableProblemTests(SimpleTestCase):
    """The deleted RMW read only shows up once P1's load result is kept in memory."""

    def setUp(self):
        self.source = corpus('MP+rmw.litmus')

    def test_masked_without_persistence(self):
        report = compare_tests(self.source, parse_litmus(RMW_DELETED))
        self.assertEqual(report.classification, Classification.EQUAL)
        self.assertEqual(report.mapping.unmapped_source, frozenset({'1:r0'}))

    def test_exposed_when_the_load_is_persisted(self):
        source = persist_locals(self.source, {'P1': ['r0']})
        report = compare_tests(source, parse_litmus(RMW_DELETED_R0_PERSISTED))
        self.assertEqual(report.classification, Classification.POSITIVE)
        self.assertEqual([o.render() for o in report.sorted_novel()], ['[q1_r0=0; y=2;]'])

    def test_persisting_every_register_keeps_the_acquire(self):
        source = persist_locals(self.source, 'auto')
        report = compare_tests(source, parse_litmus(RMW_KEPT_ALL_PERSISTED))
        self.assertEqual(report.classification, Classification.EQUAL)
        self.assertEqual(set(report.mapping.source_keys()), {'y', 'q1_r0', 'q1_r1'})


# ============================================
# RENDERING AND RECORDS
# ============================================

class RenderTableTests(SimpleTestCase):

    def test_novel_outcomes_are_marked_in_target_names(self):
        table = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus')).table
        self.assertIn('+[P0_r0=1; P1_r0=1;]', table)
        self.assertEqual(table.count('+['), 1)
        self.assertTrue(table.startswith('LB (3)'))

    def test_equal_report_has_no_marks(self):
        test = corpus('SB.litmus')
        table = compare_tests(test, test, target_model='rc11_lite').table
        self.assertNotIn('+[', table)

    def test_empty_sets_render_header_only(self):
        table = render_compare_table(DiffReport(Classification.EQUAL))
        self.assertEqual(len(table.splitlines()), 2)

    def test_rendering_is_deterministic(self):
        first = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus')).table
        second = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus')).table
        self.assertEqual(first, second)


class DiffRecordTests(SimpleTestCase):

    def test_json_line(self):
        report = compare_tests(corpus('LB.litmus'), corpus('asm/LB.litmus'))
        record = json.loads(diff_record_line(report, name='LB', timings={'simulate_source': 0.25}))
        self.assertEqual(record['name'], 'LB')
        self.assertEqual(record['classification'], 'positive')
        self.assertEqual(record['novel_outcomes'], ['[0:r0=1; 1:r0=1;]'])
        self.assertEqual(record['timings'], {'simulate_source': 0.25})
        self.assertNotIn('\n', diff_record_line(report))


class CompareCommandTests(SimpleTestCase):

    def test_positive_exits_with_one(self):
        stdout = StringIO()
        with self.assertRaises(CommandError) as context:
            call_command('compare', str(CORPUS / 'LB.litmus'), str(CORPUS / 'asm' / 'LB.litmus'),
                         stdout=stdout)
        self.assertEqual(context.exception.returncode, 1)
        self.assertIn('+[P0_r0=1; P1_r0=1;]', stdout.getvalue())

    def test_equal_with_record(self):
        with tempfile.TemporaryDirectory() as tmp:
            jsonl = Path(tmp) / 'diff.jsonl'
            stdout = StringIO()
            call_command('compare', str(CORPUS / 'LB.litmus'), str(CORPUS / 'asm' / 'LB.litmus'),
                         source_model='rc11_lb', jsonl=str(jsonl), stdout=stdout)
            record = json.loads(jsonl.read_text(encoding='utf-8').strip())
        self.assertIn('Result: Equal', stdout.getvalue())
        self.assertEqual(record['classification'], 'equal')

    def test_mapping_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            hints = Path(tmp) / 'map.yaml'
            hints.write_text("'0:r0': [P0_X0, P0_X5]\n", encoding='utf-8')
            with self.assertRaises(CommandError) as context:
                call_command('compare', str(CORPUS / 'LB.litmus'), str(CORPUS / 'asm' / 'LB.litmus'),
                             map_file=str(hints), stdout=StringIO())
        self.assertEqual(context.exception.returncode, 2)

    def test_missing_file_is_an_infrastructure_failure(self):
        with self.assertRaises(CommandError) as context:
            call_command('compare', 'missing.litmus', str(CORPUS / 'LB.litmus'), stdout=StringIO())
        self.assertEqual(context.exception.returncode, 2)
