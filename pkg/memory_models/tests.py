from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.contrib.auth import get_user_model
from django.core.management import call_command
from django.test import SimpleTestCase
from rest_framework import status
from rest_framework.test import APITestCase

from executions.services.candidates import enumerate_candidates
from executions.services.events import CandidateExecution, Event, EventKind, Relation
from litmus.services import load_litmus_file
from litmus.services.types import Dialect, Order
from memory_models.services import (
    Evaluation,
    ModelError,
    ModelSpec,
    UnknownBaseRelation,
    UnknownModel,
    builtin_models,
    check_model,
    describe,
    eval_relation,
    lookup,
)
from memory_models.services import relations as rel
from memory_models.services.exprs import SetName, base, cls, named, on, seq
from memory_models.services.models import acyclic

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'


def naive_closure(matrix):
    closure = matrix.copy()
    while True:
        step = closure | rel.compose(closure, closure)
        if (step == closure).all():
            return closure
        closure = step


def message_passing_execution():
    """Init x/y, P0: W x=1; W(Rel) y=1, P1: R(Acq) y=1; R x=0."""
    events = (
        Event(0, -1, EventKind.WRITE, 'x', 0),
        Event(1, -1, EventKind.WRITE, 'y', 0),
        Event(2, 0, EventKind.WRITE, 'x', 1, Order.RLX),
        Event(3, 0, EventKind.WRITE, 'y', 1, Order.REL),
        Event(4, 1, EventKind.READ, 'y', 1, Order.ACQ),
        Event(5, 1, EventKind.READ, 'x', 0, Order.RLX),
    )
    return CandidateExecution(
        events=events,
        po=Relation('po', frozenset({(2, 3), (4, 5)})),
        rf=Relation('rf', frozenset({(3, 4), (0, 5)})),
        co=Relation('co', frozenset({(0, 2), (1, 3)})),
    )


def load_buffering_cycle():
    test = load_litmus_file(CORPUS / 'LB.litmus')
    for execution in enumerate_candidates(test):
        if all(event.value == 1 for event in execution.reads()):
            return execution
    raise AssertionError('no execution with both reads returning 1')


# ============================================
# RELATION ALGEBRA
# ============================================

class RelationAlgebraTests(SimpleTestCase):

    def test_closure_matches_naive_fixpoint(self):
        generator = np.random.default_rng(7)
        for size in (1, 2, 5, 9):
            for density in (0.1, 0.3, 0.6):
                matrix = generator.random((size, size)) < density
                with self.subTest(size=size, density=density):
                    np.testing.assert_array_equal(rel.transitive_closure(matrix), naive_closure(matrix))

    def test_compose(self):
        left = rel.empty(3)
        left[0, 1] = True
        right = rel.empty(3)
        right[1, 2] = True
        self.assertEqual(rel.pairs(rel.compose(left, right)), [(0, 2)])
        self.assertEqual(rel.compose(rel.empty(0), rel.empty(0)).shape, (0, 0))

    def test_acyclicity(self):
        chain = rel.empty(3)
        chain[0, 1] = chain[1, 2] = True
        self.assertTrue(rel.is_acyclic(chain))
        chain[2, 0] = True
        self.assertFalse(rel.is_acyclic(chain))
        self.assertFalse(rel.is_irreflexive(rel.identity(2)))

    def test_identity_on_mask(self):
        self.assertEqual(rel.pairs(rel.identity_on([True, False, True])), [(0, 0), (2, 2)])
        self.assertTrue(rel.is_empty(rel.reflexive_closure(rel.empty(2)) & ~rel.identity(2)))


class DescribeTests(SimpleTestCase):

    def test_sequences_and_filters(self):
        self.assertEqual(describe(seq(base('po'), cls('FULL'), base('po'))), 'po ; [FULL] ; po')

    def test_parentheses_follow_precedence(self):
        expr = base('po') - seq(on(SetName('W') - SetName('RMW')), base('po'))
        self.assertEqual(describe(expr), 'po \\ ([W \\ RMW] ; po)')
        self.assertEqual(describe((base('rf') | base('co')).plus()), '(rf | co)+')

    def test_named_relations_expand_on_request(self):
        com = named('com', base('rf') | base('co'))
        self.assertEqual(describe(seq(com, base('po'))), 'com ; po')
        self.assertEqual(describe(seq(com, base('po')), expand=True), '(rf | co) ; po')


# ============================================
# EVALUATION
# ============================================

class EvaluationTests(SimpleTestCase):

    def setUp(self):
        self.execution = message_passing_execution()
        self.evaluation = Evaluation(self.execution)

    def test_derived_relations(self):
        self.assertEqual(rel.pairs(self.evaluation.base('fr')), [(5, 2)])
        self.assertEqual(rel.pairs(self.evaluation.base('rfe')), [(0, 5), (3, 4)])
        self.assertEqual(rel.pairs(self.evaluation.base('rfi')), [])
        self.assertEqual(rel.pairs(self.evaluation.base('po-loc')), [])
        self.assertTrue(self.evaluation.base('loc')[0, 2])
        self.assertFalse(self.evaluation.base('loc')[0, 1])

    def test_event_classes(self):
        mask = self.evaluation.mask(SetName('ACQ'))
        self.assertEqual(mask.tolist(), [False, False, False, False, True, False])
        self.assertTrue(self.evaluation.mask(SetName('INIT'))[:2].all())

    def test_rc11_happens_before_synchronises(self):
        hb = lookup('rc11_lite').happens_before
        relation = eval_relation(hb, self.execution)
        self.assertEqual(relation.name, 'hb')
        self.assertIn((2, 5), relation)
        self.assertIn((3, 4), relation)

    def test_unknown_names(self):
        with self.assertRaises(UnknownBaseRelation):
            self.evaluation.relation(base('psc'))
        with self.assertRaises(ModelError):
            self.evaluation.mask(SetName('SEQ'))


# ============================================
# MODELS AND CHECKING
# ============================================

class ModelRegistryTests(SimpleTestCase):

    def test_builtin_models_in_registry_order(self):
        self.assertEqual(list(builtin_models()), ['sc', 'tso', 'rc11_lite', 'rc11_lb', 'armv8_lite'])

    def test_rc11_lb_drops_only_the_load_buffering_ban(self):
        lite, lb = lookup('rc11_lite'), lookup('rc11_lb')
        self.assertIn('no-lb', lite.labels)
        self.assertEqual(lb.labels, tuple(label for label in lite.labels if label != 'no-lb'))
        self.assertEqual(lb.happens_before, lite.happens_before)

    def test_dialects(self):
        self.assertTrue(lookup('sc').applies_to(Dialect.AARCH64))
        self.assertFalse(lookup('rc11_lite').applies_to(Dialect.AARCH64))
        self.assertFalse(lookup('armv8_lite').applies_to(Dialect.SOURCE))

    def test_unknown_model(self):
        with self.assertRaises(UnknownModel) as context:
            lookup('power')
        self.assertIn('rc11_lite', context.exception.known)

    def test_duplicate_labels(self):
        with self.assertRaises(ValueError):
            ModelSpec('dup', (Dialect.SOURCE,), (acyclic(base('po'), 'a'), acyclic(base('rf'), 'a')))


class CheckModelTests(SimpleTestCase):

    def test_message_passing_violation_is_reported(self):
        execution = message_passing_execution()
        verdict = check_model('rc11_lite', execution)
        self.assertFalse(verdict)
        self.assertIn('hb-coherence', verdict.violated)
        self.assertFalse(check_model('sc', execution))
        self.assertFalse(check_model('tso', execution))

    def test_load_buffering_cycle(self):
        execution = load_buffering_cycle()
        self.assertEqual(check_model('rc11_lite', execution).violated, ('no-lb',))
        self.assertTrue(check_model('rc11_lb', execution))
        self.assertEqual(check_model('sc', execution).violated, ('sc',))

    def test_model_objects_are_accepted(self):
        self.assertTrue(check_model(lookup('rc11_lb'), load_buffering_cycle()))


class ListModelsCommandTests(SimpleTestCase):

    def test_lists_every_model(self):
        stdout = StringIO()
        call_command('list_models', stdout=stdout)
        output = stdout.getvalue()
        for name in builtin_models():
            self.assertIn(name, output)
        self.assertIn('acyclic po | rf as no-lb', output)


class MemoryModelAPITests(APITestCase):

    def setUp(self):
        self.user = get_user_model().objects.create_user(username='analyst', password='litmus-pass')
        self.client.force_authenticate(self.user)

    def test_list(self):
        response = self.client.get('/api/memory-models/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([model['name'] for model in response.data], list(builtin_models()))

    def test_retrieve(self):
        response = self.client.get('/api/memory-models/tso/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([c['label'] for c in response.data['constraints']], ['sc-per-location', 'tso'])
        self.assertEqual(response.data['dialects'], ['C', 'AArch64', 'ABS'])

    def test_unknown_model(self):
        response = self.client.get('/api/memory-models/power/')
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_requires_authentication(self):
        self.client.force_authenticate(None)
        response = self.client.get('/api/memory-models/')
        self.assertIn(response.status_code, (status.HTTP_401_UNAUTHORIZED, status.HTTP_403_FORBIDDEN))
