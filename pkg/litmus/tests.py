from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase
from rest_framework import status
from rest_framework.test import APITestCase

from litmus.factories import LitmusFileFactory, UserFactory
from litmus.models import LitmusFile
from litmus.services import (
    Dialect,
    LitmusSyntaxError,
    Order,
    UndeclaredObservable,
    UnknownMnemonic,
    UnresolvedLabel,
    load_litmus_file,
    parse_litmus,
    render_litmus,
    validate_test,
)
from litmus.services import exprs
from litmus.services.render import render_final

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'

UNKNOWN_MNEMONIC = """AArch64 BAD
{ 0:X1=x; }
P0 {
  FROB W0,[X1]
}
exists (x=0)
"""

DANGLING_BRANCH = """AArch64 DANGLING
{ 0:X1=x; }
P0 {
  CBZ W0,Lout
  STR W0,[X1]
}
exists (x=0)
"""

ATOMIC_INIT = """AArch64 WIDE
{ _Atomic(long) x = 0; uint8_t y = 0; 0:X1=x; 0:X3=y; }
P0 {
  MOV X2,#1
  STR X2,[X1]
  STRB W2,[X3]
}
exists (x=1 /\\ y=1)
"""

UNDECLARED_REGISTER = """C UNDECLARED
{ x = 0; }
P0 (atomic_int* x) {
  atomic_store_explicit(x, 1, memory_order_relaxed);
}
exists (0:r3=1)
"""

MISSPELLED_ORDER = """C MISSPELLED
{ x = 0; }
P0 (atomic_int* x) {
  atomic_store_explicit(x, 1, memory_order_sometimes);
}
exists (x=1)
"""

WITH_EXTRAS = """C EXTRAS
@shape: MP
{ int8_t x = 0; y = 0; }
P0 (_Atomic(int8_t)* x, atomic_int* y) {
  atomic_store_explicit(x, 1, memory_order_relaxed);
  atomic_thread_fence(memory_order_seq_cst);
  atomic_store_explicit(y, 1, memory_order_release);
}
P1 (_Atomic(int8_t)* x, atomic_int* y) {
  int r0 = atomic_load_explicit(y, memory_order_acquire);
  int8_t r1 = atomic_load_explicit(x, memory_order_relaxed);
}
locations [x;]
~exists (1:r0=1 /\\ 1:r1=0)
"""


def corpus(name):
    return load_litmus_file(CORPUS / name)


# ============================================
# PARSING
# ============================================

class ParserTests(SimpleTestCase):

    def test_source_test(self):
        test = corpus('LB.litmus')
        self.assertEqual((test.dialect, test.name), (Dialect.SOURCE, 'LB'))
        self.assertEqual(len(test.threads), 2)
        self.assertEqual(test.thread(0).body[0], exprs.Load('r0', 'x', Order.RLX))
        self.assertEqual(test.observable_keys(), ('0:r0', '1:r0'))
        self.assertEqual(test.init.locations(), ('x', 'y'))

    def test_asm_test_with_aliases(self):
        test = corpus('asm/LB.litmus')
        self.assertIs(test.dialect, Dialect.AARCH64)
        self.assertTrue(test.is_asm)
        self.assertEqual(test.thread(1).aliases, (('r0', 'X0'),))
        self.assertEqual(test.observable_keys(), ('P0_r0', 'P1_r0'))
        self.assertEqual([item.op for item in test.thread(0).body], ['LDR', 'MOV', 'STR'])

    def test_types_metadata_locations_and_quantifiers(self):
        test = parse_litmus(WITH_EXTRAS)
        self.assertEqual(test.meta('shape'), 'MP')
        self.assertEqual(test.init.type_of('x').bits, 8)
        self.assertEqual(test.thread(1).register_type('r1').bits, 8)
        self.assertIn('x', test.observable_keys())
        self.assertTrue(render_final(test).startswith('~exists'))
        self.assertEqual(test.thread(0).body[1], exprs.Fence(Order.SC))

    def test_asm_init_accepts_atomic_types(self):
        test = parse_litmus(ATOMIC_INIT)
        self.assertEqual(test.init.type_of('x').bits, 64)
        self.assertEqual(test.init.type_of('y').bits, 8)
        with self.assertRaises(LitmusSyntaxError) as context:
            parse_litmus(ATOMIC_INIT.replace('_Atomic(long)', '_Atomic(float)'))
        self.assertEqual((context.exception.line, context.exception.col), (2, 3))

    def test_syntax_errors_carry_positions(self):
        with self.assertRaises(LitmusSyntaxError) as context:
            parse_litmus(MISSPELLED_ORDER)
        self.assertEqual(context.exception.line, 4)
        with self.assertRaises(LitmusSyntaxError) as context:
            parse_litmus('Power LB\n{ }\n')
        self.assertEqual((context.exception.line, context.exception.col), (1, 1))

    def test_named_errors(self):
        with self.assertRaises(UnknownMnemonic):
            parse_litmus(UNKNOWN_MNEMONIC)
        with self.assertRaises(UnresolvedLabel):
            parse_litmus(DANGLING_BRANCH)
        with self.assertRaises(UndeclaredObservable):
            parse_litmus(UNDECLARED_REGISTER)


# ============================================
# RENDERING AND VALIDATION
# ============================================

class RenderTests(SimpleTestCase):

    def test_corpus_round_trips(self):
        for path in sorted(CORPUS.glob('**/*.litmus')):
            with self.subTest(test=path.name):
                test = load_litmus_file(path)
                self.assertEqual(parse_litmus(render_litmus(test)), test)

    def test_rendered_text_is_stable(self):
        test = parse_litmus(WITH_EXTRAS)
        once = render_litmus(test)
        self.assertEqual(render_litmus(parse_litmus(once)), once)
        self.assertIn('@shape: MP', once)
        self.assertIn('locations [x;]', once)


class ValidateTests(SimpleTestCase):

    def test_corpus_is_valid(self):
        for path in sorted(CORPUS.glob('**/*.litmus')):
            with self.subTest(test=path.name):
                self.assertEqual(validate_test(load_litmus_file(path)), [])

    def test_problems_are_reported_not_raised(self):
        test = corpus('LB.litmus')
        broken = replace(test, init=replace(test.init, values=test.init.values + (('x', 1),)))
        codes = [diagnostic.code for diagnostic in validate_test(broken)]
        self.assertEqual(codes, ['DuplicateInit'])

        empty = replace(test, threads=())
        codes = {diagnostic.code for diagnostic in validate_test(empty)}
        self.assertIn('NoThreads', codes)
        self.assertIn('UndeclaredObservable', codes)


# ============================================
# STORED TESTS
# ============================================

class LitmusFileModelTests(TestCase):

    def test_save_takes_fields_from_the_text(self):
        stored = LitmusFile.objects.create(name='', text=(CORPUS / 'LB3.litmus').read_text(encoding='utf-8'))
        self.assertEqual(stored.name, 'LB3')
        self.assertEqual(stored.dialect, 'C')
        self.assertEqual(stored.thread_count, 3)
        self.assertEqual(stored.diagnostics(), [])

    def test_unparsable_text_is_rejected(self):
        with self.assertRaises(ValidationError):
            LitmusFile.objects.create(name='broken', text='C broken\n{ x = 0; }\nP0 (')
        self.assertFalse(LitmusFile.objects.exists())


class LitmusFileAPITests(APITestCase):

    def setUp(self):
        self.client.force_authenticate(UserFactory())
        self.stored = LitmusFileFactory(name='LB+api')

    def test_list_and_filter(self):
        LitmusFileFactory(text=(CORPUS / 'asm' / 'LB.litmus').read_text(encoding='utf-8'), name='LB+asm')
        response = self.client.get('/api/litmus/', {'dialect': 'AArch64'})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([item['name'] for item in response.data['results']], ['LB+asm'])

    def test_create(self):
        text = (CORPUS / 'SB.litmus').read_text(encoding='utf-8')
        response = self.client.post('/api/litmus/', {'text': text}, format='json')
        self.assertEqual(response.status_code, status.HTTP_201_CREATED)
        self.assertEqual(response.data['name'], 'SB')
        self.assertEqual(response.data['observables'], ['0:r0', '1:r0'])

    def test_create_rejects_bad_text(self):
        response = self.client.post('/api/litmus/', {'text': MISSPELLED_ORDER}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('Line 4', response.data['text'][0])

    def test_duplicate_name(self):
        response = self.client.post('/api/litmus/', {'name': 'LB+api', 'text': self.stored.text}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('name', response.data)

    def test_simulate(self):
        response = self.client.post(f'/api/litmus/{self.stored.pk}/simulate/', {'model': 'rc11_lb'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data['outcomes']), 4)
        self.assertIn('[0:r0=1; 1:r0=1;]', response.data['outcomes'])
        self.assertEqual(response.data['positive'], 1)

        response = self.client.post(f'/api/litmus/{self.stored.pk}/simulate/', {'model': 'rc11_lite'},
                                    format='json')
        self.assertEqual(len(response.data['outcomes']), 3)

    def test_simulate_with_an_incompatible_model(self):
        response = self.client.post(f'/api/litmus/{self.stored.pk}/simulate/', {'model': 'armv8_lite'},
                                    format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('error', response.data)

    def test_simulate_with_an_unknown_model(self):
        response = self.client.post(f'/api/litmus/{self.stored.pk}/simulate/', {'model': 'power'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_validate(self):
        response = self.client.get(f'/api/litmus/{self.stored.pk}/validate/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data, {'valid': True, 'diagnostics': []})

    def test_requires_authentication(self):
        self.client.force_authenticate(None)
        response = self.client.get('/api/litmus/')
        self.assertIn(response.status_code, (status.HTTP_401_UNAUTHORIZED, status.HTTP_403_FORBIDDEN))
