import itertools
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from executions.services.candidates import Budget, enumerate_candidates
from executions.services.events import CandidateExecution, Event, EventKind, Relation, derive_fr
from executions.services.exceptions import CandidateExplosion, IncompatibleModel, RecursionUnsupported
from executions.services.herd import observation
from executions.services.outcomes import outcome_of
from executions.services.paths import thread_paths
from executions.services.simulate import detect_races, simulate, simulation_setting
from executions.services.unroll import unroll
from litmus.services import exprs, load_litmus_file, parse_litmus
from litmus.services.instructions import Instruction, LabelRef, Stuck
from memory_models.services import check_model
from transforms.services.generator import expand_grid, generate_pattern_tests, load_grid

CORPUS = Path(settings.BASE_DIR) / 'litmus' / 'corpus'
GRIDS = Path(settings.BASE_DIR) / 'transforms' / 'grids'

SPIN = """AArch64 SPIN
{ 0:X1=x; 1:X1=x; }
P0 (r0=X0) {
L0:
  LDR W0,[X1]
  CBZ W0,L0
}
P1 {
  MOV W2,#1
  STR W2,[X1]
}
exists (P0_r0=1)
"""

STORE_ONLY = """C STORE
{ x = 0; }
P0 (atomic_int* x) {
  atomic_store_explicit(x, 1, memory_order_relaxed);
}
exists (x=1)
"""

CONCURRENT_INCREMENTS = """C 2+FAA
{ x = 0; }
P0 (atomic_int* x) {
  int r0 = atomic_fetch_add_explicit(x, 1, memory_order_relaxed);
}
P1 (atomic_int* x) {
  int r0 = atomic_fetch_add_explicit(x, 1, memory_order_relaxed);
}
exists (0:r0=0 /\\ 1:r0=0)
"""


def corpus(name):
    return load_litmus_file(CORPUS / name)


def outcome_dicts(result):
    return {outcome.bindings for outcome in result.outcomes}


def candidate_key(execution):
    placement = tuple((event.id, event.kind, event.loc, event.value) for event in execution.events)
    return execution.path_choices, placement, execution.rf.pairs, execution.co.pairs


# ============================================
# SC REFERENCE INTERPRETER
# ============================================

class Interleavings:
    """
    Brute-force sequential-consistency interpreter for source tests:
    every interleaving of the threads' memory statements over one memory.
    """

    def __init__(self, test):
        self.test = test

    def outcomes(self):
        test = self.test
        memory = {loc: test.init.type_of(loc).wrap(test.init.value_of(loc))
                  for loc in test.shared_locations()}
        start = tuple((thread.body, ()) for thread in test.threads)
        found = set()
        self._explore(start, memory, found)
        return found

    def _explore(self, state, memory, found):
        runnable = [tid for tid, (body, _) in enumerate(state) if body]
        if not runnable:
            found.add(self._observe(state, memory))
            return
        for tid in runnable:
            body, registers = state[tid]
            registers = dict(registers)
            after = dict(memory)
            rest = self._step(tid, body, registers, after)
            next_state = state[:tid] + ((rest, tuple(sorted(registers.items()))),) + state[tid + 1:]
            self._explore(next_state, after, found)

    def _step(self, tid, body, registers, memory):
        thread = self.test.threads[tid]
        init = self.test.init
        stmt, rest = body[0], body[1:]
        # Register-only statements run together with the next access.
        while isinstance(stmt, (exprs.If, exprs.Assign)):
            if isinstance(stmt, exprs.If):
                branch = stmt.then if self._eval(stmt.cond, registers) else stmt.orelse
                body = tuple(branch) + rest
            else:
                registers[stmt.reg] = thread.register_type(stmt.reg).wrap(self._eval(stmt.expr, registers))
                body = rest
            if not body:
                return ()
            stmt, rest = body[0], body[1:]
        if isinstance(stmt, exprs.Store):
            memory[stmt.loc] = init.type_of(stmt.loc).wrap(self._eval(stmt.expr, registers))
        elif isinstance(stmt, exprs.Load):
            registers[stmt.reg] = thread.register_type(stmt.reg).wrap(memory[stmt.loc])
        elif isinstance(stmt, (exprs.FetchAdd, exprs.Exchange)):
            old = memory[stmt.loc]
            operand = self._eval(stmt.expr, registers)
            new = old + operand if isinstance(stmt, exprs.FetchAdd) else operand
            memory[stmt.loc] = init.type_of(stmt.loc).wrap(new)
            if stmt.reg is not None:
                registers[stmt.reg] = thread.register_type(stmt.reg).wrap(old)
        return rest

    def _eval(self, expr, registers):
        if isinstance(expr, exprs.Const):
            return expr.value
        if isinstance(expr, exprs.Reg):
            return registers.get(expr.name, 0)
        if isinstance(expr, exprs.Add):
            return self._eval(expr.left, registers) + self._eval(expr.right, registers)
        return int(self._eval(expr.left, registers) == self._eval(expr.right, registers))

    def _observe(self, state, memory):
        test = self.test
        bindings = {}
        for observable in test.observables():
            if observable.is_register:
                value = dict(state[observable.thread][1]).get(observable.name, 0)
            else:
                value = memory[observable.name]
            bindings[observable.key(test.dialect)] = value
        return tuple(sorted(bindings.items()))


# ============================================
# UNROLLING AND PATHS
# ============================================

class UnrollTests(SimpleTestCase):

    def test_source_tests_are_untouched(self):
        test = corpus('MP.litmus')
        self.assertIs(unroll(test, 2), test)

    def test_spin_loop_is_copied_factor_times(self):
        test = unroll(parse_litmus(SPIN), 2)
        body = test.thread(0).body
        loads = [item for item in body if isinstance(item, Instruction) and item.op == 'LDR']
        self.assertEqual(len(loads), 2)
        self.assertEqual(sum(isinstance(item, Stuck) for item in body), 1)

    def test_invalid_factor(self):
        with self.assertRaises(ValueError):
            unroll(parse_litmus(SPIN), 0)

    def test_calls_are_rejected(self):
        test = corpus('asm/LB.litmus')
        call = replace(test.thread(0), body=(Instruction('BL', (LabelRef('f'),)),))
        with self.assertRaises(RecursionUnsupported):
            unroll(replace(test, threads=(call,) + test.threads[1:]), 2)


class ThreadPathTests(SimpleTestCase):

    def test_straight_line_thread_has_one_path(self):
        test = corpus('MP.litmus')
        paths = thread_paths(test, test.thread(1))
        self.assertEqual(len(paths), 1)
        self.assertEqual([event.kind for event in paths[0].events], [EventKind.READ, EventKind.READ])

    def test_spin_loop_paths_past_the_bound_are_dropped(self):
        test = unroll(parse_litmus(SPIN), 2)
        self.assertEqual(len(thread_paths(test, test.thread(0))), 2)

    def test_false_dependencies_are_tracked(self):
        [test] = generate_pattern_tests({'shapes': ['LB'], 'dependencies': ['data']})
        [path] = thread_paths(test, test.thread(0))
        read, write = path.events
        self.assertEqual(write.data_deps, frozenset({read.index}))

    def test_control_dependency_survives_a_concrete_condition(self):
        [test] = generate_pattern_tests({'shapes': ['LB'], 'dependencies': ['ctrl']})
        [path] = thread_paths(test, test.thread(0))
        read, write = path.events
        self.assertEqual(write.ctrl_deps, frozenset({read.index}))


# ============================================
# CANDIDATES
# ============================================

class EnumerationTests(SimpleTestCase):

    def test_store_buffering_has_four_candidates(self):
        self.assertEqual(len(list(enumerate_candidates(corpus('SB.litmus')))), 4)

    def test_single_store_has_one_candidate(self):
        [execution] = enumerate_candidates(parse_litmus(STORE_ONLY))
        self.assertEqual(execution.final_memory(), {'x': 1})

    def test_reads_take_values_of_their_sources(self):
        for execution in enumerate_candidates(corpus('SB.litmus')):
            events = {event.id: event for event in execution.events}
            for source, target in execution.rf:
                self.assertEqual(events[source].value, events[target].value)
                self.assertEqual(events[source].loc, events[target].loc)

    def test_cap_is_enforced(self):
        with self.assertRaises(CandidateExplosion):
            list(enumerate_candidates(corpus('SB.litmus'), budget=Budget(cap=2)))

    def test_derive_fr(self):
        events = (
            Event(0, -1, EventKind.WRITE, 'x', 0),
            Event(1, 0, EventKind.WRITE, 'x', 1),
            Event(2, 1, EventKind.READ, 'x', 0),
        )
        execution = CandidateExecution(
            events=events,
            po=Relation('po'),
            rf=Relation('rf', frozenset({(0, 2)})),
            co=Relation('co', frozenset({(0, 1)})),
        )
        self.assertEqual(derive_fr(execution).pairs, frozenset({(2, 1)}))
        self.assertEqual(execution.final_memory(), {'x': 1})

    def test_candidates_are_distinct(self):
        for name in ('SB.litmus', 'MP+rmw.litmus', 'LB3.litmus'):
            with self.subTest(test=name):
                seen = [candidate_key(execution) for execution in enumerate_candidates(corpus(name))]
                self.assertEqual(len(seen), len(set(seen)))

    def test_concurrent_increments_never_both_read_the_initial_value(self):
        test = parse_litmus(CONCURRENT_INCREMENTS)
        reads = [
            tuple(execution.register_file(tid).get('r0') for tid in (0, 1))
            for execution in enumerate_candidates(test)
        ]
        self.assertCountEqual(reads, [(0, 1), (1, 0)])
        for model in ('sc', 'tso', 'rc11_lite', 'rc11_lb'):
            with self.subTest(model=model):
                self.assertEqual(outcome_dicts(simulate(test, model)), {
                    (('0:r0', 0), ('1:r0', 1)),
                    (('0:r0', 1), ('1:r0', 0)),
                })

    def test_stale_message_read_is_from_read_before_the_data_write(self):
        test = corpus('MP.litmus')
        [execution] = [
            execution for execution in enumerate_candidates(test)
            if outcome_of(test, execution).as_dict() == {'1:r0': 1, '1:r1': 0}
        ]
        events = {(event.thread, event.loc): event for event in execution.events if not event.is_init}
        data_write, flag_write = events[(0, 'x')], events[(0, 'y')]
        flag_read, data_read = events[(1, 'y')], events[(1, 'x')]
        self.assertIn((flag_write.id, flag_read.id), execution.rf)
        self.assertIn(execution.rf_source(data_read.id), execution.init_writes)
        self.assertEqual(execution.fr.pairs, frozenset({(data_read.id, data_write.id)}))
        for model in ('sc', 'rc11_lite'):
            with self.subTest(model=model):
                verdict = check_model(model, execution)
                self.assertFalse(verdict)
                self.assertTrue(verdict.violated)


class CandidateInvariantTests(SimpleTestCase):
    """Well-formedness of every candidate over the shape grid."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tests = generate_pattern_tests(load_grid(GRIDS / 'shapes.yaml'))

    def test_every_read_has_one_rf_source(self):
        for test in self.tests:
            with self.subTest(test=test.name):
                for execution in enumerate_candidates(test):
                    events = {event.id: event for event in execution.events}
                    for read in execution.reads():
                        sources = [source for source, target in execution.rf.pairs if target == read.id]
                        self.assertEqual(len(sources), 1)
                        self.assertTrue(events[sources[0]].kind.is_write)
                        self.assertEqual(events[sources[0]].loc, read.loc)

    def test_co_totally_orders_each_location_after_its_init_write(self):
        for test in self.tests:
            with self.subTest(test=test.name):
                for execution in enumerate_candidates(test):
                    by_loc = {}
                    for write in execution.writes():
                        by_loc.setdefault(write.loc, []).append(write)
                    for writes in by_loc.values():
                        [init] = [write for write in writes if write.is_init]
                        for write in writes:
                            if write is not init:
                                self.assertIn((init.id, write.id), execution.co)
                                self.assertNotIn((write.id, init.id), execution.co)
                        for first, second in itertools.combinations(writes, 2):
                            ordered = [(first.id, second.id) in execution.co,
                                       (second.id, first.id) in execution.co]
                            self.assertEqual(ordered.count(True), 1)

    def test_witnesses_satisfy_the_model(self):
        for model in ('sc', 'rc11_lite'):
            for test in self.tests:
                with self.subTest(test=test.name, model=model):
                    result = simulate(test, model)
                    for outcome in result.outcomes:
                        witness = result.outcomes.witness(outcome)
                        self.assertTrue(check_model(model, witness))
                        self.assertEqual(outcome_of(test, witness), outcome)


# ============================================
# SIMULATION
# ============================================

class SimulateTests(SimpleTestCase):

    def test_message_passing_under_rc11(self):
        result = simulate(corpus('MP.litmus'), 'rc11_lite')
        self.assertEqual(len(result.outcomes), 3)
        self.assertNotIn((('1:r0', 1), ('1:r1', 0)), outcome_dicts(result))
        self.assertEqual(observation(result), 'Never')

    def test_load_buffering_under_each_rc11_variant(self):
        test = corpus('LB.litmus')
        self.assertEqual(len(simulate(test, 'rc11_lite').outcomes), 3)
        relaxed = simulate(test, 'rc11_lb')
        self.assertEqual(len(relaxed.outcomes), 4)
        self.assertIn((('0:r0', 1), ('1:r0', 1)), outcome_dicts(relaxed))

    def test_store_buffering_sc_against_tso(self):
        test = corpus('SB.litmus')
        self.assertEqual(len(simulate(test, 'sc').outcomes), 3)
        self.assertEqual(len(simulate(test, 'tso').outcomes), 4)

    def test_fetch_add_acquire_in_source(self):
        result = simulate(corpus('MP+rmw.litmus'), 'rc11_lite')
        self.assertEqual(outcome_dicts(result), {
            (('1:r0', 0), ('y', 1)),
            (('1:r0', 1), ('y', 1)),
            (('1:r0', 1), ('y', 2)),
        })

    def test_stadd_drops_acquire(self):
        result = simulate(corpus('asm/MP+rmw.litmus'), 'armv8_lite')
        self.assertIn((('P1_r0', 0), ('y', 2)), outcome_dicts(result))
        self.assertEqual(observation(result), 'Sometimes')

    def test_load_buffering_asm(self):
        result = simulate(corpus('asm/LB.litmus'), 'armv8_lite')
        self.assertEqual(len(result.outcomes), 4)

    def test_three_thread_load_buffering_log(self):
        result = simulate(corpus('asm/LB3.litmus'), 'armv8_lite')
        self.assertEqual(len(result.outcomes), 8)
        self.assertIn('States 8\n', result.log)
        self.assertIn('Observation LB3 Sometimes 1 7', result.log)
        self.assertTrue(result.log.startswith('Test LB3 Allowed\n'))

    def test_got_materialisation_exhausts_a_small_cap(self):
        self.assertEqual(len(simulate(corpus('asm/LB3.litmus'), 'armv8_lite', cap=100).outcomes), 8)
        with self.assertRaises(CandidateExplosion):
            simulate(corpus('asm/LB3+got.litmus'), 'armv8_lite', cap=100)

    def test_spin_loop_is_bounded(self):
        result = simulate(parse_litmus(SPIN), 'armv8_lite', unroll_factor=2)
        self.assertEqual(outcome_dicts(result), {(('P0_r0', 1),)})

    def test_incompatible_models(self):
        with self.assertRaises(IncompatibleModel):
            simulate(corpus('asm/LB.litmus'), 'rc11_lite')
        with self.assertRaises(IncompatibleModel):
            simulate(corpus('LB.litmus'), 'armv8_lite')

    def test_results_are_deterministic(self):
        test = corpus('MP+rmw.litmus')
        first = simulate(test, 'rc11_lite')
        second = simulate(test, 'rc11_lite')
        self.assertEqual(first.outcomes, second.outcomes)
        self.assertEqual(first.outcomes.render(), second.outcomes.render())
        self.assertEqual(first.stats.candidates, second.stats.candidates)

    @override_settings(SIMULATION={'UNROLL_FACTOR': 3})
    def test_settings_override_defaults(self):
        self.assertEqual(simulation_setting('UNROLL_FACTOR'), 3)
        self.assertEqual(simulation_setting('CANDIDATE_CAP'), 1_000_000)


class RaceTests(SimpleTestCase):

    def test_plain_accesses_race(self):
        races = detect_races(corpus('MP+na.litmus'), 'rc11_lite')
        self.assertTrue(races)
        for first, second in races:
            self.assertEqual(first.loc, 'x')
            self.assertFalse(first.is_atomic and second.is_atomic)

    def test_atomic_test_is_race_free(self):
        self.assertEqual(detect_races(corpus('LB.litmus'), 'rc11_lite'), [])


# ============================================
# SC REFERENCE AGREEMENT
# ============================================

class SequentialConsistencyOracleTests(SimpleTestCase):

    def test_interpreter_matches_known_counts(self):
        self.assertEqual(len(Interleavings(corpus('SB.litmus')).outcomes()), 3)
        self.assertEqual(len(Interleavings(corpus('LB3.litmus')).outcomes()), 7)

    def test_sc_model_matches_interleavings_over_shape_grid(self):
        tests = generate_pattern_tests(expand_grid(load_grid(GRIDS / 'shapes.yaml')))
        self.assertGreaterEqual(len(tests), 200)
        for test in tests:
            with self.subTest(test=test.name):
                self.assertEqual(outcome_dicts(simulate(test, 'sc')), Interleavings(test).outcomes())

    def test_corpus_sources_match_interleavings(self):
        for name in ('MP.litmus', 'MP+rmw.litmus', 'LB.litmus', 'LB3.litmus', 'SB.litmus', 'MP+na.litmus'):
            test = corpus(name)
            with self.subTest(test=name):
                self.assertEqual(outcome_dicts(simulate(test, 'sc')), Interleavings(test).outcomes())


class ModelContainmentTests(SimpleTestCase):
    """sc is contained in tso and in rc11_lite, which is contained in rc11_lb."""

    def test_containment_over_shape_grid(self):
        for test in generate_pattern_tests(load_grid(GRIDS / 'shapes.yaml')):
            with self.subTest(test=test.name):
                sc = outcome_dicts(simulate(test, 'sc'))
                lite = outcome_dicts(simulate(test, 'rc11_lite'))
                lb = outcome_dicts(simulate(test, 'rc11_lb'))
                self.assertLessEqual(sc, lite)
                self.assertLessEqual(lite, lb)

    def test_sc_is_contained_in_tso(self):
        tests = generate_pattern_tests(load_grid(GRIDS / 'shapes.yaml'))
        tests += [corpus(name) for name in ('MP+rmw.litmus', 'LB3.litmus', 'SB.litmus')]
        for test in tests:
            with self.subTest(test=test.name):
                self.assertLessEqual(outcome_dicts(simulate(test, 'sc')), outcome_dicts(simulate(test, 'tso')))

    def test_tso_equals_sc_without_store_to_load_order(self):
        for test in generate_pattern_tests(load_grid(GRIDS / 'shapes.yaml')):
            if test.meta('shape') in ('SB', 'R'):
                continue
            with self.subTest(test=test.name):
                self.assertEqual(outcome_dicts(simulate(test, 'tso')), outcome_dicts(simulate(test, 'sc')))
