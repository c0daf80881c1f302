import yaml
from django.core.management.base import BaseCommand, CommandError

from diffcheck.serializers import diff_record_line
from diffcheck.services import DiffError, compare_outcomes, infer_state_mapping
from diffcheck.services.compare import COMPARE_ANYWAY, IGNORE_RACY
from executions.services.exceptions import SimulationError
from executions.services.simulate import simulate
from litmus.services import LitmusError, load_litmus_file
from memory_models.services import ModelError


def default_model(test):
    return 'armv8_lite' if test.is_asm else 'rc11_lite'


class Command(BaseCommand):
    help = 'Compare the outcomes of a compiled litmus test against its source test'

    def add_arguments(self, parser):
        parser.add_argument('source', help='Source .litmus file')
        parser.add_argument('target', help='Compiled .litmus file')
        parser.add_argument('--map', dest='map_file', default=None,
                            help='YAML document mapping source observables to target ones')
        parser.add_argument('--source-model', default=None)
        parser.add_argument('--target-model', default=None)
        parser.add_argument('--racy-policy', choices=[IGNORE_RACY, COMPARE_ANYWAY], default=None)
        parser.add_argument('--jsonl', default=None, help='Append the diff record to this file')

    def handle(self, *args, **options):
        try:
            src = load_litmus_file(options['source'])
            tgt = load_litmus_file(options['target'])
            hints = self._load_hints(options['map_file'])
            mapping = infer_state_mapping(src, tgt, hints)
            src_result = simulate(src, options['source_model'] or default_model(src),
                                  collect_races=not src.is_asm)
            tgt_result = simulate(tgt, options['target_model'] or default_model(tgt))
            report = compare_outcomes(
                src_result.outcomes, tgt_result.outcomes, mapping,
                races=src_result.races,
                racy_policy=options['racy_policy'],
                source_name=src.name,
                target_name=tgt.name,
            )
            record = diff_record_line(report, name=src.name, timings={
                'simulate_source': src_result.stats.elapsed,
                'simulate_target': tgt_result.stats.elapsed,
            })
            if options['jsonl']:
                with open(options['jsonl'], 'a', encoding='utf-8') as handle:
                    handle.write(record + '\n')
        except OSError as exc:
            raise CommandError(f'Cannot read or write test files: {exc}', returncode=2)
        except (LitmusError, SimulationError, ModelError, DiffError, yaml.YAMLError) as exc:
            raise CommandError(str(exc), returncode=2)

        self.stdout.write(report.table, ending='')
        for name in report.dropped:
            self.stdout.write(self.style.WARNING(f'Unmapped target observable {name} dropped'))
        if report.is_positive:
            raise CommandError(f'Positive difference: {len(report.novel_outcomes)} novel outcome(s)',
                               returncode=1)
        self.stdout.write(self.style.SUCCESS(f'Result: {report.classification.label}'))

    def _load_hints(self, path):
        if not path:
            return None
        with open(path, encoding='utf-8') as handle:
            hints = yaml.safe_load(handle) or {}
        if not isinstance(hints, dict):
            raise CommandError(f'{path}: expected a mapping of source to target observables',
                               returncode=2)
        return hints
