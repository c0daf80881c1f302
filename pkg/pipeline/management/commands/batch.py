import json
from pathlib import Path

import yaml
from django.core.management.base import BaseCommand, CommandError

from diffcheck.services.compare import COMPARE_ANYWAY, IGNORE_RACY
from litmus.services import LitmusError, load_litmus_file
from pipeline.services.batch import record_batch, run_batch
from pipeline.services.exceptions import PipelineError, UnknownProfile
from pipeline.services.profiles import load_profiles, pipeline_setting
from pipeline.services.runner import RunOptions, parse_rule_list
from pipeline.services.summary import render_summary, summarize
from transforms.services.exceptions import TransformError
from transforms.services.generator import generate_pattern_tests, load_grid


class Command(BaseCommand):
    help = 'Run litmus tests through several compiler profiles and summarise the differences'

    def add_arguments(self, parser):
        parser.add_argument('tests', nargs='*', help='Source .litmus files')
        parser.add_argument('--conf', default=None, help='YAML pattern grid to generate tests from')
        parser.add_argument('--profiles', required=True, help='Comma-separated profile names')
        parser.add_argument('--profiles-file', default=None)
        parser.add_argument('-j', '--parallelism', type=int, default=None)
        parser.add_argument('--persist-locals', default=None)
        parser.add_argument('--opt-rules', default=None, help='Comma-separated peephole rules')
        parser.add_argument('--source-model', default=None)
        parser.add_argument('--target-model', default=None)
        parser.add_argument('--racy-policy', choices=[IGNORE_RACY, COMPARE_ANYWAY], default=None)
        parser.add_argument('--output-dir', default=None)
        parser.add_argument('--jsonl', default=None, help='Write one record per run to this file')
        parser.add_argument('--record', action='store_true', help='Store the batch in the database')
        parser.add_argument('--name', default='', help='Label for the recorded batch')

    def handle(self, *args, **options):
        try:
            profiles = self._profiles(options)
            tests = self._tests(options)
        except OSError as exc:
            raise CommandError(f'Cannot read input: {exc}', returncode=2)
        except (LitmusError, PipelineError, TransformError, yaml.YAMLError) as exc:
            raise CommandError(str(exc), returncode=2)

        output_dir = options['output_dir'] or pipeline_setting('OUTPUT_DIR')
        run_options = RunOptions(
            persist=options['persist_locals'],
            peephole_rules=parse_rule_list(options['opt_rules']),
            racy_policy=options['racy_policy'],
            output_dir=Path(output_dir) if output_dir else None,
        )
        records = run_batch(tests, profiles, run_options, options['parallelism'])

        if options['jsonl']:
            with open(options['jsonl'], 'w', encoding='utf-8') as handle:
                for record in records:
                    handle.write(json.dumps(record, sort_keys=True) + '\n')
        if options['record']:
            batch = record_batch(records, profiles, options['name'] or options['conf'] or '')
            self.stdout.write(f'Recorded batch {batch.pk}')

        table = summarize(records, [profile.name for profile in profiles])
        self.stdout.write(render_summary(table), ending='')
        for record in records:
            if record['failure_stage']:
                self.stdout.write(self.style.WARNING(
                    f"{record['name']} via {record['profile']} failed at "
                    f"{record['failure_stage']}: {record['error']}"))

        positives, failures = int(table['positive'].sum()), int(table['failed'].sum())
        if positives:
            raise CommandError(f'{positives} positive difference(s)', returncode=1)
        if failures:
            raise CommandError(f'{failures} run(s) failed', returncode=2)
        self.stdout.write(self.style.SUCCESS(f'{len(records)} run(s), no positive differences'))

    def _profiles(self, options):
        available = load_profiles(options['profiles_file'])
        selected = []
        for name in (part.strip() for part in options['profiles'].split(',')):
            if not name:
                continue
            if name not in available:
                raise UnknownProfile(name, available)
            selected.append(available[name].with_models(options['source_model'], options['target_model']))
        return selected

    def _tests(self, options):
        tests = [load_litmus_file(path) for path in options['tests']]
        if options['conf']:
            tests.extend(generate_pattern_tests(load_grid(options['conf'])))
        return tests
