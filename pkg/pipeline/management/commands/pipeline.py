from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from diffcheck.services.compare import COMPARE_ANYWAY, IGNORE_RACY
from litmus.services import LitmusError, load_litmus_file
from pipeline.services.exceptions import PipelineError
from pipeline.services.profiles import get_profile, pipeline_setting
from pipeline.services.runner import RunOptions, parse_rule_list, run_pipeline


class Command(BaseCommand):
    help = 'Compile one litmus test with a compiler profile and compare the outcomes'

    def add_arguments(self, parser):
        parser.add_argument('test', help='Source .litmus file')
        parser.add_argument('--profile', required=True, help='Compiler profile name')
        parser.add_argument('--profiles-file', default=None)
        parser.add_argument('--persist-locals', default=None,
                            help="'auto', 'off' or a YAML persistence plan (default: PERSIST_LOCALS)")
        parser.add_argument('--source-model', default=None)
        parser.add_argument('--target-model', default=None)
        parser.add_argument('--racy-policy', choices=[IGNORE_RACY, COMPARE_ANYWAY], default=None)
        parser.add_argument('--output-dir', default=None,
                            help='Artifact directory (default: PIPELINE OUTPUT_DIR)')
        parser.add_argument('--opt-rules', default=None,
                            help='Comma-separated peephole rules (default: all)')

    def handle(self, *args, **options):
        try:
            test = load_litmus_file(options['test'])
            profile = get_profile(options['profile'], options['profiles_file'])
        except OSError as exc:
            raise CommandError(f'Cannot read input: {exc}', returncode=2)
        except (LitmusError, PipelineError) as exc:
            raise CommandError(str(exc), returncode=2)
        profile = profile.with_models(options['source_model'], options['target_model'])

        output_dir = options['output_dir'] or pipeline_setting('OUTPUT_DIR')
        run = run_pipeline(test, profile, RunOptions(
            persist=options['persist_locals'],
            peephole_rules=parse_rule_list(options['opt_rules']),
            racy_policy=options['racy_policy'],
            output_dir=Path(output_dir) if output_dir else None,
        ))
        if run.failed:
            raise CommandError(f'{test.name} failed at {run.failure_stage}: {run.error}', returncode=2)

        self.stdout.write(run.report.table, ending='')
        for name in run.report.dropped:
            self.stdout.write(self.style.WARNING(f'Unmapped target observable {name} dropped'))
        if run.artifact_dir:
            self.stdout.write(f'Artifacts in {run.artifact_dir}')
        if run.is_positive:
            raise CommandError(f'Positive difference: {len(run.report.novel_outcomes)} novel outcome(s)',
                               returncode=1)
        self.stdout.write(self.style.SUCCESS(f'Result: {run.report.classification.label}'))
