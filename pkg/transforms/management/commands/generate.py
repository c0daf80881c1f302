from pathlib import Path

import yaml
from django.core.management.base import BaseCommand, CommandError

from litmus.services import render_litmus
from transforms.services.exceptions import TransformError
from transforms.services.generator import generate_pattern_tests, load_grid
from transforms.services.persistence import persist_locals


class Command(BaseCommand):
    help = 'Generate pattern litmus tests from a YAML grid, one .litmus file per grid point'

    def add_arguments(self, parser):
        parser.add_argument('--grid', required=True, help='YAML grid document')
        parser.add_argument('--out', default='generated', help='Output directory')
        parser.add_argument('--persist-locals', default='off',
                            help="'auto', 'off' or a YAML persistence plan")

    def handle(self, *args, **options):
        out = Path(options['out'])
        try:
            tests = generate_pattern_tests(load_grid(options['grid']))
            tests = [persist_locals(test, options['persist_locals']) for test in tests]
            out.mkdir(parents=True, exist_ok=True)
            for test in tests:
                (out / f'{test.name}.litmus').write_text(render_litmus(test), encoding='utf-8')
        except OSError as exc:
            raise CommandError(f'Cannot write tests: {exc}', returncode=2)
        except (TransformError, yaml.YAMLError) as exc:
            raise CommandError(str(exc), returncode=2)

        self.stdout.write(self.style.SUCCESS(f'Wrote {len(tests)} test(s) to {out}'))
