from django.core.management.base import BaseCommand, CommandError

from executions.services.exceptions import SimulationError
from executions.services.simulate import simulate
from litmus.services import LitmusError, load_litmus_file
from memory_models.services import ModelError


class Command(BaseCommand):
    help = 'Simulate a litmus test under a memory model and print a herd-style log'

    def add_arguments(self, parser):
        parser.add_argument('test', help='Path to a .litmus file')
        parser.add_argument('--model', default='rc11_lite')
        parser.add_argument('--unroll', type=int, default=None)
        parser.add_argument('--cap', type=int, default=None, help='Candidate budget')
        parser.add_argument('--timeout', type=float, default=None, help='Wall-clock budget in seconds')
        parser.add_argument('--races', action='store_true', help='Also report data races')

    def handle(self, *args, **options):
        try:
            test = load_litmus_file(options['test'])
            result = simulate(
                test, options['model'],
                unroll_factor=options['unroll'],
                cap=options['cap'],
                timeout=options['timeout'],
                collect_races=options['races'],
            )
        except OSError as exc:
            raise CommandError(f'Cannot read {options["test"]}: {exc}', returncode=2)
        except (LitmusError, SimulationError, ModelError) as exc:
            raise CommandError(str(exc), returncode=2)

        self.stdout.write(result.log, ending='')
        if options['races']:
            if not result.races:
                self.stdout.write(self.style.SUCCESS('No data races'))
            for first, second in result.races:
                self.stdout.write(self.style.WARNING(f'Race {first.label()} <-> {second.label()}'))
