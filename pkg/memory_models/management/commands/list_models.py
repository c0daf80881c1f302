from django.core.management.base import BaseCommand

from memory_models.services import builtin_models


class Command(BaseCommand):
    help = 'List the builtin memory models with their dialects and constraints'

    def add_arguments(self, parser):
        parser.add_argument('--expand', action='store_true',
                            help='Print named relations in full')

    def handle(self, *args, **options):
        for model in builtin_models().values():
            dialects = ', '.join(dialect.value for dialect in model.dialects)
            self.stdout.write(self.style.SUCCESS(f'{model.name}') + f'  [{dialects}]  {model.description}')
            for constraint in model.constraints:
                self.stdout.write(f'  {constraint.describe(expand=options["expand"])}')
