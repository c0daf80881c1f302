import factory
from django.utils import timezone

from .models import BatchRun, PipelineRunRecord


class BatchRunFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = BatchRun

    name = factory.Faker('slug')
    profiles = factory.LazyFunction(lambda: ['mapping-O2', 'mapping-O0'])
    status = BatchRun.Status.FINISHED
    test_count = 1
    finished_at = factory.LazyFunction(timezone.now)


class PipelineRunRecordFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = PipelineRunRecord

    batch = factory.SubFactory(BatchRunFactory)
    test_name = factory.Sequence(lambda n: f'LB+{n}')
    profile_name = 'mapping-O2'
    classification = 'equal'

    class Params:
        positive = factory.Trait(
            classification='positive',
            novel_outcomes=['[0:r0=1; 1:r0=1;]'],
        )
        failed = factory.Trait(
            classification='',
            failure_stage='compile',
            error='cc not found on PATH',
        )
