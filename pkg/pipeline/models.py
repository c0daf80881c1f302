from django.db import models
from django.db.models import Count, Q

from diffcheck.services import Classification

from .services.runner import STAGES
from .services.summary import summarize, summary_rows


class BatchRun(models.Model):
    """
    One batch: a set of tests run through a set of compiler profiles.

    The per-(test, profile) results are PipelineRunRecord rows.
    """

    class Status(models.TextChoices):
        RUNNING = 'RUNNING', 'Running'
        FINISHED = 'FINISHED', 'Finished'

    name = models.CharField(max_length=200, blank=True, help_text='Free-form label, e.g. the grid file')
    profiles = models.JSONField(default=list, help_text='Profile names, in run order')
    status = models.CharField(max_length=10, choices=Status.choices, default=Status.RUNNING)
    test_count = models.PositiveIntegerField(default=0)
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f'Batch {self.pk} {self.name}'.strip()

    def as_records(self):
        return [record.as_record() for record in self.records.all()]

    def summary(self):
        return summary_rows(summarize(self.as_records(), self.profiles))

    @classmethod
    def with_counts(cls):
        return cls.objects.annotate(
            positive_count=Count('records', filter=Q(records__classification=Classification.POSITIVE)),
            failed_count=Count('records', filter=~Q(records__failure_stage='')),
        )


class PipelineRunRecord(models.Model):
    """One test through one compiler profile."""

    FAILURE_STAGE_CHOICES = [('', 'None')] + [(stage, stage) for stage in STAGES]

    batch = models.ForeignKey(BatchRun, on_delete=models.CASCADE, related_name='records')
    test_name = models.CharField(max_length=200)
    profile_name = models.CharField(max_length=100)
    classification = models.CharField(max_length=20, choices=Classification.choices, blank=True)
    failure_stage = models.CharField(max_length=20, choices=FAILURE_STAGE_CHOICES, blank=True)
    error = models.TextField(blank=True)
    novel_outcomes = models.JSONField(default=list)
    missing_outcomes = models.JSONField(default=list)
    dropped = models.JSONField(default=list)
    races = models.JSONField(default=list)
    timings = models.JSONField(default=dict)
    artifact_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['batch', 'test_name', 'profile_name']
        indexes = [
            models.Index(fields=['classification'], name='pipeline_run_class_idx'),
            models.Index(fields=['profile_name'], name='pipeline_run_profile_idx'),
        ]

    def __str__(self):
        return f'{self.test_name} via {self.profile_name}: {self.classification or self.failure_stage}'

    @property
    def failed(self):
        return bool(self.failure_stage)

    @classmethod
    def from_record(cls, batch, record):
        return cls(
            batch=batch,
            test_name=record['name'],
            profile_name=record['profile'],
            classification=record['classification'],
            failure_stage=record['failure_stage'] or '',
            error=record['error'],
            novel_outcomes=record['novel_outcomes'],
            missing_outcomes=record['missing_outcomes'],
            dropped=record['dropped'],
            races=record['races'],
            timings=record['timings'],
            artifact_dir=record['artifact_dir'],
        )

    def as_record(self):
        return {
            'name': self.test_name,
            'profile': self.profile_name,
            'classification': self.classification,
            'failure_stage': self.failure_stage,
            'error': self.error,
            'novel_outcomes': self.novel_outcomes,
            'missing_outcomes': self.missing_outcomes,
            'dropped': self.dropped,
            'races': self.races,
            'timings': self.timings,
            'artifact_dir': self.artifact_dir,
        }
