"""
Batches: every test through every profile, fanned out as Celery groups.
"""

import logging

from celery import group
from django.utils import timezone

from litmus.services import render_litmus

from .profiles import pipeline_setting
from .runner import RunOptions
from .summary import summarize

logger = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 4


def batch_jobs(tests, profiles, options):
    """Task signatures in (test, profile) order."""
    from pipeline.tasks import run_pipeline_task

    options = (options or RunOptions()).to_dict()
    return [
        run_pipeline_task.s(render_litmus(test), profile.to_dict(), options)
        for test in tests
        for profile in profiles
    ]


def run_batch(tests, profiles, options=None, parallelism=None):
    """
    Run every test through every profile; returns the run records (dicts)
    in (test, profile) order. At most ``parallelism`` runs are in flight.
    """
    parallelism = max(1, parallelism or pipeline_setting('BATCH_PARALLELISM', DEFAULT_PARALLELISM))
    jobs = batch_jobs(tests, profiles, options)
    started = timezone.now()
    records = []
    for start in range(0, len(jobs), parallelism):
        result = group(jobs[start:start + parallelism]).apply_async()
        records.extend(result.get(disable_sync_subtasks=False))
    table = summarize(records, [profile.name for profile in profiles])
    logger.info('Batch of %d run(s) finished in %.1fs: %d positive, %d failed', len(records),
                (timezone.now() - started).total_seconds(),
                int(table['positive'].sum()), int(table['failed'].sum()))
    return records


def record_batch(records, profiles, name=''):
    """Store a finished batch and its records; returns the ``BatchRun``."""
    from pipeline.models import BatchRun, PipelineRunRecord

    batch = BatchRun.objects.create(
        name=name,
        profiles=[profile.name for profile in profiles],
        status=BatchRun.Status.FINISHED,
        test_count=len({record['name'] for record in records}),
        finished_at=timezone.now(),
    )
    PipelineRunRecord.objects.bulk_create(
        PipelineRunRecord.from_record(batch, record) for record in records
    )
    return batch
