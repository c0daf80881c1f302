from celery import shared_task
from celery.utils.log import get_task_logger

from litmus.services import LitmusError, parse_litmus

from .services.profiles import CompilerProfile
from .services.runner import PipelineRun, RunOptions, run_pipeline

logger = get_task_logger(__name__)


@shared_task
def run_pipeline_task(test_text, profile_data, options=None):
    """
    Run one test through one profile and return the run record.

    Never raises: stage failures are part of the record.
    """
    profile = CompilerProfile.from_dict(profile_data)
    try:
        test = parse_litmus(test_text)
    except LitmusError as exc:
        logger.warning('Could not parse batch test: %s', exc)
        record = PipelineRun('?', profile.name, failure_stage='parse', error=str(exc))
        return record.as_dict()
    return run_pipeline(test, profile, RunOptions.from_dict(options)).as_dict()
