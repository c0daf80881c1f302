"""
External compiler and disassembler invocation.

Commands are argv templates with ``{input}`` and ``{output}``
placeholders, run without a shell and under a wall-clock limit.
"""

import logging
import subprocess
from contextlib import nullcontext
from pathlib import Path
from tempfile import TemporaryDirectory

from .disasm import parse_objdump
from .exceptions import CompileFailed, DisassembleFailed, StageTimeout, ToolNotFound
from .profiles import pipeline_setting

logger = logging.getLogger(__name__)

DEFAULT_STAGE_TIMEOUT = 60


def stage_timeout():
    return pipeline_setting('STAGE_TIMEOUT', DEFAULT_STAGE_TIMEOUT)


def expand_command(template, **paths):
    return [part.format(**{key: str(value) for key, value in paths.items()}) for part in template]


def run_tool(argv, stage, failure, timeout=None):
    """Run ``argv``; returns its stdout. ``failure`` is the ToolFailed subclass for a nonzero exit."""
    timeout = timeout or stage_timeout()
    logger.debug('Running %s: %s', stage, ' '.join(argv))
    try:
        completed = subprocess.run(argv, capture_output=True, text=True, timeout=timeout, check=False)
    except FileNotFoundError:
        raise ToolNotFound(argv[0]) from None
    except subprocess.TimeoutExpired:
        raise StageTimeout(stage, timeout) from None
    if completed.returncode != 0:
        raise failure(completed.returncode, completed.stderr)
    return completed.stdout


def compile_unit(profile, source_path, object_path, timeout=None):
    argv = expand_command(profile.compile_command, input=source_path, output=object_path)
    run_tool(argv, 'compile', CompileFailed, timeout)
    return Path(object_path)


def disassemble(profile, object_path, timeout=None):
    argv = expand_command(profile.disassemble_command, input=object_path)
    return run_tool(argv, 'disassemble', DisassembleFailed, timeout)


def compile_and_disassemble(unit, profile, directory=None, timeout=None, step=None):
    """
    Compile the translation unit text ``unit`` with ``profile``'s tools and
    disassemble the object; returns ``(listing, SymbolMap)``.

    Files go to ``directory`` (``unit.c``, ``unit.o``) or to a scratch
    directory removed afterwards. ``step(stage)`` wraps the ``compile`` and
    ``disassemble`` calls, so a caller can time them.
    """
    if directory is None:
        with TemporaryDirectory(prefix='litmus-') as scratch:
            return compile_and_disassemble(unit, profile, Path(scratch), timeout, step)
    step = step or (lambda stage: nullcontext())
    source_path, object_path = Path(directory) / 'unit.c', Path(directory) / 'unit.o'
    source_path.write_text(unit, encoding='utf-8')
    with step('compile'):
        compile_unit(profile, source_path, object_path, timeout)
    with step('disassemble'):
        listing = disassemble(profile, object_path, timeout)
    _, symbols = parse_objdump(listing)
    return listing, symbols
