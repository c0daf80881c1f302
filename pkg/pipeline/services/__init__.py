"""
Pipeline services: compiler profiles, source preparation, compilation,
disassembly reading, single runs and batches.
"""

from .disasm import SymbolMap, asm_to_litmus, parse_objdump
from .exceptions import (
    CompileFailed,
    DisassembleFailed,
    InvalidProfile,
    PipelineError,
    StageTimeout,
    ThreadMismatch,
    ToolFailed,
    ToolNotFound,
    UnknownProfile,
    UnmappedAddress,
    UnsupportedConstruct,
)
from .l2c import prepare_source, register_plan
from .mapping_compiler import CompileOptions, compile_mapping, render_objdump
from .profiles import CompilerProfile, get_profile, load_profiles, parse_profiles
from .runner import PipelineRun, RunOptions, run_pipeline
from .summary import render_summary, summarize, summary_rows
from .toolchain import compile_and_disassemble

__all__ = [
    'CompileFailed', 'CompileOptions', 'CompilerProfile', 'DisassembleFailed', 'InvalidProfile',
    'PipelineError', 'PipelineRun', 'RunOptions', 'StageTimeout', 'SymbolMap', 'ThreadMismatch',
    'ToolFailed', 'ToolNotFound', 'UnknownProfile', 'UnmappedAddress', 'UnsupportedConstruct',
    'asm_to_litmus', 'compile_and_disassemble', 'compile_mapping', 'get_profile', 'load_profiles',
    'parse_objdump', 'parse_profiles', 'prepare_source', 'register_plan', 'render_objdump',
    'render_summary', 'run_pipeline', 'summarize', 'summary_rows',
]
