"""
Errors raised by the compile-and-compare pipeline.
"""


class PipelineError(Exception):
    """Base class for pipeline failures."""


class InvalidProfile(PipelineError):
    """A compiler profile document does not validate."""


class UnknownProfile(PipelineError):
    def __init__(self, name, known=()):
        self.name = name
        self.known = tuple(known)
        super().__init__(f'unknown compiler profile {name!r}; known: {", ".join(self.known)}')


class UnsupportedConstruct(PipelineError):
    def __init__(self, construct, test=None):
        self.construct = construct
        self.test = test
        where = f'{test}: ' if test else ''
        super().__init__(f'{where}cannot compile {construct}')


class ToolNotFound(PipelineError):
    def __init__(self, tool):
        self.tool = tool
        super().__init__(f'{tool} not found on PATH')


class ToolFailed(PipelineError):
    stage = 'tool'

    def __init__(self, exit_code, stderr=''):
        self.exit_code = exit_code
        self.stderr = stderr
        detail = stderr.strip().splitlines()[-1] if stderr.strip() else 'no output'
        super().__init__(f'{self.stage} exited with status {exit_code}: {detail}')


class CompileFailed(ToolFailed):
    stage = 'compiler'


class DisassembleFailed(ToolFailed):
    stage = 'disassembler'


class StageTimeout(PipelineError):
    def __init__(self, stage, seconds):
        self.stage = stage
        self.seconds = seconds
        super().__init__(f'{stage} did not finish within {seconds}s')


class UnmappedAddress(PipelineError):
    def __init__(self, address):
        self.address = address
        super().__init__(f'no symbol or relocation for address {address}')


class ThreadMismatch(PipelineError):
    def __init__(self, expected, found):
        self.expected = tuple(expected)
        self.found = tuple(found)
        super().__init__(f'disassembly has functions {", ".join(self.found) or "(none)"}, '
                         f'expected {", ".join(self.expected)}')
