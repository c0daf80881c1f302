"""
Errors raised while reading, building or checking litmus tests.
"""


class LitmusError(Exception):
    """Base class for every litmus-core failure."""


class LitmusSyntaxError(LitmusError):
    """The text does not follow the litmus grammar."""

    def __init__(self, line, col, expected, found=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f', found {found!r}' if found is not None else ''
        super().__init__(f'line {line}, col {col}: expected {expected}{detail}')


class UndeclaredObservable(LitmusError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'final state references undeclared observable {name!r}')


class UnknownMnemonic(LitmusError):
    def __init__(self, op, line=None):
        self.op = op
        self.line = line
        where = f' (line {line})' if line is not None else ''
        super().__init__(f'unknown mnemonic {op!r}{where}')


class UnresolvedLabel(LitmusError):
    def __init__(self, name, thread=None):
        self.name = name
        self.thread = thread
        super().__init__(f'branch target {name!r} is not a label of P{thread}')
