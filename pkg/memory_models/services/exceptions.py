"""
Errors raised by the memory-model library.
"""


class ModelError(Exception):
    """Base class for memory-model failures."""


class UnknownModel(ModelError):
    def __init__(self, name, known=()):
        self.name = name
        self.known = tuple(known)
        hint = f' (known: {", ".join(self.known)})' if self.known else ''
        super().__init__(f'unknown memory model {name!r}{hint}')


class UnknownBaseRelation(ModelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'unknown base relation {name!r}')
