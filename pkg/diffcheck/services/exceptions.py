"""
Errors raised while mapping or comparing outcome sets.
"""


class DiffError(Exception):
    """Base class for comparison failures."""


class AmbiguousMapping(DiffError):
    def __init__(self, observable, targets=()):
        self.observable = observable
        self.targets = tuple(targets)
        super().__init__(f'{observable} maps to more than one target: {", ".join(self.targets)}')


class MissingBinding(DiffError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'outcome has no binding for mapped observable {name}')


class IncompatibleWidths(DiffError):
    def __init__(self, source, target, source_bits, target_bits):
        self.source = source
        self.target = target
        super().__init__(f'{source} ({source_bits} bits) cannot map to {target} ({target_bits} bits)')
