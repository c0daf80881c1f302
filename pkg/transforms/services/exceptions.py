"""
Errors raised by the test transformations.
"""


class TransformError(Exception):
    """Base class for transformation failures."""


class NameCollision(TransformError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'persisted global {name!r} collides with an existing location')


class GuardViolation(TransformError):
    """A rule matched an access to a location other threads can name."""

    def __init__(self, rule, location, thread=None):
        self.rule = rule
        self.location = location
        self.thread = thread
        super().__init__(f'{rule}: {location} is shared, rewrite skipped')


class UnsupportedShape(TransformError):
    def __init__(self, shape):
        self.shape = shape
        super().__init__(f'unsupported pattern shape {shape!r}')


class InvalidGrid(TransformError):
    """The generator grid document is malformed."""
