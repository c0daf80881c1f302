"""
Litmus-core services: data model, parsers, renderer and validator.
"""

import logging

from .asm_parser import parse_asm_litmus
from .c_parser import parse_source_litmus
from .exceptions import (
    LitmusError,
    LitmusSyntaxError,
    UndeclaredObservable,
    UnknownMnemonic,
    UnresolvedLabel,
)
from .parsing import split_header
from .render import render_litmus
from .types import Dialect, LitmusTest, Observable, Order
from .validate import Diagnostic, validate_test

logger = logging.getLogger(__name__)


def parse_litmus(text):
    """Parse either dialect, dispatching on the header keyword."""
    dialect = split_header(text)[0]
    if dialect is Dialect.SOURCE:
        return parse_source_litmus(text)
    return parse_asm_litmus(text, dialect)


def load_litmus_file(path):
    with open(path, encoding='utf-8') as handle:
        text = handle.read()
    try:
        return parse_litmus(text)
    except LitmusError:
        logger.warning('could not parse %s', path)
        raise


__all__ = [
    'Diagnostic',
    'Dialect',
    'LitmusError',
    'LitmusSyntaxError',
    'LitmusTest',
    'Observable',
    'Order',
    'UndeclaredObservable',
    'UnknownMnemonic',
    'UnresolvedLabel',
    'load_litmus_file',
    'parse_asm_litmus',
    'parse_litmus',
    'parse_source_litmus',
    'render_litmus',
    'validate_test',
]
