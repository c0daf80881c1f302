"""
Tokenizer shared by the source and asm litmus parsers.
"""

import re
from dataclasses import dataclass

from .exceptions import LitmusSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


_TOKEN_SPEC = [
    ('COMMENT', r'//[^\n]*|\(\*.*?\*\)'),
    ('NEWLINE', r'\n'),
    ('SKIP', r'[ \t\r]+'),
    ('AND', r'/\\'),
    ('OR', r'\\/'),
    ('EQEQ', r'=='),
    ('NUMBER', r'-?(?:0[xX][0-9a-fA-F]+|\d+)'),
    ('IDENT', r'[A-Za-z_][A-Za-z0-9_.]*'),
    ('PUNCT', r'[{}()\[\];,:=+*&~!?#<>|@"]'),
    ('MISMATCH', r'.'),
]
_TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in _TOKEN_SPEC),
                       re.DOTALL)


def tokenize(text, keep_newlines=False, line_offset=0):
    tokens = []
    line = 1 + line_offset
    line_start = 0
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        value = match.group()
        col = match.start() - line_start + 1
        if kind == 'NEWLINE':
            if keep_newlines:
                tokens.append(Token('NEWLINE', '\n', line, col))
            line += 1
            line_start = match.end()
            continue
        if kind == 'COMMENT':
            newlines = value.count('\n')
            if newlines:
                line += newlines
                line_start = match.start() + value.rindex('\n') + 1
            continue
        if kind == 'SKIP':
            continue
        if kind == 'MISMATCH':
            raise LitmusSyntaxError(line, col, 'a token', value)
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token('EOF', '', line, 1))
    return tokens


class TokenStream:
    """
    Cursor over a token list with the usual peek/expect helpers.

    NEWLINE tokens are invisible unless ``lines`` is switched on.
    """

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.lines = False

    def _index(self, ahead):
        index = self.pos
        last = len(self.tokens) - 1
        while True:
            while not self.lines and index < last and self.tokens[index].kind == 'NEWLINE':
                index += 1
            if ahead == 0 or index >= last:
                return min(index, last)
            ahead -= 1
            index += 1

    def peek(self, ahead=0):
        return self.tokens[self._index(ahead)]

    def next(self):
        index = self._index(0)
        token = self.tokens[index]
        self.pos = index + 1 if token.kind != 'EOF' else index
        return token

    def at(self, value, ahead=0):
        token = self.peek(ahead)
        return token.kind != 'EOF' and token.value == value

    def at_kind(self, kind, ahead=0):
        return self.peek(ahead).kind == kind

    def accept(self, value):
        if self.at(value):
            return self.next()
        return None

    def expect(self, value, what=None):
        token = self.peek()
        if token.kind == 'EOF' or token.value != value:
            self.fail(what or repr(value))
        return self.next()

    def expect_kind(self, kind, what=None):
        token = self.peek()
        if token.kind != kind:
            self.fail(what or kind.lower())
        return self.next()

    def skip_newlines(self):
        while self.at_kind('NEWLINE'):
            self.next()

    def fail(self, expected):
        token = self.peek()
        found = token.value if token.kind != 'EOF' else 'end of input'
        raise LitmusSyntaxError(token.line, token.col, expected, found)
