"""
Tokenizer shared by the input and output language parsers.
"""

import re
from dataclasses import dataclass
from typing import List

from utils.errors import ParseError, ValidationError

KEYWORDS = {
    "qubit", "symbolic", "defgate", "for", "in", "to", "SQ", "CZ", "measure",
    "parallel", "guard", "otherwise", "product", "diagonal", "antidiagonal", "unknown",
}

_TOKEN_SPEC = [
    ("COMMENT", r"(//|\#)[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SPACE", r"[ \t\r]+"),
    ("FLOAT", r"\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?"),
    ("INT", r"\d+"),
    ("IDENT", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("OP", r"=>|==|!=|>=|<=|[\[\](){},;=+\-*/%<>]"),
    ("MISMATCH", r"."),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> List[Token]:
    """
    Split source text into tokens with 1-based line and column numbers.

    Raises:
        ParseError: On a character that starts no token
    """
    tokens = []
    line, line_start = 1, 0
    for match in _MASTER.finditer(source):
        kind, text = match.lastgroup, match.group()
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind in ("SPACE", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise ParseError(f"unexpected character {text!r}", line, column)
        if kind == "IDENT" and text in KEYWORDS:
            kind = "KEYWORD"
        tokens.append(Token(kind, text, line, column))
    tokens.append(Token("EOF", "", line, match.end() - line_start + 1 if source else 1))
    return tokens


class TokenStream:
    """Cursor over a token list with the expect/accept helpers both parsers use."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        tok = self.current
        return tok.text == text and tok.kind in ("OP", "KEYWORD")

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.describe(self.current)}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.current.kind != kind:
            self.error(f"expected {what}, found {self.describe(self.current)}")
        return self.advance()

    def error(self, message: str, token: Token = None):
        token = token or self.current
        raise ParseError(message, token.line, token.column)

    def invalid(self, message: str, token: Token = None):
        """Reject well-formed but meaningless input at ``token``."""
        token = token or self.current
        raise ValidationError(message, token.line, token.column)

    @staticmethod
    def describe(tok: Token) -> str:
        return "end of input" if tok.kind == "EOF" else repr(tok.text)
