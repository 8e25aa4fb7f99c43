"""Tokenizer shared by the class-diagram and constraint parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import UseSyntaxError

KEYWORDS = frozenset({
    "model", "enum", "abstract", "class", "attributes", "end", "association",
    "between", "role", "constraints", "context", "inv",
    "self", "and", "or", "not", "implies", "true", "false", "Undefined",
})

SYMBOLS = ("->", "..", "::", "<>", "<=", ">=", ":=",
           "(", ")", "[", "]", "{", "}", ",", ":", ".", "|", "=", "<", ">",
           "+", "-", "*", "/", "@", "!")

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<comment>--[^\n]*)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>'(?:[^'\\\n]|\\.)*')
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<symbol>""" + "|".join(re.escape(s) for s in SYMBOLS) + r""")
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | symbol | integer | real | string | eof
    lexeme: str
    line: int
    column: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "identifier":
            return f"identifier '{self.lexeme}'"
        if self.kind in ("integer", "real"):
            return f"number {self.lexeme}"
        if self.kind == "string":
            return f"string {self.lexeme}"
        return f"'{self.lexeme}'"


def unquote(lexeme: str) -> str:
    body = lexeme[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


def tokenize(source: str, line: int = 1, column: int = 1) -> list[Token]:
    """Split ``source`` into tokens; comments and whitespace are dropped.

    ``line``/``column`` give the position of the first character, which lets
    embedded fragments report positions in their enclosing file.
    """
    tokens: list[Token] = []
    pos = 0
    line_start = pos - (column - 1)
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            col = pos - line_start + 1
            ch = source[pos]
            if ch == "'":
                raise UseSyntaxError("unterminated string literal", line, col)
            raise UseSyntaxError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "name":
            tokens.append(Token("keyword" if text in KEYWORDS else "identifier", text, line, col))
        elif kind == "int":
            tokens.append(Token("integer", text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with ``expect``-style helpers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.index += 1
        return tok

    def at(self, lexeme: str) -> bool:
        tok = self.current
        return tok.kind in ("keyword", "symbol") and tok.lexeme == lexeme

    def accept(self, lexeme: str) -> Token | None:
        if self.at(lexeme):
            return self.advance()
        return None

    def error(self, expected: str, tok: Token | None = None) -> UseSyntaxError:
        tok = tok or self.current
        return UseSyntaxError(f"expected {expected}, found {tok.describe()}.", tok.line, tok.column)

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise self.error(f"'{lexeme}'")
        return self.advance()

    def expect_identifier(self, what: str = "an identifier") -> Token:
        if self.current.kind != "identifier":
            raise self.error(what)
        return self.advance()

    def expect_integer(self, what: str = "an integer") -> int:
        if self.current.kind != "integer":
            raise self.error(what)
        return int(self.advance().lexeme)
