"""Line-aware tokenizer shared by the pack and scenario languages."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

from .errors import ParseError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<arrow>->)
  | (?P<range>\.\.)
  | (?P<number>-?\d+(?:\.\d+)?(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\]{}(),=.])
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


@dataclass(frozen=True)
class Token:
    kind: str  # string | arrow | range | number | ident | punct | newline | eof
    text: str
    line: int
    column: int

    @property
    def value(self) -> str:
        if self.kind == "string":
            return unescape(self.text[1:-1], self.line, self.column)
        return self.text


def unescape(body: str, line: int = 0, column: int = 0) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1] if i + 1 < len(body) else ""
            if nxt not in _ESCAPES:
                raise ParseError(f"bad escape \\{nxt}", line, column + i + 1)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text[pos] == '"':
                raise ParseError("unterminated string", line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            tokens.append(Token("newline", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = Token(kind, m.group(), line, col)
            if kind == "string":
                tok.value  # validate escapes eagerly
            tokens.append(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Cursor:
    """Recursive-descent helper over a token list."""

    def __init__(self, tokens: Sequence[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek
        return tok.kind == kind and (text is None or tok.text == text)

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, expected: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek
        found = "end of input" if tok.kind == "eof" else ("end of line" if tok.kind == "newline" else repr(tok.text))
        return ParseError(f"unexpected {found}", tok.line, tok.column, expected)

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            raise self.error(what or (repr(text) if text else kind))
        return self.next()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        return self.next() if self.at(kind, text) else None

    def skip_newlines(self) -> None:
        while self.at("newline"):
            self.next()

    def end_of_line(self) -> None:
        if self.at("eof"):
            return
        self.expect("newline", what="end of line")

    def ident_list(self) -> List[str]:
        self.expect("punct", "[")
        items: List[str] = []
        if not self.at("punct", "]"):
            items.append(self.expect("ident", what="identifier").text)
            while self.accept("punct", ","):
                items.append(self.expect("ident", what="identifier").text)
        self.expect("punct", "]")
        return items

    def lines(self) -> Iterator[Token]:
        """Yield the first token of each non-blank line."""
        while True:
            self.skip_newlines()
            if self.at("eof"):
                return
            yield self.peek
