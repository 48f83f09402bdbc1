"""Tokenizer for the node language."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DslSyntaxError

KEYWORDS = {
    "node", "returns", "let", "tel", "var", "contract", "enforce", "with", "assume",
    "automaton", "state", "until", "then", "emit", "end", "type", "and", "or", "not",
    "if", "else", "true", "false", "fby", "bool", "int",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>=>|<=|[()\[\],;:=+*|\-])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # id, kw, int, op, eof
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


def tokenize(text):
    out = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(s)
        else:
            if kind == "id" and s in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out
