"""The text target: ``TRAJECTORY: [(x, y), ...] MASK: [(x, y), ...]``.

Coordinates are printed with two decimals. The parser also accepts the looser
forms models tend to emit (missing spaces, fewer decimals, a trailing
``...`` elision).
"""

from __future__ import annotations

from typing import Sequence

from .errors import ParseError
from .types import NormPoint


def _fmt(points: Sequence[Sequence[float]]) -> str:
    return "[" + ", ".join(f"({x:.2f}, {y:.2f})" for x, y in points) + "]"


def serialize(path: Sequence[Sequence[float]], mask: Sequence[Sequence[float]]) -> str:
    return f"TRAJECTORY: {_fmt(path)} MASK: {_fmt(mask)}"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str):
        raise ParseError(message, len(self.text[:self.pos].encode("utf-8")))

    def ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.ws()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str) -> None:
        if not self.peek(s):
            found = self.text[self.pos:self.pos + 10] or "end of input"
            self.fail(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def number(self) -> float:
        self.ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = 0
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            digits += self.text[self.pos].isdigit()
            self.pos += 1
        if not digits:
            self.pos = start
            self.fail("expected a number")
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            self.pos = start
            self.fail(f"malformed number {self.text[start:self.pos]!r}")

    def point_list(self) -> list[NormPoint]:
        self.expect("[")
        out: list[NormPoint] = []
        if self.peek("]"):
            self.pos += 1
            return out
        while True:
            if self.peek("..."):
                self.pos += 3
            else:
                self.expect("(")
                x = self.number()
                self.expect(",")
                y = self.number()
                self.expect(")")
                out.append(NormPoint(x, y))
            if self.peek(","):
                self.pos += 1
                continue
            self.expect("]")
            return out


def parse(text: str) -> tuple[list[NormPoint], list[NormPoint]]:
    """Parse an answer string into (path, mask). Raises ParseError with a byte offset."""
    sc = _Scanner(text)
    sc.expect("TRAJECTORY")
    sc.expect(":")
    path = sc.point_list()
    sc.expect("MASK")
    sc.expect(":")
    mask = sc.point_list()
    sc.ws()
    if sc.pos != len(text):
        sc.fail("trailing characters")
    return path, mask
