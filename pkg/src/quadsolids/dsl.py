"""Text format for quadric-constraint solids.

One constraint per line (or `;`-separated), each `poly <= poly` or
`poly >= poly`, where poly is a sum of terms of total degree <= 2 in x, y, z:
`1.5`, `2x`, `2*x`, `x^2`, `x*y`, ... . `#` starts a comment.  Files using
this format carry the `.solid` suffix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .quadric import COEFF_ORDER, ImplicitSolid, QuadricForm

__all__ = ["ParseError", "parse_solid", "format_solid"]

_NUMBER_RE = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_LETTERS_RE = re.compile(r"[A-Za-z]+")

_VAR_INDEX = {"x": 0, "y": 1, "z": 2}
# monomial key (exponent triple) -> coefficient slot in COEFF_ORDER
_MONOMIAL_SLOT = {
    (2, 0, 0): 0,
    (0, 2, 0): 1,
    (0, 0, 2): 2,
    (1, 1, 0): 3,
    (1, 0, 1): 4,
    (0, 1, 1): 5,
    (1, 0, 0): 6,
    (0, 1, 0): 7,
    (0, 0, 1): 8,
    (0, 0, 0): 9,
}


class ParseError(ValueError):
    """Parse failure, carrying source position and 1-based constraint index."""

    def __init__(self, message: str, line: int, col: int, constraint: int | None = None):
        where = f"line {line}, col {col}"
        if constraint is not None:
            where += f" (constraint {constraint})"
        super().__init__(f"{message} at {where}")
        self.line = line
        self.col = col
        self.constraint = constraint


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM VAR OP CMP END
    text: str
    line: int
    col: int


def _tokenize(segment: str, line: int, col0: int, constraint: int) -> list[_Token]:
    tokens = []
    i = 0
    n = len(segment)
    while i < n:
        ch = segment[i]
        if ch in " \t\r":
            i += 1
            continue
        col = col0 + i + 1
        if ch.isdigit() or ch == ".":
            m = _NUMBER_RE.match(segment, i)
            if not m:
                raise ParseError(f"malformed number near {ch!r}", line, col, constraint)
            tokens.append(_Token("NUM", m.group(0), line, col))
            i = m.end()
            continue
        if ch.isalpha():
            m = _LETTERS_RE.match(segment, i)
            name = m.group(0)
            if name not in _VAR_INDEX:
                raise ParseError(f"unknown identifier {name!r}", line, col, constraint)
            tokens.append(_Token("VAR", name, line, col))
            i = m.end()
            continue
        if segment.startswith("<=", i) or segment.startswith(">=", i):
            tokens.append(_Token("CMP", segment[i : i + 2], line, col))
            i += 2
            continue
        if ch in "+-*^":
            tokens.append(_Token("OP", ch, line, col))
            i += 1
            continue
        raise ParseError(f"unknown character {ch!r}", line, col, constraint)
    tokens.append(_Token("END", "", line, col0 + n + 1))
    return tokens


class _ConstraintParser:
    def __init__(self, tokens: list[_Token], constraint: int):
        self.tokens = tokens
        self.pos = 0
        self.constraint = constraint

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.cur
        self.pos += 1
        return t

    def error(self, message: str) -> ParseError:
        t = self.cur
        return ParseError(message, t.line, t.col, self.constraint)

    def parse(self) -> np.ndarray:
        lhs = self.poly()
        if self.cur.kind != "CMP":
            raise self.error("expected '<=' or '>='")
        op = self.advance().text
        rhs = self.poly()
        if self.cur.kind != "END":
            raise self.error(f"unexpected {self.cur.text!r} after constraint")
        return lhs - rhs if op == "<=" else rhs - lhs

    def poly(self) -> np.ndarray:
        coeffs = np.zeros(10)
        sign = 1.0
        if self.cur.kind == "OP" and self.cur.text in "+-":
            sign = -1.0 if self.advance().text == "-" else 1.0
        coeffs += sign * self.term()
        while self.cur.kind == "OP" and self.cur.text in "+-":
            sign = -1.0 if self.advance().text == "-" else 1.0
            coeffs += sign * self.term()
        return coeffs

    def term(self) -> np.ndarray:
        coeff = 1.0
        exponents = [0, 0, 0]
        saw_factor = False
        if self.cur.kind == "NUM":
            coeff = float(self.advance().text)
            saw_factor = True
            # optional '*' or juxtaposed variable ("2*x" or "2x")
            if self.cur.kind == "OP" and self.cur.text == "*":
                self.advance()
                self.varpow(exponents)
                self.trailing_factors(exponents)
            elif self.cur.kind == "VAR":
                self.varpow(exponents)
                self.trailing_factors(exponents)
        elif self.cur.kind == "VAR":
            self.varpow(exponents)
            self.trailing_factors(exponents)
            saw_factor = True
        if not saw_factor:
            raise self.error("expected a term")
        degree = sum(exponents)
        if degree > 2:
            t = self.cur
            raise ParseError(
                f"term of degree {degree} exceeds the quadratic limit",
                t.line,
                t.col,
                self.constraint,
            )
        coeffs = np.zeros(10)
        coeffs[_MONOMIAL_SLOT[tuple(exponents)]] = coeff
        return coeffs

    def trailing_factors(self, exponents: list[int]) -> None:
        while self.cur.kind == "OP" and self.cur.text == "*":
            self.advance()
            self.varpow(exponents)

    def varpow(self, exponents: list[int]) -> None:
        if self.cur.kind != "VAR":
            raise self.error("expected a variable")
        var = self.advance().text
        power = 1
        if self.cur.kind == "OP" and self.cur.text == "^":
            self.advance()
            if self.cur.kind != "NUM":
                raise self.error("expected an exponent")
            t = self.advance()
            value = float(t.text)
            if value != int(value) or "." in t.text or "e" in t.text.lower():
                raise ParseError("exponent must be a nonnegative integer", t.line, t.col, self.constraint)
            power = int(value)
        exponents[_VAR_INDEX[var]] += power


def parse_solid(text: str) -> ImplicitSolid:
    """Parse constraint text into an ImplicitSolid."""
    forms = []
    index = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        col0 = 0
        for segment in line.split(";"):
            if segment.strip():
                index += 1
                tokens = _tokenize(segment, lineno, col0, index)
                coeffs = _ConstraintParser(tokens, index).parse()
                forms.append(QuadricForm.from_coeffs(coeffs))
            col0 += len(segment) + 1
    if not forms:
        raise ParseError("empty input: no constraints", 1, 1)
    return ImplicitSolid.from_forms(forms)


def _format_coefficient(c: float) -> str:
    # shortest round-trip text; integral values lose the trailing ".0"
    if c == int(c) and abs(c) < 1e16:
        return str(int(c))
    return repr(float(c))


def _format_form(q: QuadricForm) -> str:
    parts = []
    for name, c in zip(COEFF_ORDER, q.coeffs()):
        if c == 0.0:
            continue
        mag = _format_coefficient(abs(c))
        if name == "1":
            text = mag
        elif abs(c) == 1.0:
            text = name
        else:
            text = f"{mag}*{name}"
        if not parts:
            parts.append(text if c > 0 else f"-{text}")
        else:
            parts.append(f"+ {text}" if c > 0 else f"- {text}")
    body = " ".join(parts) if parts else "0"
    return f"{body} <= 0"


def format_solid(solid: ImplicitSolid) -> str:
    """Canonical text for a solid; parse_solid(format_solid(s)) reproduces s
    with entrywise-equal matrices."""
    return "\n".join(_format_form(q) for q in solid.forms) + "\n"
