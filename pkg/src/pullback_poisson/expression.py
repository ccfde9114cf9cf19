"""Pratt parser and canonical formatter for multivector expressions.

Grammar (loosest to tightest): ``+ -``, ``^`` (wedge), ``*``, unary ``-``,
``**`` (right-associative, integer exponent, grade-0 base).  Atoms are integer
or fraction literals (``3``, ``3/4``), the imaginary unit ``i``, variables and
basis vectors.  In ``affine`` mode the variables are ``x1..x9`` (alias
``y1..y9``) and ``e1..e9`` is d/dx_k; in ``homogeneous`` mode ``x0..x9``
(alias ``X0..X9``) and ``e0..e9``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import GaussianRational, Polynomial, real_imag, I_UNIT
from .errors import GradeMismatchError, ParseError
from .multivector import MultiVector, wedge

MODES = ("affine", "homogeneous")

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<pow>\*\*) | (?P<op>[-+*^()])
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
""", re.VERBOSE)

_IDENT_RE = re.compile(r"^(?P<kind>[xXye])(?P<idx>\d)$")


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, col0 = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1,
                             ("number", "identifier", "operator"))
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind != "ws":
            toks.append(Token("op" if kind == "pow" else kind, m.group(), line, pos - col0 + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - col0 + 1))
    return toks


def _resolve(tok: Token, mode: str):
    """Map an identifier token to ('var'|'dir', index) or ('i', None)."""
    if tok.text == "i":
        return "i", None
    m = _IDENT_RE.match(tok.text)
    if m:
        kind, idx = m.group("kind"), int(m.group("idx"))
        if mode == "affine":
            if kind == "X" or idx == 0:
                m = None
            else:
                return ("dir" if kind == "e" else "var"), idx - 1
        elif kind != "y":
            return ("dir" if kind == "e" else "var"), idx
    allowed = "x1..x9, y1..y9, e1..e9" if mode == "affine" else "x0..x9, e0..e9"
    raise ParseError(f"unknown identifier {tok.text!r}", tok.line, tok.col, (allowed, "i"))


def infer_nvars(text: str, mode: str = "affine") -> int:
    top = -1
    for tok in tokenize(text):
        if tok.kind == "ident":
            kind, idx = _resolve(tok, mode)
            if idx is not None:
                top = max(top, idx)
    return max(top + 1, 1)


_LBP = {"+": 10, "-": 10, "^": 20, "*": 30, "**": 40}
_UNARY_BP = 35


class _Parser:
    def __init__(self, text: str, mode: str, nvars: int):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.toks = tokenize(text)
        self.i = 0
        self.mode = mode
        self.nvars = nvars

    def peek(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.advance()
        if t.text != text:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col, (repr(text),))
        return t

    def parse(self) -> MultiVector:
        if self.peek().kind == "eof":
            t = self.peek()
            raise ParseError("empty expression", t.line, t.col, ("expression",))
        out = self.expr(0)
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col, ("operator", "end of input"))
        return out

    def lbp(self, t: Token):
        return _LBP.get(t.text, 0) if t.kind == "op" and t.text != "(" and t.text != ")" else 0

    def expr(self, rbp: int) -> MultiVector:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.peek()):
            left = self.led(self.advance(), left)
        return left

    # atoms and prefix operators
    def nud(self, t: Token) -> MultiVector:
        n = self.nvars
        if t.kind == "num":
            return MultiVector.scalar(Fraction(t.text), n)
        if t.kind == "ident":
            kind, idx = _resolve(t, self.mode)
            if kind == "i":
                return MultiVector.scalar(I_UNIT, n)
            if idx >= n:
                raise ParseError(f"identifier {t.text!r} exceeds the {n} ambient variables",
                                 t.line, t.col, (f"index < {n}",))
            if kind == "var":
                return MultiVector.function(Polynomial.variable(n, idx))
            return MultiVector.basis(idx, n)
        if t.text == "(":
            inner = self.expr(0)
            self.expect(")")
            return inner
        if t.text == "-":
            return -self.expr(_UNARY_BP)
        if t.text == "+":
            return self.expr(_UNARY_BP)
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col,
                         ("number", "identifier", "'('", "'-'"))

    # infix operators
    def led(self, t: Token, left: MultiVector) -> MultiVector:
        op = t.text
        if op in "+-":
            right = self.expr(_LBP[op])
            if op == "-":
                right = -right
            return self._add(left, right, t)
        if op == "^":
            return wedge(left, self.expr(_LBP["^"]))
        if op == "*":
            right = self.expr(_LBP["*"])
            if left.grade and right.grade:
                raise ParseError("'*' needs a grade-0 operand; use '^' for the wedge product",
                                 t.line, t.col, ("'^'",))
            return wedge(left, right)
        if op == "**":
            if left.grade != 0:
                raise ParseError("'**' applies only to scalars and variables", t.line, t.col)
            right = self.expr(_LBP["**"] - 1)
            k = _as_exponent(right)
            if k is None:
                raise ParseError("exponent must be a non-negative integer", t.line, t.col,
                                 ("integer literal",))
            return MultiVector.function(left.as_polynomial() ** k)
        raise ParseError(f"unexpected {op!r}", t.line, t.col)

    @staticmethod
    def _add(a: MultiVector, b: MultiVector, t: Token) -> MultiVector:
        if a.grade != b.grade:
            # a literal zero of grade 0 is absorbed by any grade
            if not (a.grade == 0 and not a) and not (b.grade == 0 and not b):
                raise GradeMismatchError(f"cannot add grade {a.grade} and grade {b.grade}",
                                         t.line, t.col, (f"grade-{a.grade} term",))
        return a + b


def _as_exponent(mv: MultiVector):
    if mv.grade != 0:
        return None
    if not mv.terms:
        return 0
    if len(mv.terms) != 1:
        return None
    ((_, e), c), = mv.terms.items()
    if any(e) or isinstance(c, GaussianRational) or c.denominator != 1 or c < 0:
        return None
    return int(c)


def parse_expression(text: str, mode: str = "affine", nvars: int | None = None) -> MultiVector:
    if nvars is None:
        nvars = infer_nvars(text, mode)
    return _Parser(text, mode, nvars).parse()


def _fmt_rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_coeff(c):
    """Returns (negative, text) where text is '' for a unit coefficient."""
    re_, im = real_imag(c)
    if im == 0:
        if abs(re_) == 1:
            return re_ < 0, ""
        return re_ < 0, _fmt_rat(abs(re_))
    parts = []
    if re_:
        parts.append(_fmt_rat(re_))
    if im == 1:
        imag = "i"
    elif im == -1:
        imag = "-i"
    else:
        imag = f"{_fmt_rat(im)}*i"
    if parts and not imag.startswith("-"):
        imag = "+" + imag
    parts.append(imag)
    return False, "(" + "".join(parts) + ")"


def format_expression(A: MultiVector, mode: str = "affine") -> str:
    """Canonical text form; ``parse_expression(format_expression(A), mode, A.nvars) == A``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    off = 1 if mode == "affine" else 0
    if not A.terms:
        return "0"
    pieces = []
    for (dirs, e), c in A.sorted_terms():
        neg, ctext = _fmt_coeff(c)
        factors = [ctext] if ctext else []
        for k, p in enumerate(e):
            if p == 1:
                factors.append(f"x{k + off}")
            elif p:
                factors.append(f"x{k + off}**{p}")
        wedge_part = "^".join(f"e{k + off}" for k in dirs)
        if wedge_part:
            if factors:
                body = "*".join(factors) + "*" + wedge_part
            else:
                body = wedge_part
        else:
            body = "*".join(factors) if factors else "1"
        pieces.append((neg, body))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out
