"""Exact scalars, sparse multivariate polynomials and fraction-free linear algebra.

Scalars are :class:`fractions.Fraction` or :class:`GaussianRational`; a Gaussian
rational with zero imaginary part is always collapsed to a ``Fraction`` so that
the rational case stays on the fast path.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import StructuralError

Monomial = tuple  # exponent vector, one non-negative int per ambient variable


# ---------------------------------------------------------------------------
# scalars


class GaussianRational:
    """``re + im*i`` with rational parts.  Use :func:`gaussian` to construct."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return gaussian(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return gaussian(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return gaussian(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)
        if isinstance(other, (int, Fraction)):
            return gaussian(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        if isinstance(other, GaussianRational):
            return self * other.conjugate() / other.norm()
        if isinstance(other, (int, Fraction)):
            return gaussian(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.conjugate() * Fraction(other) / self.norm()
        return NotImplemented


def gaussian(re, im=0):
    """Canonical scalar for ``re + im*i``: a Fraction when ``im == 0``."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return GaussianRational(re, im)


I_UNIT = GaussianRational(0, 1)


def as_scalar(x):
    if isinstance(x, GaussianRational):
        return gaussian(x.re, x.im)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, complex):
        raise TypeError("floating complex numbers are not exact scalars")
    raise TypeError(f"not an exact scalar: {x!r}")


def real_imag(x):
    if isinstance(x, GaussianRational):
        return x.re, x.im
    return Fraction(x), Fraction(0)


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x) -> str:
    """String form used in JSON: ``"3/4"``, ``"-2"``, ``"1/2+5/3i"``, ``"-i"``."""
    re_, im = real_imag(x)
    if im == 0:
        return _fmt_rational(re_)
    if im == 1:
        imag = "i"
    elif im == -1:
        imag = "-i"
    else:
        imag = _fmt_rational(im) + "i"
    if re_ == 0:
        return imag
    if not imag.startswith("-"):
        imag = "+" + imag
    return _fmt_rational(re_) + imag


_RAT = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^(?:(?P<re>{_RAT})(?P<im1>[+-](?:\d+(?:/\d+)?)?)i|(?P<im2>[+-]?(?:\d+(?:/\d+)?)?)i|(?P<only>{_RAT}))$")


def parse_scalar(text: str):
    s = text.replace(" ", "")
    m = _SCALAR_RE.match(s)
    if not m:
        raise ValueError(f"cannot parse scalar {text!r}")
    if m.group("only") is not None:
        return Fraction(m.group("only"))

    def imag_part(t):
        if t in ("", "+"):
            return Fraction(1)
        if t == "-":
            return Fraction(-1)
        return Fraction(t)

    if m.group("im2") is not None and m.group("re") is None:
        return gaussian(0, imag_part(m.group("im2")))
    return gaussian(Fraction(m.group("re")), imag_part(m.group("im1")))


# ---------------------------------------------------------------------------
# monomials and polynomials


def grlex_key(exps: Monomial):
    """Sort key putting higher total degree first, then larger leading exponents."""
    return (-sum(exps), tuple(-e for e in exps))


def monomials_of_degree(nvars: int, degree: int) -> list[Monomial]:
    """All exponent vectors of the given total degree, in graded-lex order."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec((), degree, nvars)
    return out


def monomials_up_to(nvars: int, degree: int) -> list[Monomial]:
    out = []
    for d in range(degree, -1, -1):
        out.extend(monomials_of_degree(nvars, d))
    return out


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Immutable sparse polynomial: ``terms`` maps exponent tuples to nonzero scalars."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, object] | None = None):
        self.nvars = nvars
        self.terms = {e: c for e, c in terms.items() if c} if terms else {}

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, nvars, c):
        c = as_scalar(c)
        return cls(nvars, {(0,) * nvars: c} if c else None)

    @classmethod
    def variable(cls, nvars, k):
        if not 0 <= k < nvars:
            raise StructuralError(f"variable index {k} outside 0..{nvars - 1}")
        e = [0] * nvars
        e[k] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps, c=1):
        c = as_scalar(c)
        return cls(len(exps), {tuple(exps): c} if c else None)

    # inspection -----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self):
        return len({sum(e) for e in self.terms}) <= 1

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    def coefficient(self, exps):
        return self.terms.get(tuple(exps), Fraction(0))

    def homogeneous_part(self, d):
        return Polynomial(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def truncate(self, d):
        return Polynomial(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= d})

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial({self.nvars}, {dict(self.sorted_terms())})"

    # arithmetic -----------------------------------------------------------

    def _check(self, other):
        if self.nvars != other.nvars:
            raise StructuralError(f"variable counts differ: {self.nvars} vs {other.nvars}")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = as_scalar(c)
        if not c:
            return Polynomial(self.nvars)
        return Polynomial(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return poly_multiply(self, other)
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def partial(self, k):
        return poly_partial(self, k)

    def evaluate(self, point: Sequence):
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, p in zip(point, e):
                if p:
                    v = v * x ** p
            total = total + v
        return total

    def compose(self, images: Sequence["Polynomial"], truncate: int | None = None):
        """Substitute ``x_k -> images[k]``; optionally drop terms above ``truncate``."""
        if len(images) != self.nvars:
            raise StructuralError("one image polynomial per variable is required")
        target = images[0].nvars if images else 0
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(k, p):
            key = (k, p)
            if key not in cache:
                if p == 0:
                    cache[key] = Polynomial.constant(target, 1)
                else:
                    prev = power(k, p - 1)
                    nxt = prev * images[k]
                    cache[key] = nxt.truncate(truncate) if truncate is not None else nxt
            return cache[key]

        out = Polynomial(target)
        for e, c in self.sorted_terms():
            term = Polynomial.constant(target, c)
            for k, p in enumerate(e):
                if p:
                    term = term * power(k, p)
                    if truncate is not None:
                        term = term.truncate(truncate)
            out = out + term
        return out

    def embed(self, nvars, positions):
        """Re-express in ``nvars`` variables, old variable k becoming ``positions[k]``."""
        out = {}
        for e, c in self.terms.items():
            new = [0] * nvars
            for k, p in enumerate(e):
                new[positions[k]] += p
            out[tuple(new)] = c
        return Polynomial(nvars, out)


def poly_normalize(terms: Iterable[tuple[Monomial, object]], nvars: int | None = None) -> Polynomial:
    """Merge equal monomials and drop zeros; all monomials must share one length."""
    acc: dict = {}
    for exps, c in terms:
        exps = tuple(exps)
        if nvars is None:
            nvars = len(exps)
        elif len(exps) != nvars:
            raise StructuralError(f"monomial {exps} does not have {nvars} variables")
        if any(e < 0 for e in exps):
            raise StructuralError(f"negative exponent in {exps}")
        acc[exps] = acc.get(exps, 0) + as_scalar(c)
    return Polynomial(nvars or 0, {e: c for e, c in acc.items() if c})


def poly_multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    p._check(q)
    out: dict = {}
    for e1, c1 in p.terms.items():
        for e2, c2 in q.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            v = out.get(e, 0) + c1 * c2
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return Polynomial(p.nvars, out)


def poly_partial(p: Polynomial, k: int) -> Polynomial:
    if not 0 <= k < p.nvars:
        raise StructuralError(f"variable index {k} outside 0..{p.nvars - 1}")
    out = {}
    for e, c in p.terms.items():
        if e[k]:
            ne = e[:k] + (e[k] - 1,) + e[k + 1:]
            out[ne] = c * e[k]
    return Polynomial(p.nvars, out)


# ---------------------------------------------------------------------------
# exact matrices


@dataclass(frozen=True)
class ExactMatrix:
    """Sparse exact matrix; ``entries`` maps ``(row, col)`` to a nonzero scalar."""

    nrows: int
    ncols: int
    entries: Mapping[tuple[int, int], object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in sorted(self.entries.items()):
            if not (0 <= r < self.nrows and 0 <= c < self.ncols):
                raise StructuralError(f"entry ({r}, {c}) outside {self.nrows}x{self.ncols}")
            v = as_scalar(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int | None = None):
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        ent = {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row) if v}
        return cls(len(rows), ncols, ent)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping[int, object]]):
        ent = {(r, c): v for c, col in enumerate(columns) for r, v in col.items()}
        return cls(nrows, len(columns), ent)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols, {})

    def sparse_rows(self) -> list[dict[int, object]]:
        rows: list[dict[int, object]] = [{} for _ in range(self.nrows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def to_dense(self):
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def is_zero(self):
        return not self.entries

    def matvec(self, v: Sequence):
        if len(v) != self.ncols:
            raise StructuralError("vector length does not match column count")
        out = [Fraction(0)] * self.nrows
        for (r, c), a in self.entries.items():
            if v[c]:
                out[r] = out[r] + a * v[c]
        return out

    def vstack(self, other: "ExactMatrix"):
        if other.ncols != self.ncols:
            raise StructuralError("column counts differ")
        ent = dict(self.entries)
        ent.update({(r + self.nrows, c): v for (r, c), v in other.entries.items()})
        return ExactMatrix(self.nrows + other.nrows, self.ncols, ent)

    def permute_columns(self, perm: Sequence[int]):
        """Column ``j`` of the result is column ``perm[j]`` of ``self``."""
        inv = {old: new for new, old in enumerate(perm)}
        return ExactMatrix(self.nrows, self.ncols, {(r, inv[c]): v for (r, c), v in self.entries.items()})


# ---------------------------------------------------------------------------
# fraction-free elimination


def _lcm(a, b):
    from math import gcd
    return a // gcd(a, b) * b


def _integral_rows(rows: list[dict[int, object]]):
    """Clear denominators row-wise.  Returns int rows, or None if any entry is Gaussian."""
    out = []
    for row in rows:
        den = 1
        for v in row.values():
            if isinstance(v, GaussianRational):
                return None
            den = _lcm(den, v.denominator)
        out.append({c: int(v * den) for c, v in row.items()})
    return out


def _exact_div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        assert r == 0, "Bareiss division must be exact"
        return q
    return a / b


def bareiss_echelon(rows: list[dict[int, object]], ncols: int):
    """Fraction-free row echelon form.

    Returns ``(echelon_rows, pivot_cols)`` where ``echelon_rows[k]`` has its
    leading entry in ``pivot_cols[k]``.  Among rows eligible as pivot the one
    with the fewest nonzeros is taken (ties: lowest original index), which keeps
    fill-in down without affecting the resulting pivot columns.
    """
    work = _integral_rows(rows)
    if work is None:
        work = [dict(r) for r in rows]
    else:
        work = [dict(r) for r in work]
    active = [i for i, r in enumerate(work) if r]
    prev = 1
    out_rows, pivots = [], []
    for col in range(ncols):
        cands = [i for i in active if col in work[i]]
        if not cands:
            continue
        pr = min(cands, key=lambda i: (len(work[i]), i))
        active.remove(pr)
        prow = work[pr]
        p = prow[col]
        nxt_active = []
        for i in active:
            row = work[i]
            a = row.get(col)
            if a is None:
                if p != prev:
                    row = {c: _exact_div(v * p, prev) for c, v in row.items()}
            else:
                new = {}
                for c in row.keys() | prow.keys():
                    v = p * row.get(c, 0) - a * prow.get(c, 0)
                    if v:
                        new[c] = _exact_div(v, prev)
                row = new
            work[i] = row
            if row:
                nxt_active.append(i)
        active = nxt_active
        prev = p
        out_rows.append(prow)
        pivots.append(col)
    return out_rows, pivots


def matrix_rank(M: ExactMatrix) -> int:
    return len(bareiss_echelon(M.sparse_rows(), M.ncols)[1])


def _div(a, b):
    return as_scalar(a / b if isinstance(a, GaussianRational) or isinstance(b, GaussianRational)
                     else Fraction(a) / b)


def _back_substitute(ech, pivots, ncols, rhs_col=None, free_values=None):
    """Solve the echelon system; free variables take ``free_values`` (default 0)."""
    v = [Fraction(0)] * ncols
    if free_values:
        for c, x in free_values.items():
            v[c] = x
    for row, pc in zip(reversed(ech), reversed(pivots)):
        s = row.get(rhs_col, 0) if rhs_col is not None else 0
        for c, a in row.items():
            if c != pc and c != rhs_col and v[c]:
                s = s - a * v[c]
        v[pc] = _div(s, row[pc])
    return v


def kernel_basis(M: ExactMatrix) -> list[list]:
    """Exact basis of the right null space.

    One vector per non-pivot column ``f``, normalised so that its entry at ``f``
    is 1 and its entries at the other non-pivot columns are 0 (the reduced
    row-echelon basis, hence independent of the pivot-row choice).
    """
    ech, pivots = bareiss_echelon(M.sparse_rows(), M.ncols)
    pset = set(pivots)
    basis = []
    for f in range(M.ncols):
        if f in pset:
            continue
        basis.append(_back_substitute(ech, pivots, M.ncols, free_values={f: Fraction(1)}))
    return basis


def solve(M: ExactMatrix, b: Sequence):
    """A particular solution of ``M x = b`` with free variables zero, or None."""
    if len(b) != M.nrows:
        raise StructuralError("right-hand side length does not match row count")
    rows = M.sparse_rows()
    rhs = M.ncols
    for r, val in enumerate(b):
        val = as_scalar(val)
        if val:
            rows[r][rhs] = val
    ech, pivots = bareiss_echelon(rows, M.ncols + 1)
    if pivots and pivots[-1] == rhs:
        return None
    return _back_substitute(ech, pivots, M.ncols, rhs_col=rhs)[: M.ncols]


def span_contains(basis: Sequence[Sequence], vectors: Sequence[Sequence]) -> bool:
    """Whether every vector lies in the span of ``basis`` (exact rank test)."""
    if not vectors:
        return True
    ncols = len(vectors[0])
    base_rows = [{c: v for c, v in enumerate(vec) if v} for vec in basis]
    r0 = len(bareiss_echelon(base_rows, ncols)[1])
    extra = [{c: v for c, v in enumerate(vec) if v} for vec in vectors]
    return len(bareiss_echelon(base_rows + extra, ncols)[1]) == r0


class ReducedEchelon:
    """Reduced row-echelon basis of a subspace of ``K^ncols`` (sparse, exact).

    The RREF of a subspace is unique, so reductions modulo it are canonical no
    matter in which order spanning vectors were inserted.
    """

    def __init__(self, ncols: int, vectors: Iterable[Mapping[int, object]] = ()):
        self.ncols = ncols
        self.rows: dict[int, dict[int, object]] = {}  # pivot col -> row with row[pivot] == 1
        for v in vectors:
            self.insert(v)

    @property
    def rank(self):
        return len(self.rows)

    @property
    def pivots(self):
        return sorted(self.rows)

    def reduce(self, vec: Mapping[int, object] | Sequence) -> dict[int, object]:
        items = vec.items() if isinstance(vec, Mapping) else enumerate(vec)
        v = {c: as_scalar(x) for c, x in items if x}
        # rows are fully reduced, so clearing one pivot never reintroduces another
        for pc in [c for c in v if c in self.rows]:
            a = v[pc]
            for c, x in self.rows[pc].items():
                y = v.get(c, 0) - a * x
                if y:
                    v[c] = y
                else:
                    v.pop(c, None)
        return v

    def insert(self, vec: Mapping[int, object] | Sequence) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        pc = min(v)
        lead = v[pc]
        v = {c: _div(x, lead) for c, x in v.items()}
        for other in self.rows.values():
            a = other.get(pc)
            if a:
                for c, x in v.items():
                    y = other.get(c, 0) - a * x
                    if y:
                        other[c] = y
                    else:
                        other.pop(c, None)
        self.rows[pc] = v
        return True

    def contains(self, vec) -> bool:
        return not self.reduce(vec)
