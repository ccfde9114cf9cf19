"""Polynomial multivector fields: wedge product, Schouten bracket, contraction, rank.

A p-vector in m variables is stored as a flat map ``(dirs, exps) -> coeff`` where
``dirs`` is a strictly increasing tuple of p direction indices (``dirs = (i, j)``
stands for d/dx_i ^ d/dx_j) and ``exps`` an exponent vector.

The bracket is computed by treating d/dx_k as an odd coordinate t_k:

    [P, Q] = sum_k (P <-d/dt_k)(d/dx_k Q) - (d/dx_k P)(d/dt_k-> Q)

with a right derivative on P and a left derivative on Q.  With this sign choice
[d/dx_k, f] = df/dx_k, the bracket of vector fields is the usual Lie bracket,
and both graded Leibniz rules hold in the form

    [a, b^c] = [a,b]^c + (-1)^((p-1)q) b^[a,c]
    [a^b, c] = a^[b,c] + (-1)^((r-1)q) [a,c]^b
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .algebra import Polynomial, as_scalar, grlex_key
from .errors import ContractError, StructuralError


@lru_cache(maxsize=None)
def wedge_dirs(a: tuple, b: tuple):
    """Merge two sorted direction tuples; returns ``(sign, merged)`` or None on overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return None
    # sign = parity of pairs (x in a, y in b) with x > y
    inv = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inv += j
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


def sort_dirs(dirs: Iterable[int]):
    """Sign-normalise an arbitrary direction sequence; None if an index repeats."""
    d = list(dirs)
    if len(set(d)) != len(d):
        return None
    sign = 1
    # bubble sort parity
    for i in range(len(d)):
        for j in range(len(d) - 1 - i):
            if d[j] > d[j + 1]:
                d[j], d[j + 1] = d[j + 1], d[j]
                sign = -sign
    return sign, tuple(d)


def _add_into(acc: dict, key, value):
    v = acc.get(key, 0) + value
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


class MultiVector:
    """Immutable grade-p polynomial multivector field in ``nvars`` variables."""

    __slots__ = ("grade", "nvars", "terms")

    def __init__(self, grade: int, nvars: int, terms: Mapping | None = None):
        self.grade = grade
        self.nvars = nvars
        self.terms = {k: c for k, c in terms.items() if c} if terms else {}

    # construction ---------------------------------------------------------

    @classmethod
    def from_terms(cls, grade: int, nvars: int, terms: Iterable):
        """Build from ``(dirs, exps, coeff)`` triples; dirs need not be sorted."""
        acc: dict = {}
        for dirs, exps, c in terms:
            exps = tuple(exps)
            if len(exps) != nvars:
                raise StructuralError(f"monomial {exps} does not have {nvars} variables")
            if len(dirs) != grade:
                raise StructuralError(f"direction set {dirs} does not have grade {grade}")
            if any(not 0 <= d < nvars for d in dirs):
                raise StructuralError(f"direction index out of range in {dirs}")
            s = sort_dirs(dirs)
            if s is None:
                continue
            sign, sd = s
            c = as_scalar(c)
            if c:
                _add_into(acc, (sd, exps), c if sign > 0 else -c)
        return cls(grade, nvars, acc)

    @classmethod
    def zero(cls, grade, nvars):
        return cls(grade, nvars)

    @classmethod
    def basis(cls, k, nvars):
        """The coordinate vector field d/dx_k."""
        if not 0 <= k < nvars:
            raise StructuralError(f"direction index {k} outside 0..{nvars - 1}")
        return cls(1, nvars, {((k,), (0,) * nvars): Fraction(1)})

    @classmethod
    def function(cls, p: Polynomial):
        return cls(0, p.nvars, {((), e): c for e, c in p.terms.items()})

    @classmethod
    def scalar(cls, c, nvars):
        return cls.function(Polynomial.constant(nvars, c))

    @classmethod
    def from_components(cls, grade, nvars, comps: Mapping[tuple, Polynomial]):
        """Build from ``dirs -> Polynomial``; dirs must already be sorted."""
        terms = {}
        for dirs, p in comps.items():
            for e, c in p.terms.items():
                terms[(tuple(dirs), e)] = c
        return cls(grade, nvars, terms)

    @classmethod
    def vector_field(cls, comps: Iterable[Polynomial]):
        comps = list(comps)
        nvars = comps[0].nvars
        return cls.from_components(1, nvars, {(k,): p for k, p in enumerate(comps) if p})

    # inspection -----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self):
        """Terms in canonical order: direction tuple, then graded-lex monomial."""
        return sorted(self.terms.items(), key=lambda t: (t[0][0], grlex_key(t[0][1])))

    def components(self) -> dict[tuple, Polynomial]:
        out: dict[tuple, dict] = {}
        for (dirs, e), c in self.terms.items():
            out.setdefault(dirs, {})[e] = c
        return {d: Polynomial(self.nvars, t) for d, t in sorted(out.items())}

    def component(self, dirs) -> Polynomial:
        dirs = tuple(dirs)
        return Polynomial(self.nvars, {e: c for (d, e), c in self.terms.items() if d == dirs})

    def as_polynomial(self) -> Polynomial:
        if self.grade != 0:
            raise ContractError("only grade-0 multivectors are functions")
        return Polynomial(self.nvars, {e: c for (_, e), c in self.terms.items()})

    def degree(self):
        return max((sum(e) for (_, e) in self.terms), default=-1)

    def homogeneous_part(self, d):
        return MultiVector(self.grade, self.nvars,
                           {k: c for k, c in self.terms.items() if sum(k[1]) == d})

    def truncate(self, d):
        return MultiVector(self.grade, self.nvars,
                           {k: c for k, c in self.terms.items() if sum(k[1]) <= d})

    def __eq__(self, other):
        if not isinstance(other, MultiVector):
            return NotImplemented
        if not self.terms and not other.terms:
            return self.nvars == other.nvars
        return (self.grade, self.nvars, self.terms) == (other.grade, other.nvars, other.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        from .expression import format_expression
        return f"MultiVector(grade={self.grade}, nvars={self.nvars}, {format_expression(self)!r})"

    # linear structure -----------------------------------------------------

    def _check(self, other: "MultiVector", same_grade=False):
        if self.nvars != other.nvars:
            raise StructuralError(f"ambient variable counts differ: {self.nvars} vs {other.nvars}")
        if same_grade and self.grade != other.grade and self.terms and other.terms:
            raise StructuralError(f"cannot add grade {self.grade} and grade {other.grade}")

    def __add__(self, other):
        if not isinstance(other, MultiVector):
            return NotImplemented
        self._check(other, same_grade=True)
        grade = self.grade if self.terms or not other.terms else other.grade
        out = dict(self.terms)
        for k, c in other.terms.items():
            _add_into(out, k, c)
        return MultiVector(grade, self.nvars, out)

    def __neg__(self):
        return MultiVector(self.grade, self.nvars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiVector):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = as_scalar(c)
        if not c:
            return MultiVector(self.grade, self.nvars)
        return MultiVector(self.grade, self.nvars, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        """Multiplication by a scalar, a polynomial or a grade-0 multivector."""
        if isinstance(other, MultiVector):
            if other.grade == 0 or self.grade == 0:
                return wedge(self, other)
            raise ContractError("use wedge() for two multivectors of positive grade")
        if isinstance(other, Polynomial):
            return wedge(self, MultiVector.function(other))
        return self.scale(other)

    __rmul__ = __mul__

    # calculus -------------------------------------------------------------

    def partial(self, k):
        return partial_multivector(self, k)

    def map_coefficients(self, fn):
        """Apply ``fn: Polynomial -> Polynomial`` to each component."""
        comps = {d: fn(p) for d, p in self.components().items()}
        nvars = next(iter(comps.values())).nvars if comps else self.nvars
        return MultiVector.from_components(self.grade, nvars, {d: p for d, p in comps.items() if p})


# ---------------------------------------------------------------------------
# operations


def wedge(A: MultiVector, B: MultiVector) -> MultiVector:
    if A.nvars != B.nvars:
        raise StructuralError(f"ambient variable counts differ: {A.nvars} vs {B.nvars}")
    grade = A.grade + B.grade
    out: dict = {}
    if grade > A.nvars:
        return MultiVector(grade, A.nvars)
    for (da, ea), ca in A.terms.items():
        for (db, eb), cb in B.terms.items():
            w = wedge_dirs(da, db)
            if w is None:
                continue
            sign, d = w
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            _add_into(out, (d, e), c if sign > 0 else -c)
    return MultiVector(grade, A.nvars, out)


def wedge_all(factors: Iterable[MultiVector]) -> MultiVector:
    it = iter(factors)
    acc = next(it)
    for f in it:
        acc = wedge(acc, f)
    return acc


@lru_cache(maxsize=None)
def _drop(dirs: tuple, pos: int):
    return dirs[:pos] + dirs[pos + 1:]


def schouten(A: MultiVector, B: MultiVector) -> MultiVector:
    """Schouten-Nijenhuis bracket of a p-vector and a q-vector, a (p+q-1)-vector."""
    if A.nvars != B.nvars:
        raise StructuralError(f"ambient variable counts differ: {A.nvars} vs {B.nvars}")
    p, q = A.grade, B.grade
    if p + q < 1:
        return MultiVector(0, A.nvars)
    grade = p + q - 1
    out: dict = {}
    for (da, ea), ca in A.terms.items():
        for (db, eb), cb in B.terms.items():
            c = ca * cb
            # (A <-d/dt_k) (d/dx_k B)
            for pos, k in enumerate(da):
                if not eb[k]:
                    continue
                w = wedge_dirs(_drop(da, pos), db)
                if w is None:
                    continue
                sign, d = w
                if (p - 1 - pos) & 1:
                    sign = -sign
                e = tuple(x + y - (1 if i == k else 0) for i, (x, y) in enumerate(zip(ea, eb)))
                v = c * eb[k]
                _add_into(out, (d, e), v if sign > 0 else -v)
            # - (d/dx_k A) (d/dt_k-> B)
            for pos, k in enumerate(db):
                if not ea[k]:
                    continue
                w = wedge_dirs(da, _drop(db, pos))
                if w is None:
                    continue
                sign, d = w
                if pos & 1:
                    sign = -sign
                e = tuple(x + y - (1 if i == k else 0) for i, (x, y) in enumerate(zip(ea, eb)))
                v = c * ea[k]
                _add_into(out, (d, e), -v if sign > 0 else v)
    return MultiVector(grade, A.nvars, out)


def partial_multivector(A: MultiVector, k: int) -> MultiVector:
    """Coefficient-wise d/dx_k; equals ``schouten(basis(k), A)``."""
    if not 0 <= k < A.nvars:
        raise StructuralError(f"variable index {k} outside 0..{A.nvars - 1}")
    out = {}
    for (d, e), c in A.terms.items():
        if e[k]:
            ne = e[:k] + (e[k] - 1,) + e[k + 1:]
            out[(d, ne)] = c * e[k]
    return MultiVector(A.grade, A.nvars, out)


def contract(Pi: MultiVector, f: Polynomial) -> MultiVector:
    """The vector field <df, Pi>: for Pi = sum a_ij d_i^d_j, sum a_ij (f_i d_j - f_j d_i)."""
    if Pi.grade != 2:
        raise ContractError(f"contraction needs a bivector, got grade {Pi.grade}")
    if f.nvars != Pi.nvars:
        raise StructuralError("function and bivector live in different variable counts")
    n = Pi.nvars
    grads = [f.partial(k) for k in range(n)]
    comps: dict[int, Polynomial] = {}
    for (i, j), a in Pi.components().items():
        comps[j] = comps.get(j, Polynomial(n)) + a * grads[i]
        comps[i] = comps.get(i, Polynomial(n)) - a * grads[j]
    return MultiVector.from_components(1, n, {(k,): p for k, p in comps.items() if p})


def wedge_power(Pi: MultiVector, s: int) -> MultiVector:
    if s == 0:
        return MultiVector.scalar(1, Pi.nvars)
    acc = Pi
    for _ in range(s - 1):
        if not acc:
            break
        acc = wedge(acc, Pi)
    return acc


def generic_rank(Pi: MultiVector) -> int:
    """2r for the largest r with Pi^r not identically zero."""
    if Pi.grade != 2:
        raise ContractError(f"rank is defined for bivectors, got grade {Pi.grade}")
    r = 0
    acc = Pi
    while acc:
        r += 1
        if 2 * (r + 1) > Pi.nvars:
            break
        acc = wedge(acc, Pi)
    return 2 * r


def integrability_residual(Pi: MultiVector) -> MultiVector:
    if Pi.grade != 2:
        raise ContractError(f"integrability is defined for bivectors, got grade {Pi.grade}")
    return schouten(Pi, Pi)


def is_poisson(Pi: MultiVector) -> bool:
    return integrability_residual(Pi).is_zero()


def linear_change(A: MultiVector, matrix, inverse) -> MultiVector:
    """Push A forward along the linear map y = matrix @ x.

    ``inverse`` must be the exact inverse of ``matrix``; coefficients are
    rewritten via x = inverse @ y and d/dx_i becomes sum_j matrix[j][i] d/dy_j.
    """
    n = A.nvars
    ys = [Polynomial.variable(n, k) for k in range(n)]
    xs = [sum((ys[j].scale(inverse[i][j]) for j in range(n)), Polynomial(n)) for i in range(n)]
    images = [MultiVector.from_components(1, n, {(j,): Polynomial.constant(n, matrix[j][i])
                                                 for j in range(n) if matrix[j][i]})
              for i in range(n)]
    out = MultiVector(A.grade, n)
    for dirs, p in A.components().items():
        coeff = MultiVector.function(p.compose(xs))
        frame = wedge_all([MultiVector.scalar(1, n)] + [images[i] for i in dirs])
        out = out + wedge(coeff, frame)
    return out

