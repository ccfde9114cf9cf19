"""Global multivector fields on P^n as homogeneous representatives modulo R ^ (.).

H^0(P^n, Lambda^p T(k)) is modelled by p-vectors in the n+1 homogeneous
variables X_0..X_n with coefficients of degree p+k, modulo the subspace
R ^ {(p-1)-vectors of coefficient degree p+k-1}, R = sum X_i d/dX_i.
The ideal is kept in reduced row-echelon form over the graded-lex ordered
monomial basis, so every coset has one canonical representative: the one
supported on non-pivot basis elements.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Sequence

from .algebra import Polynomial, ReducedEchelon, as_scalar, grlex_key, monomials_of_degree
from .errors import CapabilityError, DegenerateInputError, StructuralError
from .multivector import MultiVector, wedge, wedge_all

SUPPORTED_TWISTS = (0, 1)


def radial_field(nvars: int) -> MultiVector:
    return MultiVector(1, nvars, {((i,), tuple(int(k == i) for k in range(nvars))): Fraction(1)
                                  for i in range(nvars)})


def _basis_keys(nvars: int, grade: int, degree: int) -> list[tuple]:
    mons = monomials_of_degree(nvars, degree) if degree >= 0 else []
    keys = [(dirs, e) for dirs in combinations(range(nvars), grade) for e in mons]
    return sorted(keys, key=lambda k: (grlex_key(k[1]), k[0]))


@dataclass(frozen=True, eq=False)
class SectionSpace:
    """Finite model of H^0(P^n, Lambda^grade T P^n (twist))."""

    n: int
    grade: int
    twist: int

    @property
    def nvars(self):
        return self.n + 1

    @property
    def degree(self):
        """Coefficient degree of the homogeneous representatives."""
        return self.grade + self.twist

    @cached_property
    def ambient_keys(self) -> list[tuple]:
        return _basis_keys(self.nvars, self.grade, self.degree)

    @cached_property
    def ambient_index(self) -> dict:
        return {k: i for i, k in enumerate(self.ambient_keys)}

    @cached_property
    def ideal(self) -> ReducedEchelon:
        R = radial_field(self.nvars)
        ech = ReducedEchelon(len(self.ambient_keys))
        for dirs, e in _basis_keys(self.nvars, self.grade - 1, self.degree - 1):
            tau = MultiVector(self.grade - 1, self.nvars, {(dirs, e): Fraction(1)})
            ech.insert(self._coords(wedge(R, tau)))
        return ech

    @cached_property
    def standard_keys(self) -> list[tuple]:
        """Basis of the quotient: ambient basis elements that are not ideal pivots."""
        piv = set(self.ideal.pivots)
        return [k for i, k in enumerate(self.ambient_keys) if i not in piv]

    @cached_property
    def standard_index(self) -> dict:
        return {k: i for i, k in enumerate(self.standard_keys)}

    @property
    def dimension(self) -> int:
        return len(self.standard_keys)

    def basis_element(self, i: int) -> MultiVector:
        return MultiVector(self.grade, self.nvars, {self.standard_keys[i]: Fraction(1)})

    def basis(self) -> list["GlobalSection"]:
        return [GlobalSection(self, self.basis_element(i)) for i in range(self.dimension)]

    def _coords(self, A: MultiVector) -> dict[int, object]:
        idx = self.ambient_index
        try:
            return {idx[k]: c for k, c in A.terms.items()}
        except KeyError as exc:
            raise StructuralError(f"term {exc.args[0]} is not in {self}") from None

    def check(self, A: MultiVector):
        if A.nvars != self.nvars:
            raise StructuralError(f"{self} needs {self.nvars} homogeneous variables, got {A.nvars}")
        if A.terms and A.grade != self.grade:
            raise StructuralError(f"{self} needs grade {self.grade}, got {A.grade}")
        for (_, e) in A.terms:
            if sum(e) != self.degree:
                raise StructuralError(f"{self} needs coefficient degree {self.degree}, got {sum(e)}")

    def coordinates(self, A: MultiVector) -> list:
        """Coordinates of the coset of A in the standard basis."""
        self.check(A)
        red = self.ideal.reduce(self._coords(A))
        out = [Fraction(0)] * self.dimension
        keys = self.ambient_keys
        sidx = self.standard_index
        for i, c in red.items():
            out[sidx[keys[i]]] = c
        return out

    def from_coordinates(self, v: Sequence) -> "GlobalSection":
        if len(v) != self.dimension:
            raise StructuralError("coordinate vector has the wrong length")
        terms = {k: as_scalar(c) for k, c in zip(self.standard_keys, v) if c}
        return GlobalSection(self, MultiVector(self.grade, self.nvars, terms))

    def reduce(self, A: MultiVector) -> "GlobalSection":
        return self.from_coordinates(self.coordinates(A))

    def __repr__(self):
        tw = f"({self.twist})" if self.twist else ""
        return f"H0(P^{self.n}, L^{self.grade} T{tw})"


@dataclass(frozen=True, eq=False)
class GlobalSection:
    space: SectionSpace
    rep: MultiVector

    def coordinates(self):
        return self.space.coordinates(self.rep)

    def is_zero(self):
        return self.rep.is_zero()

    def __eq__(self, other):
        if not isinstance(other, GlobalSection):
            return NotImplemented
        return self.space == other.space and self.rep == other.rep

    def __hash__(self):
        return hash((self.space.n, self.space.grade, self.space.twist, self.rep))

    def __add__(self, other):
        return reduce_to_canonical(self.space, self.rep + other.rep)

    def scale(self, c):
        return GlobalSection(self.space, self.rep.scale(c))


def section_space(n: int, p: int, twist: int = 0) -> SectionSpace:
    """The (cached) space H^0(P^n, L^p T(twist))."""
    return _section_space(n, p, twist)


@lru_cache(maxsize=None)
def _section_space(n: int, p: int, twist: int) -> SectionSpace:
    if n < 2:
        raise CapabilityError(f"projective dimension must be at least 2, got {n}")
    if twist not in SUPPORTED_TWISTS:
        raise CapabilityError(f"twist {twist} is not supported")
    if not 1 <= p <= n:
        raise CapabilityError(f"grade {p} is not supported on P^{n}")
    if twist == 1 and p != 1:
        raise CapabilityError("twist 1 is supported only for vector fields")
    return SectionSpace(n, p, twist)


def reduce_to_canonical(space: SectionSpace, A: MultiVector) -> GlobalSection:
    return space.reduce(A)


# ---------------------------------------------------------------------------
# affine charts


def _chart_positions(nvars: int, chart: int) -> list[int]:
    return [i for i in range(nvars) if i != chart]


@lru_cache(maxsize=None)
def _chart_frame(nvars: int, chart: int, dirs: tuple) -> MultiVector:
    m = nvars - 1
    pos = {h: a for a, h in enumerate(_chart_positions(nvars, chart))}
    factors = [MultiVector.scalar(1, m)]
    for h in dirs:
        if h == chart:
            # d/dX_chart -> -sum x_j d/dx_j
            factors.append(MultiVector(1, m, {((j,), tuple(int(k == j) for k in range(m))): Fraction(-1)
                                              for j in range(m)}))
        else:
            factors.append(MultiVector.basis(pos[h], m))
    return wedge_all(factors)


def dehomogenize(A: MultiVector, chart: int = 0) -> MultiVector:
    """Affine view of a homogeneous multivector on the chart X_chart = 1."""
    nvars = A.nvars
    if not 0 <= chart < nvars:
        raise StructuralError(f"chart index {chart} outside 0..{nvars - 1}")
    m = nvars - 1
    keep = _chart_positions(nvars, chart)
    out = MultiVector(A.grade, m)
    for dirs, p in A.components().items():
        acc: dict = {}
        for e, c in p.terms.items():
            ne = tuple(e[h] for h in keep)
            acc[ne] = acc.get(ne, 0) + c
        coeff = Polynomial(m, acc)
        out = out + wedge(MultiVector.function(coeff), _chart_frame(nvars, chart, dirs))
    return MultiVector(A.grade, m, out.terms)


def chart_restrict(s: GlobalSection | MultiVector, chart: int = 0) -> MultiVector:
    rep = s.rep if isinstance(s, GlobalSection) else s
    return dehomogenize(rep, chart)


# ---------------------------------------------------------------------------
# pull-back construction


def embed_vector_field(Y: MultiVector, nvars: int) -> MultiVector:
    """Regard a field in X_0..X_{m-1} as one in X_0..X_{nvars-1} (free of the new variables)."""
    pad = nvars - Y.nvars
    return MultiVector(Y.grade, nvars, {(d, e + (0,) * pad): c for (d, e), c in Y.terms.items()})


def pullback_bivector(Y: GlobalSection) -> GlobalSection:
    """Pi = d/dX_n ^ Y on P^n for Y a quadratic field on P^{n-1}."""
    sp = Y.space
    if sp.grade != 1 or sp.twist != 1:
        raise StructuralError(f"pull-back needs a section of T P^(n-1)(1), got {sp}")
    if Y.is_zero():
        raise DegenerateInputError("the zero vector field does not define a pull-back structure")
    n = sp.n + 1
    Yt = embed_vector_field(Y.rep, n + 1)
    Pi = wedge(MultiVector.basis(n, n + 1), Yt)
    return reduce_to_canonical(section_space(n, 2, 0), Pi)


def random_quadratic_field(n_minus_1: int, seed: int, linear_part=None, bound: int = 9) -> GlobalSection:
    """Seeded quadratic field on P^{n_minus_1}.

    Coefficients are drawn from ``random.Random(seed).randint(-bound, bound)``
    (Mersenne Twister) in a fixed order: component i = 0..m, then monomials in
    graded-lex order.  With ``linear_part`` = (l_1..l_m) the chart X_0 = 1 sees a
    singular point at the origin with linear part diag(l): the X_0^2 terms of
    F_1..F_m are zeroed and the X_0 X_j terms set to delta_ij (l_i + c), where c is
    the X_0^2 coefficient of F_0.
    """
    m = n_minus_1
    nv = m + 1
    rng = random.Random(seed)
    mons = monomials_of_degree(nv, 2)
    comps = [{e: Fraction(rng.randint(-bound, bound)) for e in mons} for _ in range(nv)]
    if linear_part is not None:
        lam = list(getattr(linear_part, "values", linear_part))
        if len(lam) != m:
            raise StructuralError(f"linear part needs {m} eigenvalues, got {len(lam)}")
        x0sq = tuple(2 if k == 0 else 0 for k in range(nv))
        c00 = comps[0][x0sq]
        for i in range(1, nv):
            comps[i][x0sq] = Fraction(0)
            for j in range(1, nv):
                e = tuple(int(k == 0) + int(k == j) for k in range(nv))
                comps[i][e] = as_scalar(lam[i - 1]) + c00 if i == j else Fraction(0)
    rep = MultiVector.from_components(
        1, nv, {(i,): Polynomial(nv, comps[i]) for i in range(nv)})
    return reduce_to_canonical(section_space(m, 1, 1), rep)


def affine_linear_part(Y: MultiVector) -> list[list]:
    """Jacobian at the origin of an affine vector field, as a dense matrix."""
    m = Y.nvars
    out = [[Fraction(0)] * m for _ in range(m)]
    for ((i,), e), c in Y.terms.items():
        if sum(e) == 1:
            out[i][e.index(1)] = c
    return out
