"""Local analysis at a singular point with linear part Y = sum l_i y_i d/dy_i.

Bracketing with Y acts diagonally on monomial multivectors:

    [Y, y^I d_i]       = (<l, I> - l_i) y^I d_i
    [Y, y^I d_i ^ d_j] = (<l, I> - l_i - l_j) y^I d_i ^ d_j

so kernels, images and homological solves reduce to eigenvalue bookkeeping.
Non-resonance is certified only up to a bound: over exact scalars an integer
relation always exists, but every truncated computation here only consults
combinations of bounded order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from .algebra import (
    ExactMatrix,
    GaussianRational,
    Polynomial,
    as_scalar,
    format_scalar,
    grlex_key,
    matrix_rank,
    monomials_of_degree,
    real_imag,
    solve,
)
from .errors import CapabilityError, DivisionError, HypothesisError, NotInImageError, ResonanceError
from .multivector import MultiVector, linear_change, schouten, wedge


@dataclass(frozen=True)
class EigenData:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(as_scalar(v) for v in self.values))
        if len(self.values) < 2:
            raise ValueError("an eigenvalue tuple needs at least two entries")

    @classmethod
    def of(cls, values: Iterable | str):
        if isinstance(values, str):
            values = [v for v in values.split(",") if v.strip()]
        return cls(tuple(values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __str__(self):
        return "(" + ", ".join(format_scalar(v) for v in self.values) + ")"

    def inner(self, exps: Sequence[int]):
        """<l, I> for an integer vector I."""
        total = Fraction(0)
        for l, a in zip(self.values, exps):
            if a:
                total = total + l * a
        return total


@dataclass
class ResonanceCertificate:
    order: int
    resonant: bool
    witness: tuple | None = None  # integer vector a with <a, l> = 0
    monomial: tuple | None = None  # exponent vector I of a resonant monomial
    directions: tuple | None = None  # its direction set (0-based)
    eigenvalues: tuple = ()

    @property
    def verdict(self):
        return "resonant" if self.resonant else f"non-resonant-to-order-{self.order}"

    def check(self) -> bool:
        """Re-evaluate the witness; True when it satisfies its defining relation."""
        if not self.resonant:
            return self.witness is None
        lam = EigenData(self.eigenvalues)
        ok = self.witness is not None and any(self.witness) and lam.inner(self.witness) == 0
        if self.monomial is not None:
            shift = sum((lam.values[i] for i in self.directions), Fraction(0))
            ok = ok and lam.inner(self.monomial) - shift == 0
        return ok

    def as_dict(self):
        d = {"order": self.order, "verdict": self.verdict,
             "eigenvalues": [format_scalar(v) for v in self.eigenvalues],
             "witness": list(self.witness) if self.witness is not None else None}
        if self.monomial is not None:
            d["monomial"] = list(self.monomial)
            d["directions"] = [i + 1 for i in self.directions]
        return d


def _vectors_of_norm(m: int, norm: int):
    """Integer vectors with L1 norm ``norm`` whose first nonzero entry is positive, sorted."""
    out = []
    for parts in product(range(norm + 1), repeat=m):
        if sum(parts) != norm:
            continue
        nz = [i for i, p in enumerate(parts) if p]
        for signs in product((1, -1), repeat=len(nz) - 1):
            v = list(parts)
            for i, s in zip(nz[1:], signs):
                v[i] *= s
            out.append(tuple(v))
    return sorted(out)


def nonresonant_up_to_order(lam: EigenData, B: int) -> ResonanceCertificate:
    """Exhaustive search for a nonzero integer relation with sum |a_i| <= B."""
    if B < 1:
        raise ValueError("order bound must be at least 1")
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    for norm in range(1, B + 1):
        for a in _vectors_of_norm(len(lam), norm):
            if lam.inner(a) == 0:
                return ResonanceCertificate(B, True, a, eigenvalues=lam.values)
    return ResonanceCertificate(B, False, eigenvalues=lam.values)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def origin_in_hull(points: Sequence[tuple]) -> bool:
    """Exact test for 0 in conv(points), points in Q^2 (Caratheodory: <= 3 points suffice)."""
    o = (Fraction(0), Fraction(0))
    pts = list(points)
    if any(p == o for p in pts):
        return True
    for a, b in combinations(pts, 2):
        if _cross(o, a, b) == 0 and a[0] * b[0] + a[1] * b[1] < 0:
            return True
    for a, b, c in combinations(pts, 3):
        s1, s2, s3 = _cross(a, b, o), _cross(b, c, o), _cross(c, a, o)
        if (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0):
            return True
    return False


def in_poincare_domain(lam: EigenData) -> bool:
    """0 is outside the convex hull of the eigenvalues seen as points of the plane."""
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    return not origin_in_hull([real_imag(v) for v in lam.values])


def admissibility(lam: EigenData, B: int) -> dict:
    cert = nonresonant_up_to_order(lam, B)
    hull = in_poincare_domain(lam)
    nonzero = all(v != 0 for v in lam.values)
    reason = None
    if not nonzero:
        reason = "zero eigenvalue (singularity not isolated)"
    elif not hull:
        reason = "origin lies in the convex hull of the eigenvalues"
    elif cert.resonant:
        reason = f"integer relation {cert.witness} of order <= {B}"
    return {"admissible": reason is None, "reason": reason, "poincare_domain": hull,
            "invertible_linear_part": nonzero, "certificate": cert.as_dict()}


# ---------------------------------------------------------------------------
# the operators delta (grade 1) and Delta (grade 2)


def linear_field(lam: EigenData) -> MultiVector:
    m = len(lam)
    return MultiVector(1, m, {((i,), tuple(int(k == i) for k in range(m))): lam.values[i]
                              for i in range(m) if lam.values[i]})


def delta_eigenvalue(lam: EigenData, exps: Sequence[int], dirs: Sequence[int]):
    shift = Fraction(0)
    for i in dirs:
        shift = shift + lam.values[i]
    return lam.inner(exps) - shift


def _check_grade(grade):
    if grade not in (1, 2):
        raise CapabilityError(f"delta is implemented for grades 1 and 2, got {grade}")


def delta_apply(lam: EigenData, A: MultiVector) -> MultiVector:
    """[Y, A] for Y = sum l_i y_i d_i, computed on the monomial eigenbasis."""
    _check_grade(A.grade)
    if A.nvars != len(lam):
        raise CapabilityError(f"{len(lam)} eigenvalues for {A.nvars} variables")
    out = {}
    for (dirs, e), c in A.terms.items():
        v = delta_eigenvalue(lam, e, dirs) * c
        if v:
            out[(dirs, e)] = v
    return MultiVector(A.grade, A.nvars, out)


def _is_diagonal(exps, dirs):
    return sum(exps) == len(dirs) and all(exps[i] == 1 for i in dirs)


def monomial_basis(m: int, grade: int, d: int, low: int = 0) -> list[tuple]:
    """(dirs, exps) keys of all monomial multivectors with low <= degree <= d."""
    keys = []
    for deg in range(low, d + 1):
        for e in monomials_of_degree(m, deg):
            for dirs in combinations(range(m), grade):
                keys.append((dirs, e))
    return keys


def resonant_monomials(lam: EigenData, grade: int, d: int, low: int = 0) -> list[tuple]:
    """Off-diagonal monomials of degree in [low, d] annihilated by bracketing with Y."""
    out = []
    for dirs, e in monomial_basis(len(lam), grade, d, low):
        if not _is_diagonal(e, dirs) and delta_eigenvalue(lam, e, dirs) == 0:
            out.append((dirs, e))
    return out


def _monomial_certificate(lam, grade, d, dirs, e) -> ResonanceCertificate:
    a = list(e)
    for i in dirs:
        a[i] -= 1
    if next(x for x in a if x) < 0:
        a = [-x for x in a]
    return ResonanceCertificate(d + grade, True, tuple(a), tuple(e), tuple(dirs), lam.values)


def kernel_delta(lam: EigenData, grade: int, d: int) -> list[MultiVector]:
    """Kernel of [Y, .] on multivectors of degree <= d: the diagonal elements.

    Raises :class:`ResonanceError` with the first off-diagonal kernel monomial
    (by degree, then graded-lex, then direction set) when the truncation has one.
    """
    _check_grade(grade)
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    m = len(lam)
    bad = resonant_monomials(lam, grade, d)
    if bad:
        dirs, e = bad[0]
        cert = _monomial_certificate(lam, grade, d, dirs, e)
        raise ResonanceError(
            f"y^{e} {'^'.join(f'd{i + 1}' for i in dirs)} lies in the kernel (eigenvalue 0)", cert)
    out = []
    for dirs in combinations(range(m), grade):
        e = tuple(int(k in dirs) for k in range(m))
        if sum(e) <= d:
            out.append(MultiVector(grade, m, {(dirs, e): Fraction(1)}))
    return out


def spectral_dimensions(lam: EigenData, grade: int, d: int) -> list[dict]:
    """Per-degree (dim ker, dim im, dim total) of [Y, .], from the matrix of the generic bracket.

    Independent of the eigenvalue formula: columns are ``schouten(Y, basis element)``.
    The direct sum ker + im = total holds at a degree iff ker and im meet trivially,
    which for this operator is checked by rank(M) == rank(M^2).
    """
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    Y = linear_field(lam)
    m = len(lam)
    rows = []
    for deg in range(d + 1):
        keys = monomial_basis(m, grade, deg, deg)
        idx = {k: i for i, k in enumerate(keys)}
        cols = []
        for k in keys:
            img = schouten(Y, MultiVector(grade, m, {k: Fraction(1)}))
            cols.append({idx[t]: c for t, c in img.terms.items()})
        M = ExactMatrix.from_columns(len(keys), cols)
        r1 = matrix_rank(M)
        dense = M.to_dense()
        M2 = ExactMatrix.from_rows([[sum((dense[i][t] * dense[t][j] for t in range(len(keys))), Fraction(0))
                                     for j in range(len(keys))] for i in range(len(keys))], len(keys))
        r2 = matrix_rank(M2)
        rows.append({"degree": deg, "total": len(keys), "kernel": len(keys) - r1, "image": r1,
                     "direct_sum": r1 == r2})
    return rows


def solve_homological(lam: EigenData, gamma: MultiVector, grade: int | None = None) -> MultiVector:
    """The preimage of gamma under [Y, .] with no kernel component."""
    grade = gamma.grade if grade is None else grade
    _check_grade(grade)
    if gamma.terms and gamma.grade != grade:
        raise CapabilityError(f"gamma has grade {gamma.grade}, expected {grade}")
    out, bad = {}, []
    for (dirs, e), c in gamma.sorted_terms():
        ev = delta_eigenvalue(lam, e, dirs)
        if ev == 0:
            bad.append((dirs, e))
        else:
            out[(dirs, e)] = _div(c, ev)
    if bad:
        raise NotInImageError(f"{len(bad)} monomial(s) lie in the kernel of [Y, .]", bad)
    return MultiVector(grade, gamma.nvars, out)


def _div(a, b):
    if isinstance(a, GaussianRational) or isinstance(b, GaussianRational):
        return as_scalar(a / b)
    return Fraction(a) / b


# ---------------------------------------------------------------------------
# de Rham division and the constructive decomposition


def _vector_keys(m, degrees):
    return [((i,), e) for deg in degrees for e in monomials_of_degree(m, deg) for i in range(m)]


def derham_divide(Y: MultiVector, W: MultiVector, d: int) -> MultiVector:
    """V of degree <= d with Y ^ V = W, by an exact linear solve on coefficients.

    Among all solutions the one with free coordinates zero in the echelon form
    is returned; when Y is homogeneous the solve splits by degree.
    """
    if Y.grade != 1 or W.grade not in (2,) and W.terms:
        raise CapabilityError("de Rham division expects a vector field and a bivector")
    m = Y.nvars
    if not W.terms:
        return MultiVector(1, m)
    if not wedge(W, Y).is_zero():
        raise DivisionError("W ^ Y != 0, so W is not divisible by Y")
    ydegs = {sum(e) for (_, e) in Y.terms}
    if len(ydegs) == 1:
        (ey,) = ydegs
        blocks = [([k - ey], W.homogeneous_part(k)) for k in sorted({sum(e) for (_, e) in W.terms})]
    else:
        blocks = [(list(range(d + 1)), W)]
    V = MultiVector(1, m)
    for degrees, Wk in blocks:
        degrees = [g for g in degrees if 0 <= g <= d]
        if not degrees:
            raise DivisionError(f"no vector field of degree <= {d} can produce W")
        unknowns = _vector_keys(m, degrees)
        cols, rowidx = [], {}
        for key in unknowns:
            img = wedge(Y, MultiVector(1, m, {key: Fraction(1)}))
            col = {}
            for t, c in img.terms.items():
                col[rowidx.setdefault(t, len(rowidx))] = c
            cols.append(col)
        rhs = {}
        for t, c in Wk.terms.items():
            rhs[rowidx.setdefault(t, len(rowidx))] = c
        M = ExactMatrix.from_columns(len(rowidx), cols)
        b = [rhs.get(i, Fraction(0)) for i in range(len(rowidx))]
        x = solve(M, b)
        if x is None:
            raise DivisionError(f"W is not Y ^ V for any V of degree <= {d}")
        V = V + MultiVector(1, m, {k: v for k, v in zip(unknowns, x) if v})
    return V


@dataclass
class Alpha0Decomposition:
    """alpha0 = Y ^ Z + sum a_ij y_i y_j d_i ^ d_j + residual (residual must be 0)."""

    Z: MultiVector
    coefficients: dict  # (i, j) 0-based, i < j -> scalar
    residual: MultiVector
    trace: dict = field(default_factory=dict)

    def diagonal_part(self, m: int) -> MultiVector:
        return MultiVector(2, m, {((i, j), tuple(int(k in (i, j)) for k in range(m))): c
                                  for (i, j), c in self.coefficients.items() if c})


def decompose_alpha0(lam: EigenData, alpha0: MultiVector, d: int = 4) -> Alpha0Decomposition:
    """Constructive decomposition of a bivector with [alpha0, Y] ^ Y = 0."""
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    m = len(lam)
    if alpha0.nvars != m or (alpha0.terms and alpha0.grade != 2):
        raise CapabilityError(f"alpha0 must be a bivector in {m} variables")
    Y = linear_field(lam)
    if not wedge(schouten(alpha0, Y), Y).is_zero():
        raise HypothesisError("[alpha0, Y] ^ Y != 0")
    top = max(d, alpha0.degree())
    # Y is linear, so V and Z have degree <= top - 1 while bivectors reach top
    for grade, limit in ((1, top - 1), (2, top)):
        bad = resonant_monomials(lam, grade, limit)
        if bad:
            dirs, e = bad[0]
            raise ResonanceError("resonant monomial within the truncation",
                                 _monomial_certificate(lam, grade, limit, dirs, e))
    W = delta_apply(lam, MultiVector(2, m, alpha0.terms))
    V = derham_divide(Y, W, top)
    V1 = MultiVector(1, m, {k: c for k, c in V.terms.items() if _is_diagonal(k[1], k[0])})
    Z = solve_homological(lam, V - V1, 1)
    rest = MultiVector(2, m, alpha0.terms) - wedge(Y, Z)
    coeffs = {}
    for i, j in combinations(range(m), 2):
        e = tuple(int(k in (i, j)) for k in range(m))
        c = rest.terms.get(((i, j), e))
        if c:
            coeffs[(i, j)] = c
    diag = MultiVector(2, m, {((i, j), tuple(int(k in (i, j)) for k in range(m))): c
                              for (i, j), c in coeffs.items()})
    return Alpha0Decomposition(Z, coeffs, rest - diag, {"V": V, "V1": V1, "W": W})


# ---------------------------------------------------------------------------
# formal linearization


@dataclass
class LinearizationResult:
    eigenvalues: EigenData
    order: int
    change: list[Polynomial]  # y = change(u)
    transformed: MultiVector  # the field in u coordinates, truncated at ``order``
    residual: MultiVector  # Y(change(u)) - D change(u) . L u, terms of degree <= order
    skipped: list[tuple] = field(default_factory=list)  # resonant monomials met with coefficient 0


def _jacobian(phi: Sequence[Polynomial]):
    m = len(phi)
    return [[phi[i].partial(j) for j in range(m)] for i in range(m)]


def _as_components(Y: MultiVector) -> list[Polynomial]:
    m = Y.nvars
    comps = Y.components()
    return [comps.get((i,), Polynomial(m)) for i in range(m)]


def conjugacy_residual(Y: MultiVector, change: Sequence[Polynomial], lam: EigenData, N: int) -> MultiVector:
    """Y(phi(u)) - D phi(u) . (sum l_i u_i d_i), keeping degrees <= N."""
    m = Y.nvars
    comps = _as_components(Y)
    pulled = [c.compose(list(change), truncate=N) for c in comps]
    u = [Polynomial.variable(m, k) for k in range(m)]
    lin = [u[k].scale(lam.values[k]) for k in range(m)]
    J = _jacobian(change)
    out = []
    for i in range(m):
        push = Polynomial(m)
        for j in range(m):
            push = push + J[i][j] * lin[j]
        out.append((pulled[i] - push).truncate(N))
    return MultiVector.vector_field(out) if m else MultiVector(1, 0)


def _diagonalize(L):
    """Exact P, D with L = P D P^-1 over Q(i), or CapabilityError."""
    import sympy
    from sympy.matrices.exceptions import MatrixError

    M = sympy.Matrix(L)
    try:
        P, D = M.diagonalize()
    except MatrixError as exc:
        raise CapabilityError(f"linear part is not diagonalizable: {exc}") from None

    def conv(x):
        x = sympy.nsimplify(x)
        re_, im = sympy.re(x), sympy.im(x)
        if not (re_.is_Rational and im.is_Rational):
            raise CapabilityError(f"eigen-data {x} is not a Gaussian rational")
        return as_scalar(GaussianRational(Fraction(int(re_.p), int(re_.q)), Fraction(int(im.p), int(im.q))))

    m = M.shape[0]
    Pinv = P.inv()
    return ([[conv(P[i, j]) for j in range(m)] for i in range(m)],
            [[conv(Pinv[i, j]) for j in range(m)] for i in range(m)],
            [conv(D[i, i]) for i in range(m)])


def formal_linearize(Yloc: MultiVector, N: int = 4) -> LinearizationResult:
    """Polynomial change of coordinates removing all nonlinear terms up to degree N.

    Degree by degree: with the current change phi exact through degree k-1, the
    degree-k part r of Y(phi) - D phi . L u is removed by phi += h, where h solves
    [L, h] = r monomial-wise.  A monomial with zero eigenvalue and nonzero
    coefficient is a genuine obstruction and raises :class:`ResonanceError`.
    """
    if Yloc.grade != 1:
        raise CapabilityError("linearization needs a vector field")
    m = Yloc.nvars
    if any(sum(e) == 0 for (_, e) in Yloc.terms):
        raise CapabilityError("the field is not singular at the origin")
    from .projective import affine_linear_part

    L = affine_linear_part(Yloc)
    diagonal = all(L[i][j] == 0 for i in range(m) for j in range(m) if i != j)
    if diagonal:
        P = Pinv = None
        lam_vals = [L[i][i] for i in range(m)]
        Yw = Yloc
    else:
        P, Pinv, lam_vals = _diagonalize(L)
        Yw = linear_change(Yloc, Pinv, P)
    if any(v == 0 for v in lam_vals):
        raise CapabilityError("linear part is singular; the singularity may not be isolated")
    lam = EigenData(tuple(lam_vals))
    u = [Polynomial.variable(m, k) for k in range(m)]
    phi = list(u)
    skipped = []
    for k in range(2, N + 1):
        r = conjugacy_residual(Yw, phi, lam, k).homogeneous_part(k)
        h = [Polynomial(m) for _ in range(m)]
        for ((i,), e), c in r.sorted_terms():
            ev = delta_eigenvalue(lam, e, (i,))
            if ev == 0:
                raise ResonanceError(f"resonant term y^{e} d{i + 1} at order {k}",
                                     _monomial_certificate(lam, 1, k, (i,), e))
            h[i] = h[i] + Polynomial.monomial(e, _div(c, ev))
        for dirs, e in resonant_monomials(lam, 1, k, k):
            if ((dirs, e)) not in r.terms:
                skipped.append((dirs, e))
        phi = [phi[i] + h[i] for i in range(m)]
    transformed = _transformed_field(Yw, phi, N)
    change = phi
    if P is not None:
        change = [sum((phi[j].scale(P[i][j]) for j in range(m)), Polynomial(m)) for i in range(m)]
    residual = conjugacy_residual(Yloc, change, lam, N)
    return LinearizationResult(lam, N, change, transformed, residual, skipped)


def _transformed_field(Y: MultiVector, phi: Sequence[Polynomial], N: int) -> MultiVector:
    """(D phi)^-1 . Y(phi(u)), truncated at degree N (Neumann series for the inverse)."""
    m = Y.nvars
    J = _jacobian(phi)
    A = [[J[i][j] - (1 if i == j else 0) for j in range(m)] for i in range(m)]
    pulled = [c.compose(list(phi), truncate=N) for c in _as_components(Y)]
    term = pulled
    total = list(pulled)
    for _ in range(N):
        term = [(-sum((A[i][j] * term[j] for j in range(m)), Polynomial(m))).truncate(N) for i in range(m)]
        if all(t.is_zero() for t in term):
            break
        total = [total[i] + term[i] for i in range(m)]
    return MultiVector.vector_field(total)
