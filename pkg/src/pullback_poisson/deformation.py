"""First-order deformations of Poisson structures and of their foliations on P^n.

T Pois at Pi is the kernel of xi -> [Pi, xi] on H^0(Lambda^2 T P^n); T Fol adds
the condition Pi ^ xi = 0.  For a pull-back Pi = d/dX_n ^ Y the two are
expected to coincide; :func:`verify_pullback_theorem` checks this on seeded
instances and audits every tangent vector against the chart decomposition
xi = a0 + x_n a1 + x_n^2 a2 + x_n^3 a3 + d/dx_n ^ b.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import ExactMatrix, Polynomial, kernel_basis, span_contains
from .errors import MalformedSectionError, NotPoissonError, PreconditionError, StructuralError
from .multivector import MultiVector, partial_multivector, schouten, wedge
from .projective import (
    GlobalSection,
    SectionSpace,
    chart_restrict,
    pullback_bivector,
    random_quadratic_field,
    section_space,
)

FIBER_DEGREE_LIMIT = 3
EXPECTED_PULLBACK_DIMENSION = {4: 40}  # 4 (centre of projection) + 36 (dim H0(T P^3(1)))


@dataclass(frozen=True)
class LinearOperator:
    """Exact matrix of a linear map between section spaces, in their standard bases."""

    source: SectionSpace
    target: SectionSpace | None  # None when the target bundle is zero
    matrix: ExactMatrix

    def apply(self, v: Sequence) -> list:
        return self.matrix.matvec(list(v))

    def is_zero(self):
        return self.matrix.is_zero()


def _operator(Pi: GlobalSection, target_grade: int, op) -> LinearOperator:
    src = section_space(Pi.space.n, 2, 0)
    n = src.n
    if target_grade > n:
        return LinearOperator(src, None, ExactMatrix.zeros(0, src.dimension))
    tgt = section_space(n, target_grade, 0)
    cols = []
    for i in range(src.dimension):
        image = op(Pi.rep, src.basis_element(i))
        cols.append({r: c for r, c in enumerate(tgt.coordinates(image)) if c})
    return LinearOperator(src, tgt, ExactMatrix.from_columns(tgt.dimension, cols))


def bracket_operator(Pi: GlobalSection) -> LinearOperator:
    """Matrix of xi -> [Pi, xi] from H^0(Lambda^2 T P^n) to H^0(Lambda^3 T P^n)."""
    _check_bivector(Pi)
    return _operator(Pi, 3, schouten)


def wedge_operator(Pi: GlobalSection) -> LinearOperator:
    """Matrix of xi -> Pi ^ xi into H^0(Lambda^4 T P^n); the zero map when n = 3."""
    _check_bivector(Pi)
    return _operator(Pi, 4, wedge)


def _check_bivector(Pi: GlobalSection):
    sp = Pi.space
    if sp.grade != 2 or sp.twist != 0:
        raise StructuralError(f"expected a global bivector, got a section of {sp}")


def poisson_residual(Pi: GlobalSection) -> GlobalSection | None:
    """[Pi, Pi] reduced in H^0(Lambda^3 T P^n); None when n < 3 (the bundle is zero)."""
    n = Pi.space.n
    if n < 3:
        return None
    return section_space(n, 3, 0).reduce(schouten(Pi.rep, Pi.rep))


def is_poisson_section(Pi: GlobalSection) -> bool:
    res = poisson_residual(Pi)
    return res is None or res.is_zero()


@dataclass
class TangentSpaceResult:
    space: SectionSpace
    kind: str  # "poisson" | "foliation"
    dimension: int
    basis: list[GlobalSection]
    vectors: list[list]


def _kernel_result(space, kind, M: ExactMatrix) -> TangentSpaceResult:
    vecs = kernel_basis(M)
    return TangentSpaceResult(space, kind, len(vecs), [space.from_coordinates(v) for v in vecs], vecs)


def _require_poisson(Pi: GlobalSection):
    res = poisson_residual(Pi)
    if res is not None and not res.is_zero():
        raise NotPoissonError("[Pi, Pi] does not vanish; tangent spaces are defined at Poisson points only",
                              residual=res)


def tangent_pois(Pi: GlobalSection, bracket: LinearOperator | None = None) -> TangentSpaceResult:
    _check_bivector(Pi)
    _require_poisson(Pi)
    B = bracket or bracket_operator(Pi)
    return _kernel_result(B.source, "poisson", B.matrix)


def tangent_fol(Pi: GlobalSection, bracket: LinearOperator | None = None,
                wedge_op: LinearOperator | None = None) -> TangentSpaceResult:
    _check_bivector(Pi)
    _require_poisson(Pi)
    B = bracket or bracket_operator(Pi)
    W = wedge_op or wedge_operator(Pi)
    return _kernel_result(B.source, "foliation", B.matrix.vstack(W.matrix))


def same_subspace(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple[bool, bool]:
    """``(span a <= span b, span b <= span a)`` by exact rank tests."""
    return span_contains(b, a), span_contains(a, b)


# ---------------------------------------------------------------------------
# chart decomposition


@dataclass
class ChartDecomposition:
    """xi = alpha[0] + x_f alpha[1] + x_f^2 alpha[2] + x_f^3 alpha[3] + d/dx_f ^ beta."""

    alpha: list[MultiVector]
    beta: MultiVector
    fiber: int

    @property
    def nvars(self):
        return self.beta.nvars

    def alpha_total(self) -> MultiVector:
        n = self.nvars
        out = MultiVector(2, n)
        for k, a in enumerate(self.alpha):
            xk = Polynomial.monomial(tuple(k if i == self.fiber else 0 for i in range(n)))
            out = out + a * xk
        return out

    def reassemble(self) -> MultiVector:
        return self.alpha_total() + wedge(MultiVector.basis(self.fiber, self.nvars), self.beta)


def decompose_chart(xi: GlobalSection | MultiVector, fiber: int | None = None, chart: int = 0
                    ) -> ChartDecomposition:
    """Split the affine restriction of xi along the fibre variable (default: the last one)."""
    aff = chart_restrict(xi, chart) if isinstance(xi, GlobalSection) else xi
    if aff.grade != 2:
        raise StructuralError(f"decomposition needs a bivector, got grade {aff.grade}")
    n = aff.nvars
    f = n - 1 if fiber is None else fiber
    if not 0 <= f < n:
        raise StructuralError(f"fibre index {f} outside 0..{n - 1}")
    alphas = [dict() for _ in range(FIBER_DEGREE_LIMIT + 1)]
    beta = {}
    for (dirs, e), c in aff.terms.items():
        if f in dirs:
            pos = dirs.index(f)
            rest = dirs[:pos] + dirs[pos + 1:]
            beta[(rest, e)] = c if pos % 2 == 0 else -c
        else:
            k = e[f]
            if k > FIBER_DEGREE_LIMIT:
                raise MalformedSectionError(
                    f"term of x_{f + 1}-degree {k} > {FIBER_DEGREE_LIMIT}: not a global bivector")
            alphas[k][(dirs, e[:f] + (0,) + e[f + 1:])] = c
    return ChartDecomposition([MultiVector(2, n, a) for a in alphas], MultiVector(1, n, beta), f)


@dataclass
class ChartIdentityCheck:
    """Exact evaluation of the first-order equations for one tangent vector."""

    fiber_derivative: bool  # d(alpha)/dx_f ^ Y = 0
    bracket_balance: bool  # [Y, alpha] - d(beta)/dx_f ^ Y = 0
    alpha_wedge_y: list[bool]  # alpha_i ^ Y = 0 for i = 1, 2, 3
    alpha0_bracket: bool  # [alpha_0, Y] ^ Y = 0
    alpha0_wedge_y: bool  # alpha_0 ^ Y = 0, equivalent to xi ^ Pi = 0
    reassembly: bool

    @property
    def passed(self) -> bool:
        return (self.fiber_derivative and self.bracket_balance and all(self.alpha_wedge_y)
                and self.alpha0_bracket and self.reassembly)

    def as_dict(self):
        return {
            "fiber_derivative": self.fiber_derivative, "bracket_balance": self.bracket_balance,
            "alpha_i_wedge_Y": self.alpha_wedge_y,
            "alpha0_bracket_wedge_Y": self.alpha0_bracket, "alpha0_wedge_Y": self.alpha0_wedge_y,
            "reassembly": self.reassembly, "passed": self.passed,
        }


def verify_chart_identities(dec: ChartDecomposition, Y: MultiVector,
                            original: MultiVector | None = None) -> ChartIdentityCheck:
    """``Y`` is the affine quadratic field (free of x_f and d/dx_f) in the same variables."""
    if Y.nvars != dec.nvars:
        raise StructuralError("Y and the decomposition live in different variable counts")
    f = dec.fiber
    alpha = dec.alpha_total()
    fiber_derivative = wedge(partial_multivector(alpha, f), Y).is_zero()
    bracket_balance = (schouten(Y, alpha) - wedge(partial_multivector(dec.beta, f), Y)).is_zero()
    aw = [wedge(a, Y).is_zero() for a in dec.alpha[1:]]
    a0b = wedge(schouten(dec.alpha[0], Y), Y).is_zero()
    a0w = wedge(dec.alpha[0], Y).is_zero()
    reas = True if original is None else dec.reassemble() == original
    return ChartIdentityCheck(fiber_derivative, bracket_balance, aw, a0b, a0w, reas)


# ---------------------------------------------------------------------------
# the end-to-end run


@dataclass
class DeformationReport:
    seed: int
    n: int
    eigenvalues: list
    order_bound: int
    dim_tangent_pois: int
    dim_tangent_fol: int
    fol_in_pois: bool
    pois_in_fol: bool
    verdict: str
    flags: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    chart_checks: list[dict] = field(default_factory=list)
    checklist: dict = field(default_factory=dict)
    offending: list[MultiVector] = field(default_factory=list)
    basis: list[GlobalSection] = field(default_factory=list)
    Y: GlobalSection | None = None
    Pi: GlobalSection | None = None
    timing_ms: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.verdict in (VERDICT_VERIFIED, VERDICT_DEGENERATE)


VERDICT_VERIFIED = "first-order-theorem-verified"
VERDICT_DEGENERATE = "degenerate-coincidence"
VERDICT_COUNTEREXAMPLE = "counterexample-candidate"


def verify_pullback_theorem(n: int, seed: int, lam, order_bound: int = 4,
                            inject: MultiVector | None = None) -> DeformationReport:
    """Sample Y, build Pi = d/dX_n ^ Y and compare T Pois with T Fol at Pi.

    ``inject`` appends an extra homogeneous bivector to the computed tangent
    basis before the containment test (negative control).
    """
    from .poincare import EigenData, admissibility

    if n < 3:
        raise PreconditionError(f"n must be at least 3, got {n}")
    lam = lam if isinstance(lam, EigenData) else EigenData.of(lam)
    flags, warnings = [], []
    if len(lam) == n:
        warnings.append(f"eigenvalue tuple has length n = {n}; using the first n - 1 = {n - 1} entries")
        lam = EigenData(lam.values[: n - 1])
    if len(lam) != n - 1:
        raise PreconditionError(f"need n - 1 = {n - 1} eigenvalues, got {len(lam)}")
    adm = admissibility(lam, order_bound)
    if not adm["admissible"]:
        raise PreconditionError(f"eigenvalues {lam} are not admissible: {adm['reason']}")
    if n < 4:
        flags.append("n<4 outside theorem scope")

    t0 = time.perf_counter()
    Y = random_quadratic_field(n - 1, seed, lam)
    Pi = pullback_bivector(Y)
    t1 = time.perf_counter()
    B = bracket_operator(Pi)
    W = wedge_operator(Pi)
    t2 = time.perf_counter()
    pois = tangent_pois(Pi, B)
    fol = tangent_fol(Pi, B, W)
    t3 = time.perf_counter()

    pois_vectors = list(pois.vectors)
    if inject is not None:
        pois_vectors.append(pois.space.coordinates(inject))
    fol_in_pois, pois_in_fol = same_subspace(fol.vectors, pois_vectors)
    offending = []
    if not pois_in_fol:
        offending = [pois.space.from_coordinates(v).rep for v in pois_vectors
                     if not span_contains(fol.vectors, [v])]

    # Y in the chart of P^n: the affine field of P^{n-1} with the fibre variable appended
    Y_aff = chart_restrict(Y)
    Y_aff = MultiVector(1, n, {(d, e + (0,)): c for (d, e), c in Y_aff.terms.items()})
    checks = []
    for sec in pois.basis:
        aff = chart_restrict(sec)
        dec = decompose_chart(aff)
        checks.append(verify_chart_identities(dec, Y_aff, aff).as_dict())
    t4 = time.perf_counter()

    equal = fol_in_pois and pois_in_fol
    if not equal:
        verdict = VERDICT_COUNTEREXAMPLE
    elif n < 4:
        verdict = VERDICT_DEGENERATE
    else:
        verdict = VERDICT_VERIFIED
    expected = EXPECTED_PULLBACK_DIMENSION.get(n)
    if expected is not None and pois.dimension != expected:
        warnings.append(f"dim T Pois = {pois.dimension} differs from the parameter count {expected}")
    checklist = dict(adm)
    checklist["linear_part_matches"] = _linear_part_matches(chart_restrict(Y), lam)
    checklist["formal_linearization"] = _linearization_probe(chart_restrict(Y), order_bound)
    checklist["scope"] = "first-order deformations only"
    return DeformationReport(
        seed=seed, n=n, eigenvalues=list(lam.values), order_bound=order_bound,
        dim_tangent_pois=pois.dimension, dim_tangent_fol=fol.dimension,
        fol_in_pois=fol_in_pois, pois_in_fol=pois_in_fol, verdict=verdict,
        flags=flags, warnings=warnings, chart_checks=checks, checklist=checklist,
        offending=offending, basis=pois.basis, Y=Y, Pi=Pi,
        timing_ms={"sample": _ms(t0, t1), "operators": _ms(t1, t2), "kernels": _ms(t2, t3),
                   "chart_checks": _ms(t3, t4), "total": _ms(t0, t4)},
    )


def _ms(a, b):
    return round((b - a) * 1000, 3)


def _linear_part_matches(Y_aff: MultiVector, lam) -> bool:
    from .projective import affine_linear_part

    L = affine_linear_part(Y_aff)
    m = len(L)
    return all(L[i][j] == (lam.values[i] if i == j else 0) for i in range(m) for j in range(m))


def _linearization_probe(Y_aff: MultiVector, order: int) -> dict:
    from .errors import ResonanceError
    from .poincare import formal_linearize

    try:
        res = formal_linearize(Y_aff, order)
    except ResonanceError as exc:
        return {"order": order, "ok": False, "obstruction": exc.certificate.as_dict()}
    return {"order": order, "ok": res.residual.is_zero(), "obstruction": None}
