"""Command-line front end: parse, dispatch, emit a JSON report.

Exit codes: 0 success, 1 mathematical negative (not Poisson, counterexample
candidate, non-zero residual), 2 usage or parse error, 3 precondition failure
(resonance, inadmissible eigenvalues, unsupported input).
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .algebra import format_scalar
from .deformation import (
    VERDICT_COUNTEREXAMPLE,
    bracket_operator,
    tangent_fol,
    tangent_pois,
    verify_pullback_theorem,
    wedge_operator,
)
from .errors import (
    CapabilityError,
    DivisionError,
    NotPoissonError,
    ParseError,
    PoissonError,
    PreconditionError,
    StructuralError,
)
from .expression import format_expression, infer_nvars, parse_expression
from .multivector import MultiVector, generic_rank, integrability_residual, schouten
from .poincare import (
    EigenData,
    decompose_alpha0,
    formal_linearize,
    kernel_delta,
    nonresonant_up_to_order,
    spectral_dimensions,
)
from .projective import GlobalSection, pullback_bivector, random_quadratic_field, section_space
from .report import dumps, make_report

DEGREE_ENV = "PULLBACK_POISSON_DEGREE"
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_PRECONDITION = 0, 1, 2, 3


def default_degree() -> int:
    raw = os.environ.get(DEGREE_ENV)
    if raw is None:
        return 4
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{DEGREE_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigError(f"{DEGREE_ENV} must be positive")
    return value


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    exprs: list[str] = field(default_factory=list)
    mode: str = "affine"
    nvars: int | None = None
    n: int | None = None
    seeds: list[int] = field(default_factory=list)
    eigenvalues: str | None = None
    degree: int = 4
    order: int = 4
    grade: int | None = None
    jobs: int = 1
    out: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.mode not in ("affine", "homogeneous"):
            raise ConfigError(f"mode must be affine or homogeneous, got {self.mode!r}")
        for name in ("degree", "order", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"--{name} must be positive")
        if self.nvars is not None and not 1 <= self.nvars <= 10:
            raise ConfigError("--vars must lie in 1..10")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("duplicate seeds")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")  # where the report goes does not change its content
        d.pop("jobs")
        return d


# ---------------------------------------------------------------------------
# helpers


def _parse(cfg: RunConfig, text: str):
    nvars = cfg.nvars
    if nvars is None and cfg.mode == "homogeneous" and cfg.n is not None:
        nvars = cfg.n + 1
    return parse_expression(text, cfg.mode, nvars or infer_nvars(text, cfg.mode))


def _need(cfg: RunConfig, count: int):
    if len(cfg.exprs) != count:
        raise ConfigError(f"{cfg.command} takes {count} expression(s), got {len(cfg.exprs)}")


def _eigen(cfg: RunConfig) -> EigenData:
    if not cfg.eigenvalues:
        raise ConfigError(f"{cfg.command} needs --lambda")
    try:
        return EigenData.of(cfg.eigenvalues)
    except ValueError as exc:
        raise ConfigError(f"bad --lambda: {exc}") from None


def _fmt(A, mode="affine") -> str:
    return format_expression(A.rep if isinstance(A, GlobalSection) else A, mode)


class Outcome:
    """What a command handler hands back to :func:`dispatch`."""

    def __init__(self, verdict, code=EXIT_OK, **parts):
        self.verdict = verdict
        self.code = code
        self.parts = parts


# ---------------------------------------------------------------------------
# command handlers


def cmd_check_poisson(cfg):
    _need(cfg, 1)
    Pi = _parse(cfg, cfg.exprs[0])
    if Pi.terms and Pi.grade != 2:
        raise StructuralError(f"expected a bivector, got grade {Pi.grade}")
    res = integrability_residual(Pi)
    if cfg.mode == "homogeneous" and Pi.terms:
        # on P^n only the class of [Pi, Pi] modulo R ^ (.) matters
        n = Pi.nvars - 1
        section_space(n, 2).check(Pi)
        res = section_space(n, 3).reduce(res).rep if n >= 3 else MultiVector.zero(3, Pi.nvars)
    ok = res.is_zero()
    return Outcome("poisson" if ok else "not-poisson", EXIT_OK if ok else EXIT_NEGATIVE,
                   result={"residual": _fmt(res, cfg.mode), "is_poisson": ok})


def cmd_rank(cfg):
    _need(cfg, 1)
    Pi = _parse(cfg, cfg.exprs[0])
    if Pi.terms and Pi.grade != 2:
        raise StructuralError(f"expected a bivector, got grade {Pi.grade}")
    r = generic_rank(Pi)
    return Outcome(f"rank-{r}", dimensions={"rank": r},
                   result={"rank": r, "is_poisson": integrability_residual(Pi).is_zero()})


def cmd_schouten(cfg):
    _need(cfg, 2)
    nvars = cfg.nvars or max(infer_nvars(t, cfg.mode) for t in cfg.exprs)
    A, B = (parse_expression(t, cfg.mode, nvars) for t in cfg.exprs)
    C = schouten(A, B)
    return Outcome("computed", result={"bracket": _fmt(C, cfg.mode),
                                       "grade": A.grade + B.grade - 1})


def _target_bivector(cfg):
    """Pi from an expression (homogeneous coordinates) or the seeded pull-back."""
    if cfg.exprs:
        _need(cfg, 1)
        text = cfg.exprs[0]
        n = cfg.n if cfg.n is not None else infer_nvars(text, "homogeneous") - 1
        A = parse_expression(text, "homogeneous", n + 1)
        return section_space(n, 2).reduce(A), {"source": "expression"}
    if cfg.n is None or len(cfg.seeds) != 1:
        raise ConfigError("give either an expression or --n with exactly one --seed")
    lam = _eigen(cfg).values if cfg.eigenvalues else None
    if lam is not None and len(lam) == cfg.n:
        lam = lam[: cfg.n - 1]
    Y = random_quadratic_field(cfg.n - 1, cfg.seeds[0], lam)
    return pullback_bivector(Y), {"source": "pull-back", "Y": _fmt(Y, "homogeneous")}


def _tangent(cfg, kind):
    Pi, info = _target_bivector(cfg)
    B = bracket_operator(Pi)
    try:
        res = tangent_pois(Pi, B) if kind == "pois" else tangent_fol(Pi, B, wedge_operator(Pi))
    except NotPoissonError as exc:
        return Outcome("not-poisson", EXIT_NEGATIVE, error=str(exc),
                       result={**info, "Pi": _fmt(Pi, "homogeneous"),
                               "residual": _fmt(exc.residual, "homogeneous")})
    key = f"tangent_{kind}"
    return Outcome("computed", dimensions={key: res.dimension, "ambient": Pi.space.dimension},
                   bases={key: [_fmt(s, "homogeneous") for s in res.basis]},
                   result={**info, "Pi": _fmt(Pi, "homogeneous")})


def cmd_tangent_pois(cfg):
    return _tangent(cfg, "pois")


def cmd_tangent_fol(cfg):
    return _tangent(cfg, "fol")


def _pullback_run(args) -> dict:
    n, seed, lam, order = args
    t0 = time.perf_counter()
    rep = verify_pullback_theorem(n, seed, lam, order)
    return {
        "seed": seed,
        "verdict": rep.verdict,
        "dimensions": {"tangent_pois": rep.dim_tangent_pois, "tangent_fol": rep.dim_tangent_fol},
        "bases": {"tangent_pois": [_fmt(s, "homogeneous") for s in rep.basis],
                  "offending": [_fmt(s, "homogeneous") for s in rep.offending]},
        "certificates": [rep.checklist["certificate"]]
        + ([rep.checklist["formal_linearization"]["obstruction"]]
           if rep.checklist["formal_linearization"]["obstruction"] else []),
        "result": {
            "n": rep.n,
            "eigenvalues": [format_scalar(v) for v in rep.eigenvalues],
            "Y": _fmt(rep.Y, "homogeneous"),
            "Pi": _fmt(rep.Pi, "homogeneous"),
            "fol_in_pois": rep.fol_in_pois,
            "pois_in_fol": rep.pois_in_fol,
            "flags": rep.flags,
            "warnings": rep.warnings,
            "chart_checks_passed": all(c["passed"] for c in rep.chart_checks),
            "chart_checks": rep.chart_checks,
            "checklist": {k: v for k, v in rep.checklist.items() if k != "certificate"},
        },
        "timing_ms": {**rep.timing_ms, "wall": round((time.perf_counter() - t0) * 1000, 3)},
    }


def cmd_verify_pullback(cfg):
    if cfg.n is None or not cfg.seeds:
        raise ConfigError("verify-pullback needs --n and --seed")
    lam = _eigen(cfg).values
    jobs = [(cfg.n, s, lam, cfg.order) for s in sorted(cfg.seeds)]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            runs = list(pool.map(_pullback_run, jobs))
    else:
        runs = [_pullback_run(j) for j in jobs]
    verdicts = {r["verdict"] for r in runs}
    bad = VERDICT_COUNTEREXAMPLE in verdicts
    verdict = VERDICT_COUNTEREXAMPLE if bad else (verdicts.pop() if len(verdicts) == 1 else "mixed")
    if len(runs) == 1:
        one = runs[0]
        return Outcome(verdict, EXIT_NEGATIVE if bad else EXIT_OK, dimensions=one["dimensions"],
                       bases=one["bases"], certificates=one["certificates"], result=one["result"],
                       timing_ms=one["timing_ms"])
    return Outcome(verdict, EXIT_NEGATIVE if bad else EXIT_OK, runs=runs,
                   dimensions={f"seed_{r['seed']}": r["dimensions"]["tangent_pois"] for r in runs},
                   timing_ms={"total": round(sum(r["timing_ms"]["wall"] for r in runs), 3)})


def cmd_delta_kernel(cfg):
    lam = _eigen(cfg)
    if cfg.grade is None:
        raise ConfigError("delta-kernel needs --grade")
    cert = nonresonant_up_to_order(lam, cfg.degree + 2)
    K = kernel_delta(lam, cfg.grade, cfg.degree)
    table = spectral_dimensions(lam, cfg.grade, cfg.degree)
    return Outcome("computed", dimensions={"kernel": len(K)},
                   bases={"kernel": [_fmt(k) for k in K]},
                   certificates=[cert.as_dict()],
                   result={"grade": cfg.grade, "degree": cfg.degree, "per_degree": table})


def cmd_linearize(cfg):
    _need(cfg, 1)
    Y = _parse(cfg, cfg.exprs[0])
    res = formal_linearize(Y, cfg.order)
    change = MultiVector.vector_field(res.change) if res.change else Y
    ok = res.residual.is_zero()
    return Outcome("linearized" if ok else "residual-nonzero", EXIT_OK if ok else EXIT_NEGATIVE,
                   result={"eigenvalues": [format_scalar(v) for v in res.eigenvalues],
                           "order": res.order,
                           "change": _fmt(change),
                           "transformed": _fmt(res.transformed),
                           "residual": _fmt(res.residual),
                           "skipped_resonant": [[list(e), [d + 1 for d in dirs]] for dirs, e in res.skipped]})


def cmd_decompose_alpha0(cfg):
    _need(cfg, 1)
    lam = _eigen(cfg)
    A = parse_expression(cfg.exprs[0], "affine", len(lam))
    dec = decompose_alpha0(lam, A, cfg.degree)
    ok = dec.residual.is_zero()
    coeffs = {f"a{i + 1}{j + 1}": format_scalar(c) for (i, j), c in sorted(dec.coefficients.items())}
    return Outcome("decomposed" if ok else "residual-nonzero", EXIT_OK if ok else EXIT_NEGATIVE,
                   certificates=[nonresonant_up_to_order(lam, cfg.degree + 2).as_dict()],
                   result={"Z": _fmt(dec.Z), "coefficients": coeffs, "residual": _fmt(dec.residual)})


COMMANDS = {
    "check-poisson": cmd_check_poisson,
    "rank": cmd_rank,
    "schouten": cmd_schouten,
    "tangent-pois": cmd_tangent_pois,
    "tangent-fol": cmd_tangent_fol,
    "verify-pullback": cmd_verify_pullback,
    "delta-kernel": cmd_delta_kernel,
    "linearize": cmd_linearize,
    "decompose-alpha0": cmd_decompose_alpha0,
}


def _certificates_of(exc):
    cert = getattr(exc, "certificate", None)
    return [cert.as_dict()] if cert is not None else []


def dispatch(cfg: RunConfig) -> tuple[int, dict]:
    """Run one configured command; never raises for mathematical or input errors."""
    t0 = time.perf_counter()
    seed = cfg.seeds[0] if len(cfg.seeds) == 1 else (sorted(cfg.seeds) or None)
    try:
        cfg.validate()
        out = COMMANDS[cfg.command](cfg)
    except (ParseError, ConfigError, StructuralError) as exc:
        out = Outcome("usage-error", EXIT_USAGE, error=str(exc))
    except PreconditionError as exc:
        out = Outcome("precondition-failed", EXIT_PRECONDITION, error=str(exc),
                      certificates=_certificates_of(exc))
    except CapabilityError as exc:
        out = Outcome("unsupported", EXIT_PRECONDITION, error=str(exc))
    except (DivisionError, NotPoissonError) as exc:
        out = Outcome("negative", EXIT_NEGATIVE, error=str(exc))
    except PoissonError as exc:
        out = Outcome("error", EXIT_PRECONDITION, error=str(exc))
    parts = dict(out.parts)
    parts.setdefault("timing_ms", round((time.perf_counter() - t0) * 1000, 3))
    report = make_report(cfg.command, cfg.echo(), out.verdict, seed=seed, **parts)
    return out.code, report


# ---------------------------------------------------------------------------
# argument parsing


def _seeds(text: str) -> list[int]:
    try:
        out = []
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pullback-poisson", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, exprs: str | None = None):
        if exprs == "one":
            sp.add_argument("exprs", nargs=1, metavar="EXPR")
        elif exprs == "two":
            sp.add_argument("exprs", nargs=2, metavar="EXPR")
        elif exprs == "optional":
            sp.add_argument("exprs", nargs="?", metavar="EXPR")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        return sp

    for name, text in (("check-poisson", "is [P, P] = 0?"), ("rank", "generic rank of a bivector")):
        sp = common(sub.add_parser(name, help=text), "one")
        sp.add_argument("--vars", type=int, dest="nvars", help="number of ambient variables")
        sp.add_argument("--mode", choices=("affine", "homogeneous"), default="affine")
    sp = common(sub.add_parser("schouten", help="bracket of two multivector fields"), "two")
    sp.add_argument("--vars", type=int, dest="nvars")
    sp.add_argument("--mode", choices=("affine", "homogeneous"), default="affine")
    for name, text in (("tangent-pois", "kernel of [P, .] on global bivectors"),
                       ("tangent-fol", "the same kernel cut down by P ^ xi = 0")):
        sp = common(sub.add_parser(name, help=text, description=f"{text}; P is an expression in homogeneous "
                                   "coordinates or a seeded pull-back (--n, --seed, --lambda)"), "optional")
        sp.add_argument("--n", type=int)
        sp.add_argument("--seed", type=_seeds, default=[])
        sp.add_argument("--lambda", dest="eigenvalues")
    sp = common(sub.add_parser("verify-pullback", help="compare T Pois and T Fol at seeded pull-backs"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=_seeds, required=True, help="e.g. 7 or 1,2,5 or 1-5")
    sp.add_argument("--lambda", dest="eigenvalues", required=True)
    sp.add_argument("--order", type=int, default=4, help="resonance order bound")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for several seeds")
    sp = common(sub.add_parser("delta-kernel", help="kernel of [Y, .] for a diagonal linear Y"))
    sp.add_argument("--lambda", dest="eigenvalues", required=True)
    sp.add_argument("--grade", type=int, required=True)
    sp.add_argument("--deg", type=int, dest="degree")
    sp = common(sub.add_parser("linearize", help="formal linearizing change of coordinates"), "one")
    sp.add_argument("--order", type=int)
    sp = common(sub.add_parser("decompose-alpha0", help="split a bivector as Y ^ Z + diagonal part"), "one")
    sp.add_argument("--lambda", dest="eigenvalues", required=True)
    sp.add_argument("--deg", type=int, dest="degree")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    deg = default_degree()
    exprs = ns.exprs if isinstance(getattr(ns, "exprs", None), list) else (
        [ns.exprs] if getattr(ns, "exprs", None) else [])
    order = getattr(ns, "order", None)
    if order is None:
        order = deg
    return RunConfig(
        command=ns.command,
        exprs=list(exprs),
        mode=getattr(ns, "mode", "affine"),
        nvars=getattr(ns, "nvars", None),
        n=getattr(ns, "n", None),
        seeds=list(getattr(ns, "seed", []) or []),
        eigenvalues=getattr(ns, "eigenvalues", None),
        degree=deg if getattr(ns, "degree", None) is None else ns.degree,
        order=order,
        grade=getattr(ns, "grade", None),
        jobs=getattr(ns, "jobs", 1),
        out=ns.out,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the usage message
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, report = dispatch(cfg)
    text = dumps(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report["error"]:
        print(f"error: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
