"""Exact Schouten calculus on polynomial multivector fields over projective space.

Checks, on concrete instances, that first-order deformations of a pull-back
rank-2 Poisson structure d/dX_n ^ Y on P^n are exactly the first-order
deformations of its foliation.
"""
__version__ = "0.1.0"

from .algebra import ExactMatrix, GaussianRational, Polynomial, kernel_basis, poly_normalize  # noqa: E402
from .multivector import (  # noqa: E402
    MultiVector,
    contract,
    generic_rank,
    integrability_residual,
    is_poisson,
    schouten,
    wedge,
)
from .expression import format_expression, parse_expression  # noqa: E402

__all__ = [
    "ExactMatrix", "GaussianRational", "MultiVector", "Polynomial", "contract", "format_expression",
    "generic_rank", "integrability_residual", "is_poisson", "kernel_basis", "parse_expression",
    "poly_normalize", "schouten", "wedge",
]
