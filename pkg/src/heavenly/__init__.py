"""Exact symbolic algebra for checking a Lax-pair covering of
u_xz = u_ty + u_xx u_yy - u_xy^2 against the structure equations of its symmetries."""

from .kernel import BACKEND
from .symexpr import Poly, Scalar, SubstitutionError, Var, normalize, partial, substitute

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Poly",
    "Scalar",
    "SubstitutionError",
    "Var",
    "normalize",
    "partial",
    "substitute",
]
