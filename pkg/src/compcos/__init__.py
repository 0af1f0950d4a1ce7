"""Composite cosine transforms on Stiefel manifolds.

Numerical building blocks (cone algebra, gamma functions of the cone,
Haar and importance samplers, cone quadrature), the transforms themselves
and Monte Carlo checks of the identities that relate them.
"""

__version__ = "0.1.0"

from .cone import (
    PosDefMatrix,
    cholesky_upper,
    composite_power,
    principal_minors,
    reverse_index,
    reverse_matrix,
)
from .mc import McEstimate, RngStream
from .special import (
    InjectivityVerdict,
    TaggedValue,
    gamma_cone,
    injectivity_classify,
    log_gamma_complex,
    multiplier_mu,
    siegel_gamma,
    stiefel_volume,
)

__all__ = [
    "InjectivityVerdict",
    "McEstimate",
    "PosDefMatrix",
    "RngStream",
    "TaggedValue",
    "cholesky_upper",
    "composite_power",
    "gamma_cone",
    "injectivity_classify",
    "log_gamma_complex",
    "multiplier_mu",
    "principal_minors",
    "reverse_index",
    "reverse_matrix",
    "siegel_gamma",
    "stiefel_volume",
]
