"""Numerical toolkit for double Yangian R-matrices, their elliptic deformations and the twist F."""

__version__ = "0.1.0"

from .errors import DytwistError, NotRepresentable, PoleProximity, QuadratureFailure, ZeroOrPole  # noqa: E402
from .rmat import DeformationParams, RKind, r_matrix, twist_F_closed  # noqa: E402
from .specfun import (  # noqa: E402
    Periods,
    QuadratureSettings,
    SpectralPoint,
    double_sine,
    log_double_sine,
    log_gamma,
    log_gamma1,
    log_gamma2,
    rho_dy,
    rho_F,
    rho_r,
)

__all__ = [
    "__version__",
    "DytwistError",
    "NotRepresentable",
    "PoleProximity",
    "QuadratureFailure",
    "ZeroOrPole",
    "DeformationParams",
    "RKind",
    "r_matrix",
    "twist_F_closed",
    "Periods",
    "QuadratureSettings",
    "SpectralPoint",
    "double_sine",
    "log_double_sine",
    "log_gamma",
    "log_gamma1",
    "log_gamma2",
    "rho_dy",
    "rho_F",
    "rho_r",
]
