"""Desk-scale numerical checks of volume-form identities.

Wiener-measure identities (characteristic functional, Cameron-Martin,
Malliavin), the Wiener chaos / Fock algebra, finite-dimensional Gaussian and
Fresnel Fourier identities, a zero-dimensional Schwinger-Dyson model and the
Lie-derivative divergence identities of Riemannian and symplectic volume forms.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .estimator import McEstimate, RngStream, estimate
from .report import VerificationReport

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "McEstimate", "RngStream", "VerificationReport", "estimate"]
