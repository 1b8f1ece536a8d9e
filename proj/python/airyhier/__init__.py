"""Higher-order finite-temperature Airy kernels.

Fredholm determinants of the higher-order finite-temperature Airy kernel,
the integro-differential Painleve II hierarchy that represents them, and
the mKdV scaling reduction. Thin wrapper over the C++ core module.
"""

from ._airyhier import (
    ai,
    ai_deriv,
    det,
    fermi_distribution,
    hierarchy,
    mkdv_residual,
    scaling_exponents,
    selftest,
    tw_representation,
    TwResult,
)

__all__ = [
    "ai",
    "ai_deriv",
    "det",
    "fermi_distribution",
    "hierarchy",
    "mkdv_residual",
    "scaling_exponents",
    "selftest",
    "tw_representation",
    "TwResult",
]
