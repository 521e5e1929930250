"""Sampling discretization toolkit for multivariate trigonometric polynomials.

Deterministic lattice point sets with exact L2 discretization on arbitrary
frequency sets, certified frame-constant analysis, Monte-Carlo verification
of Marcinkiewicz-type Lq discretization on hyperbolic crosses, weighted
subsampling of tight frames, and a frequency-localized wavelet-type basis.
"""

__version__ = "0.1.0"

from .errors import PreconditionError, VerificationError

__all__ = ["PreconditionError", "VerificationError", "__version__"]
