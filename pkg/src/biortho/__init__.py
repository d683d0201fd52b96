"""Matrix biorthogonal polynomials from varying three-term recurrences.

Submodules: ``linalg`` (dense kernels), ``coefficients`` (families, scalings,
limits), ``recurrence`` (overflow-safe evaluation), ``spectral`` (block Jacobi
zeros and moments), ``quadrature`` (Gauss rules, partial fractions, discrete
measures), ``markov`` (limit Markov functions), ``asymptotics`` (ratio limits
and identity checks), ``suites`` and ``cli``.
"""
from . import asymptotics, coefficients, linalg, markov, quadrature, recurrence, spectral
from .errors import BiorthoError, ConfigError

__version__ = "0.1.0"

__all__ = [
    "asymptotics",
    "coefficients",
    "linalg",
    "markov",
    "quadrature",
    "recurrence",
    "spectral",
    "BiorthoError",
    "ConfigError",
]
