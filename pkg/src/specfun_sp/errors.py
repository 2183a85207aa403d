"""Exception taxonomy shared by all modules.

Numeric failures (a computation could not be carried out) are kept separate
from invariant violations (a computation finished but a certified bound does
not hold); the CLI maps the two groups to distinct exit codes.
"""


class SpecfunError(Exception):
    """Base class for all package errors."""


# --- numeric failures -------------------------------------------------------

class NonFiniteEntry(SpecfunError):
    """A matrix or vector contains NaN or infinite entries."""


class NonFiniteValue(SpecfunError):
    """A scalar function produced a non-finite value on the spectrum."""


class NoConvergence(SpecfunError):
    """An iterative eigensolve did not reach tolerance within its budget."""


class InvalidExponent(SpecfunError):
    """Schatten exponent outside [1, inf]."""


class NotPositiveDefinite(SpecfunError):
    """Cholesky factorisation hit a nonpositive pivot."""


class DimensionMismatch(SpecfunError):
    """Two operators do not act on the same space."""


class ShapeMismatch(SpecfunError):
    """A coefficient or nodal vector does not conform to the mesh."""


class LowerBoundViolated(SpecfunError):
    """An operator has spectrum below the declared lower bound."""


class NoPoincare(SpecfunError):
    """Poincare constant requested on a space without Dirichlet nodes."""


class ShiftInsideSpectrum(SpecfunError):
    """Resolvent shift does not clear the bottom of the spectrum."""


class BracketFailure(SpecfunError):
    """Fermi-level bracketing exceeded its expansion budget."""


class RadiusTooSmall(SpecfunError):
    """Ball radius below the self-mapping threshold of the iteration."""


class NonContraction(SpecfunError):
    """Observed iteration behaviour incompatible with the declared constants."""


class MaxIterExceeded(SpecfunError):
    """Fixed-point iteration ran out of iterations before reaching tolerance."""


# --- invariant violations ---------------------------------------------------

class BoundViolated(SpecfunError):
    """A certified inequality failed on a concrete probe."""


# --- configuration / IO -----------------------------------------------------

class ConfigError(SpecfunError):
    """Malformed run configuration."""


class MissingFile(ConfigError):
    """A file referenced by the configuration does not exist."""


class CountMismatch(SpecfunError):
    """Loaded nodal values do not match the free-node count."""
