"""Exception types raised across the package.

Every exception names the contract it enforces; callers that can recover
(e.g. the CLI) catch ``EtcapError`` and map it to an exit code.
"""


class EtcapError(Exception):
    """Base class for all package errors."""


class ConfigError(EtcapError):
    """Invalid experiment configuration; message carries the field path."""


class NotStochastic(EtcapError):
    """A transition-matrix row does not sum to 1 or has entries outside [0, 1]."""


class NotOrdered(EtcapError):
    """Channel state values are not positive and strictly increasing."""


class Reducible(EtcapError):
    """The transition graph is not irreducible."""


class NoConvergence(EtcapError):
    """Iterative stationary-distribution solve failed its tolerance."""


class EmptyTrajectory(EtcapError):
    """Occupancy requested for a zero-length trajectory."""


class BadStateIndex(EtcapError):
    """State index outside [0, m)."""


class BadThreshold(EtcapError):
    """Good-state threshold index outside the valid range."""


class PolicyDisabled(EtcapError):
    """Cancellation operation requested with cancellation disabled."""


class SingularDenominator(EtcapError):
    """Chebyshev term evaluated at its pole."""


class DegenerateGeometry(EtcapError):
    """nu <= pi * s_k^(2/alpha) for some state: d or delta too small for the bounds."""


class MissingNuC(EtcapError):
    """Interference-management bounds need nu_c estimates that were not supplied."""


class NonMonotoneTable(EtcapError):
    """Estimated nu_c(gamma) table breaks monotonicity beyond statistical noise."""


class BracketFailure(EtcapError):
    """Outage constraint still slack at the configured maximum intensity."""
