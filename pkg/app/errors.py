"""
Exception hierarchy for the elastica knot library.
"""


class ElasticaError(Exception):
    """Base class for every error raised by the library."""


class DomainError(ElasticaError, ValueError):
    """An argument lies outside the chart or modulus range of an operation."""


class PoleAtOne(DomainError):
    """K(p) evaluated at its logarithmic pole p = 1."""


class DegenerateRoots(DomainError):
    """The cubic roots collapse and no lattice can be built."""


class NoRealBoundary(DomainError):
    """The q0 boundary discriminant is negative."""


class NoSolutionInStrip(DomainError):
    """The requested value of the Weierstrass function is not attained on the strip."""


class TargetOutOfRange(DomainError):
    """A closure or functional target is not attained on the requested branch."""


class Unbounded(DomainError):
    """A quantity diverges at the requested modulus (the normalized radius at m = 0)."""


class PoleError(ElasticaError, ArithmeticError):
    """A Weierstrass function was evaluated at (or next to) a lattice point."""


class BranchError(ElasticaError, ArithmeticError):
    """A logarithm branch could not be followed continuously."""


class FrameDegenerate(ElasticaError):
    """The cylindrical frame degenerates because gamma reaches 1."""


class ClosureError(ElasticaError):
    """Base class for closure failures."""


class ClosureViolated(ClosureError):
    """q0 differs from Q0(m) where vertical closure is required."""


class NonPeriodic(ClosureError):
    """Delta theta hits -p*pi/q but l = 2q/p is not an integer.

    The solved modulus is kept on the exception so callers can still report it.
    """

    def __init__(self, message: str, m: float, p: int, q: int):
        super().__init__(message)
        self.m = m
        self.p = p
        self.q = q
