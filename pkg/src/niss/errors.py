"""Exception hierarchy.

Each class carries the CLI exit code it maps to, so the command layer never
has to guess.
"""


class NissError(Exception):
    exit_code = 3


class InvalidSourceError(NissError, ValueError):
    """Source pmf is not a distribution or has a degenerate marginal."""


class ShapeError(NissError, ValueError):
    """Dimensions or alphabet sizes of two objects disagree."""


class RangeError(NissError, ValueError):
    """A scalar argument lies outside its admissible interval."""


class AlphabetError(NissError, ValueError):
    """A truth table holds something other than a symbol of its alphabet."""


class ConstraintError(NissError, ValueError):
    """A real-valued function family violates the relaxation constraints."""


class InfeasibleError(NissError, ValueError):
    """Correlation coordinates are inconsistent with the given marginals."""


class ArgumentError(NissError, ValueError):
    pass


class SizeError(NissError):
    """An enumeration or grid would exceed its configured cap."""

    exit_code = 4
