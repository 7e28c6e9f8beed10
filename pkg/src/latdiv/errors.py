"""Exception hierarchy.

Every error raised by the library derives from :class:`LatdivError`. The CLI maps
the three broad families onto exit codes: :class:`ParseError` (2),
:class:`ValidationError` (3) and :class:`CheckFailure` (4).
"""

from __future__ import annotations


class LatdivError(Exception):
    pass


class ParseError(LatdivError):
    """Input document could not be read against its schema."""


class ValidationError(LatdivError):
    """Input parsed but violates a structural precondition."""


class CheckFailure(LatdivError):
    """A requested inequality or identity check did not hold."""


# lattice core
class NotAPartialOrder(ValidationError):
    pass


class NotALattice(ValidationError):
    pass


class UnknownElement(ValidationError, KeyError):
    pass


class NotDistributive(ValidationError):
    pass


class NotMaximalChain(ValidationError):
    pass


# formal contexts, entropy
class UnknownIdentifier(ValidationError, KeyError):
    pass


class UnknownVariable(ValidationError, KeyError):
    pass


class TooManyVariables(ValidationError):
    pass


# valuations
class MissingValue(ValidationError, KeyError):
    pass


class InvalidValuation(ValidationError):
    def __init__(self, message: str, violation=None):
        super().__init__(message)
        self.violation = violation


class NotSuperModular(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


# measures
class GroundSetMismatch(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class NotARefinement(ValidationError):
    pass


class DominationFailure(ValidationError):
    pass


class ConstraintViolation(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


# counterexample
class NotDecreasing(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class QuadratureFailure(CheckFailure):
    pass
