"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line:
1 for usage/parse problems, 2 for domain rejections, 3 for internal
contradictions.
"""


class SuperfairError(Exception):
    exit_code = 2


class ParseError(SuperfairError):
    exit_code = 1


class Malformed(ParseError):
    pass


class NotNonNegative(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


class DegenerateSelection(SuperfairError):
    pass


class SupportMismatch(SuperfairError):
    pass


class ZeroVector(SuperfairError):
    pass


class NotPositive(SuperfairError):
    pass


class NotSuperfair(SuperfairError):
    pass


class NotInBscc(SuperfairError):
    pass


class NotPseudoMixing(SuperfairError):
    pass


class InvalidAutomaton(SuperfairError):
    pass


class StarViolated(SuperfairError):
    pass


class DegenerateLiveCone(SuperfairError):
    pass


class SequenceTooShort(SuperfairError):
    pass


class UnsupportedBase(SuperfairError):
    pass


class NoSignal(SuperfairError):
    pass


class InternalContradiction(SuperfairError):
    exit_code = 3


class NumericalFailure(SuperfairError):
    exit_code = 3
