"""Exception hierarchy shared by every ppq module."""


class PPQError(Exception):
    """Base class for all ppq errors."""


class KBError(PPQError):
    pass


class KBFormatError(KBError):
    """The knowledge-base document is not well formed."""


class KBValidationError(KBError):
    """The document parsed but violates a knowledge-base invariant."""


class QueryError(PPQError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariableError(QueryError):
    pass


class UnknownValueError(QueryError):
    pass


class BinarySyntaxError(QueryError):
    """Bare or `!` literal syntax used on a variable that is not binary t/f."""


class OracleError(PPQError):
    pass


class InvalidSVQueryError(OracleError):
    pass


class ZeroEvidenceError(OracleError):
    """The conditioning conjunction has zero probability."""


class CapabilityError(OracleError):
    """The oracle was asked something outside its declared capabilities."""


class UndefinedConditionalError(PPQError):
    """P(S1 | S2) requested with P(S2) = 0."""


class InconsistentOracleError(PPQError):
    """Evaluation drifted far outside [0, 1]; the oracle is not a probability model."""
