"""Exception hierarchy shared by every module."""


class SelmerStabError(Exception):
    """Base class; ``kind`` is the short tag used in structured CLI errors."""

    kind = "error"


class InvalidInputError(SelmerStabError, ValueError):
    kind = "invalid-input"


class PreconditionError(SelmerStabError, ValueError):
    kind = "precondition"


class ResourceLimitError(SelmerStabError):
    kind = "resource"

    def __init__(self, message, *, predicted=None, partial=None):
        super().__init__(message)
        self.predicted = predicted
        self.partial = partial


class DegenerateTwistError(SelmerStabError):
    kind = "degenerate-twist"


class SpecConsistencyError(SelmerStabError, ValueError):
    kind = "inconsistent-spec"


class LawViolationError(SelmerStabError, AssertionError):
    """An identity that must hold exactly (cardinality law, dual-method agreement) failed."""

    kind = "law-violation"
