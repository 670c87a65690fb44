"""Exception and warning types shared across the package."""


class CircleRankError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDocument(CircleRankError):
    """Raised when a text normalizes to zero tokens."""


class EmptyCorpus(CircleRankError):
    """Raised when a corpus-level operation receives no documents."""


class UnknownTerm(CircleRankError):
    """Raised when a term is missing from the vocabulary."""


class ParseError(CircleRankError):
    """Raised on a malformed input line; carries the 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class EmptySequence(CircleRankError):
    """Raised when a matrix builder is asked for a zero-length sequence."""


class NegativeWeight(CircleRankError):
    """Raised when a weight that must be non-negative is not."""


class DimensionMismatch(CircleRankError):
    """Raised when array shapes are incompatible."""


class EmptyCircle(CircleRankError):
    """Raised when a circle has no member tokens."""


class ConfigError(CircleRankError):
    """Raised on an invalid or unknown configuration entry."""


class NonFiniteLoss(CircleRankError):
    """Raised when training produces a NaN or infinite loss."""


class BudgetUnreachableWarning(UserWarning):
    """Emitted when no scale divisor can make the expected edge count
    reach the sparsity budget (too much probability mass clamps at 1)."""
