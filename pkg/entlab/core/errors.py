"""Exception hierarchy for entlab."""

from typing import Optional


class EntlabError(Exception):
    """Base exception for entlab errors."""

    pass


class InputValidationError(EntlabError, ValueError):
    """Raised when inputs violate an operation's preconditions."""

    pass


class DimensionError(InputValidationError):
    """Raised for zero or mismatched dimensions."""

    pass


class ZeroVectorError(InputValidationError):
    """Raised when an operation needs a nonzero vector."""

    pass


class DegenerateInputError(InputValidationError):
    """Raised when an intermediate reduced codeword collapses to zero."""

    pass


class LikelihoodDomainError(InputValidationError):
    """Raised for invalid probabilities or counts in likelihood math."""

    pass


class CausalityError(InputValidationError):
    """Raised when a boost speed reaches the invariant speed."""

    pass


class FormatError(InputValidationError):
    """Base class for malformed input files."""

    def __init__(self, message: str, location: Optional[str] = None):
        super().__init__(f"{message} ({location})" if location else message)
        self.location = location


class KeyFormatError(FormatError):
    """Raised for malformed entanglement key files."""

    pass


class ImageFormatError(FormatError):
    """Raised for malformed or unsupported Netpbm images."""

    pass


class FeatureFileError(FormatError):
    """Raised for malformed feature CSV files."""

    pass
