"""Exception types shared across the package."""


class LexembedError(Exception):
    """Base class for all errors raised by this package."""


class EmptyVocabularyError(LexembedError):
    """No token survived the frequency threshold."""


class FormatError(LexembedError):
    """A file does not conform to its declared format."""


class TruncatedRecordError(FormatError):
    """A binary file ended mid-record or is shorter than its header claims."""


class ParseError(LexembedError):
    """A text file line could not be parsed; carries the line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class TrainingDivergedError(LexembedError):
    """A non-finite value appeared in the parameters or objective."""


class ZeroVectorError(LexembedError):
    """Cosine similarity requested for a zero vector."""


class InsufficientCoverageError(LexembedError):
    """Too few benchmark items had all words in the vocabulary."""
