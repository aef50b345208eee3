"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed input file; carries the path and 1-based line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class IndexFormatError(Exception):
    """Base class for index-file persistence failures."""


class BadMagicError(IndexFormatError):
    """File does not start with the expected magic bytes."""


class FormatVersionError(IndexFormatError):
    """File carries an unsupported format version."""


class TruncatedFileError(IndexFormatError):
    """File ends before the declared payload is complete."""


class InfeasibleConfigError(Exception):
    """Vector-unit configuration cannot execute the requested workload."""
