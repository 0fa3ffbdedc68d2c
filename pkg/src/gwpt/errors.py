"""Exception hierarchy.

Everything raised for bad input derives from :class:`GwptError`; the CLI maps
those to exit code 2 and anything else to exit code 1.
"""

from __future__ import annotations


class GwptError(Exception):
    """Base class for input, format and configuration errors."""


class ParseError(GwptError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class UnknownTagError(GwptError):
    pass


class EmbeddingError(GwptError):
    pass


class OOVError(EmbeddingError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"out-of-vocabulary token {token!r}")


class NSCError(GwptError):
    pass


class BandError(GwptError):
    pass


class PCAError(GwptError):
    pass


class DimensionError(GwptError):
    pass


class ConfigError(GwptError):
    pass


class ArchiveError(GwptError):
    pass


class StageError(GwptError):
    """Wraps an error raised inside a named training stage."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
