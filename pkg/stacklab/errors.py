"""Exceptions raised by stacklab.

Every error derives from `StacklabError` and from the closest builtin exception, so callers can
catch either one.
"""
from __future__ import annotations


class StacklabError(Exception):
    """Base class for all the errors raised by this package."""


class InvalidRule(StacklabError, ValueError):
    """A cutting-and-stacking rule violates one of its constraints."""

    def __init__(self, constraint: str, message: str = ""):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}" if message else constraint)


class OrbitBottom(StacklabError, ArithmeticError):
    """The backward orbit of the leftmost bottom point is undefined."""


class NegativeExponent(StacklabError, ValueError):
    """A forward-only push-forward was asked to apply a negative power."""


class ArityMismatch(StacklabError, ValueError):
    """Two rectangle sets (or a set and an exponent vector) have different arities."""


class EmptyTarget(StacklabError, ZeroDivisionError):
    """Fullness was requested relative to a set of measure zero."""


class StageOrder(StacklabError, ValueError):
    """Two stages were given in the wrong order."""


class DepthExceeded(StacklabError, RuntimeError):
    """A push-forward could not be resolved within the allowed refinement depth."""

    def __init__(self, message: str, tail=None):
        self.tail = tail
        super().__init__(message)


class TooLarge(StacklabError, MemoryError):
    """A table would hold more levels than we are willing to allocate."""


class LeftColumn(StacklabError, LookupError):
    """An oracle orbit left the column it was built on."""


class NoRectangleFound(StacklabError, LookupError):
    """No rectangle of levels is full enough of a set at the allowed stages."""


class ParseError(StacklabError, ValueError):
    """An experiment config could not be parsed."""

    def __init__(self, message: str, location: str = "$"):
        self.location = location
        super().__init__(f"{location}: {message}")


class TooTall(StacklabError, ValueError):
    """A column has too many levels to be rendered."""
