from .fractions import format_fraction, parse_fraction

__all__ = ["format_fraction", "parse_fraction"]
