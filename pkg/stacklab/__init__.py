"""Exact cutting-and-stacking: columns, push-forwards of levels, crescents and product witnesses."""
from .cells import (
    Cell,
    CellSet,
    PointAddress,
    SpacerOrigin,
    ancestor_level,
    apply_T_point,
    difference,
    intersect,
    measure,
    refine,
    translate,
    translate_inverse,
    union,
)
from .errors import StacklabError
from .products import ExponentVector, Rectangle, RectSet, product_measure, product_translate
from .rules import PRESETS, ColumnSchedule, RuleSpec, load_rule, validate_rule

# Registers the encoders of the exact types.
from .utils import serialization  # noqa: F401  isort:skip

__all__ = [
    "Cell",
    "CellSet",
    "PointAddress",
    "SpacerOrigin",
    "ancestor_level",
    "apply_T_point",
    "difference",
    "intersect",
    "measure",
    "refine",
    "translate",
    "translate_inverse",
    "union",
    "StacklabError",
    "ExponentVector",
    "Rectangle",
    "RectSet",
    "product_measure",
    "product_translate",
    "PRESETS",
    "ColumnSchedule",
    "RuleSpec",
    "load_rule",
    "validate_rule",
]
