from .approximation import (
    DoubleApproximation,
    FullnessParams,
    double_approx_fraction,
    fullness,
    place_above_below,
    rect_fullness,
)
from .crescents import (
    CrescentPiece,
    CrescentReport,
    PerLevelReport,
    crescent,
    per_level_bound,
    staircase_sum,
)

__all__ = [
    "DoubleApproximation",
    "FullnessParams",
    "double_approx_fraction",
    "fullness",
    "place_above_below",
    "rect_fullness",
    "CrescentPiece",
    "CrescentReport",
    "PerLevelReport",
    "crescent",
    "per_level_bound",
    "staircase_sum",
]
