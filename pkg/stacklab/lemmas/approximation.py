"""Fullness, the above/below placement of rectangles, and the double-approximation scan."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import singledispatch
from logging import getLogger as get_logger
from typing import Any, Sequence

from simple_parsing.helpers.serialization.serializable import FrozenSerializable, Serializable

from stacklab.cells import (
    Cell,
    CellSet,
    CellSetLike,
    as_cellset,
    intersect,
    measure,
    sublevels,
)
from stacklab.errors import ArityMismatch, EmptyTarget, StageOrder
from stacklab.products import RectSet, Rectangle
from stacklab.rules import RuleLike, as_schedule

logger = get_logger(__name__)


@dataclass(frozen=True)
class FullnessParams(FrozenSerializable):
    epsilon: Fraction = Fraction(1, 4)
    delta: Fraction = Fraction(1, 2)
    tau: Fraction = Fraction(50)
    """ A percentage. """

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must be in (0, 1), got {value}")
        if not 0 < self.tau < 100 * (1 - self.epsilon):
            raise ValueError(
                f"tau must be in (0, {100 * (1 - self.epsilon)}) for epsilon={self.epsilon}, "
                f"got {self.tau}"
            )


def fullness(rule: RuleLike, A: CellSetLike | RectSet, I: Any) -> Fraction:
    """How full `I` is of `A`: the share of I's measure covered by A.

    `A` is either a cell set (and `I` a cell set or a cell) or a set of rectangles (and `I` a
    rectangle).
    """
    return _fullness(A, rule, I)


@singledispatch
def _fullness(A: Any, rule: RuleLike, I: Any) -> Fraction:
    # Plain lists of cells are treated as cell sets.
    return _cellset_fullness(as_cellset(rule, A), rule, I)


@_fullness.register(CellSet)
def _cellset_fullness(A: CellSet, rule: RuleLike, I: CellSetLike) -> Fraction:
    schedule = as_schedule(rule)
    I = as_cellset(schedule, I if not isinstance(I, Cell) else [I])
    total = measure(schedule, I)
    if total == 0:
        raise EmptyTarget("fullness relative to an empty set")
    return measure(schedule, intersect(schedule, A, I)) / total


@_fullness.register(RectSet)
def _rectset_fullness(A: RectSet, rule: RuleLike, I: Rectangle | Sequence[Cell]) -> Fraction:
    schedule = as_schedule(rule)
    rect = I if isinstance(I, Rectangle) else Rectangle.of(schedule, I)
    if A.arity != rect.arity:
        raise ArityMismatch(f"set of arity {A.arity} vs rectangle of arity {rect.arity}")
    total = rect.measure(schedule)
    if total == 0:
        raise EmptyTarget("fullness relative to an empty rectangle")
    covered = Fraction(0)
    for box in A:
        term = Fraction(1)
        for factor, cell in zip(box.factors, rect.factors):
            term *= measure(schedule, intersect(schedule, factor, CellSet((cell,))))
            if not term:
                break
        covered += term
    return covered / total


def rect_fullness(rule: RuleLike, A: RectSet, I: Rectangle | Sequence[Cell]) -> Fraction:
    return _fullness(A, rule, I)


def place_above_below(
    rule: RuleLike,
    Iprime: Sequence[Cell],
    Jprime: Sequence[Cell],
    signs: Sequence[int],
) -> tuple[list[Cell], list[Cell]]:
    """Places each I'_m above (sign > 0) or below (sign < 0) J'_m in the next column.

    Above means I_m is the copy of I'_m in the top subcolumn and J_m the copy of J'_m in the bottom
    one, so that I_m sits higher than J_m in the column. Below is the mirror image.
    """
    schedule = as_schedule(rule)
    if not len(Iprime) == len(Jprime) == len(signs):
        raise ArityMismatch(f"got {len(Iprime)}, {len(Jprime)} and {len(signs)} entries")
    stages = {c.stage for c in [*Iprime, *Jprime]}
    if len(stages) != 1:
        raise StageOrder(f"all the cells must be at the same stage, got stages {sorted(stages)}")
    stage = stages.pop()
    offsets = schedule.layout(stage).copy_offsets
    bottom, top = offsets[0], offsets[-1]
    I_out, J_out = [], []
    for i_cell, j_cell, sign in zip(Iprime, Jprime, signs):
        if sign == 0:
            raise ValueError("signs must be nonzero")
        i_offset, j_offset = (top, bottom) if sign > 0 else (bottom, top)
        I_out.append(Cell(stage + 1, i_offset + i_cell.index))
        J_out.append(Cell(stage + 1, j_offset + j_cell.index))
    return I_out, J_out


@dataclass
class DoubleApproximation(Serializable):
    fraction: Fraction
    full: int
    total: int
    stage: int
    delta: Fraction
    tau: Fraction | None = None
    """ Percentage the fraction is compared against, if any. """

    @property
    def passed(self) -> bool:
        return self.tau is None or 100 * self.fraction > self.tau


def sub_rectangles(rule: RuleLike, I: Sequence[Cell], n: int) -> list[list[int]]:
    """Per coordinate, the stage-n sublevels of I_m, ordered by the C_k-copy they sit in."""
    schedule = as_schedule(rule)
    for cell in I:
        if n <= cell.stage:
            raise StageOrder(f"expected a stage after {cell.stage}, got {n}")
    return [sublevels(schedule, cell, n) for cell in I]


def double_approx_fraction(
    rule: RuleLike,
    A: RectSet,
    I: Sequence[Cell],
    n: int,
    delta: Fraction,
    tau: Fraction | None = None,
) -> DoubleApproximation:
    """Share of the stage-n sub-rectangles I_v of I that are (1 - delta)-full of A.

    All the I_v have the same measure, so the share by count and by measure are the same.
    """
    schedule = as_schedule(rule)
    I = [Cell(*c) for c in I]
    if A.arity != len(I):
        raise ArityMismatch(f"set of arity {A.arity} vs rectangle of arity {len(I)}")
    delta = Fraction(delta)
    subs = sub_rectangles(schedule, I, n)
    width = schedule.level_width(n)
    # overlaps[b][m][v_m] = mu(A_b,m & I_v,m)
    overlaps = [
        [
            [measure(schedule, intersect(schedule, factor, CellSet((Cell(n, j),)))) for j in sub]
            for factor, sub in zip(box.factors, subs)
        ]
        for box in A
    ]
    threshold = (1 - delta) * width ** len(I)
    full = 0
    total = 0
    for v in itertools.product(*(range(len(sub)) for sub in subs)):
        total += 1
        covered = Fraction(0)
        for per_box in overlaps:
            term = Fraction(1)
            for m, v_m in enumerate(v):
                term *= per_box[m][v_m]
            covered += term
        if covered > threshold:
            full += 1
    logger.debug(f"{full}/{total} sub-rectangles at stage {n} are (1-{delta})-full.")
    return DoubleApproximation(
        fraction=Fraction(full, total), full=full, total=total, stage=n, delta=delta, tau=tau
    )
