"""Products of levels and the product dynamics T^{k_1} x ... x T^{k_r}.

A `RectSet` is stored as a union of boxes, each box being a product of per-coordinate cell sets.
The product of the images of the coordinates stays factored: nothing is expanded into a cross
product of cells unless an intersection asks for it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger as get_logger
from typing import Iterable, Sequence

from stacklab.cells import (
    Cell,
    CellSet,
    CellSetLike,
    as_cellset,
    check_cell,
    intersect,
    measure,
    translate,
)
from stacklab.errors import ArityMismatch, NegativeExponent
from stacklab.rules import RuleLike, as_schedule

logger = get_logger(__name__)


@dataclass(frozen=True)
class Rectangle:
    """A product of r levels."""

    factors: tuple[Cell, ...]

    @classmethod
    def of(cls, rule: RuleLike, cells: Iterable[Sequence[int]]) -> Rectangle:
        schedule = as_schedule(rule)
        factors = tuple(check_cell(schedule, Cell(*c)) for c in cells)
        if not factors:
            raise ArityMismatch("a rectangle needs at least one factor")
        return cls(factors)

    @property
    def arity(self) -> int:
        return len(self.factors)

    def measure(self, rule: RuleLike) -> Fraction:
        schedule = as_schedule(rule)
        result = Fraction(1)
        for cell in self.factors:
            result *= schedule.level_width(cell.stage)
        return result

    def as_box(self) -> Box:
        return Box(tuple(CellSet((cell,)) for cell in self.factors))


@dataclass(frozen=True)
class Box:
    """A product of r cell sets."""

    factors: tuple[CellSet, ...]

    @property
    def arity(self) -> int:
        return len(self.factors)

    def is_empty(self) -> bool:
        return any(not f for f in self.factors)

    def measure(self, rule: RuleLike) -> Fraction:
        result = Fraction(1)
        for factor in self.factors:
            result *= measure(rule, factor)
        return result


@dataclass(frozen=True)
class RectSet:
    """A finite union of pairwise disjoint boxes, all with the same arity."""

    arity: int
    boxes: tuple[Box, ...] = ()

    @classmethod
    def of(cls, boxes: Iterable[Box], arity: int | None = None) -> RectSet:
        boxes = [b for b in boxes]
        arities = {b.arity for b in boxes}
        if arity is not None:
            arities.add(arity)
        if len(arities) != 1:
            raise ArityMismatch(f"boxes with different arities: {sorted(arities)}")
        kept = sorted((b for b in boxes if not b.is_empty()), key=_box_key)
        return cls(arities.pop(), tuple(kept))

    @classmethod
    def from_rectangles(
        cls, rule: RuleLike, rectangles: Iterable[Rectangle | Iterable[Sequence[int]]]
    ) -> RectSet:
        """Builds a RectSet from rectangles of levels, which must be pairwise disjoint."""
        rects = [r if isinstance(r, Rectangle) else Rectangle.of(rule, r) for r in rectangles]
        if not rects:
            raise ArityMismatch("can't infer the arity of an empty list of rectangles")
        result = cls.of((r.as_box() for r in rects))
        for a, b in itertools.combinations(result.boxes, 2):
            if not _box_intersection(rule, a, b).is_empty():
                raise ValueError(f"overlapping rectangles: {a} and {b}")
        return result

    @classmethod
    def from_cellsets(cls, rule: RuleLike, factors: Sequence[CellSetLike]) -> RectSet:
        """A single box from per-coordinate cell sets."""
        return cls.of([Box(tuple(as_cellset(rule, f) for f in factors))])

    def __iter__(self):
        return iter(self.boxes)

    def __len__(self) -> int:
        return len(self.boxes)

    def __bool__(self) -> bool:
        return bool(self.boxes)


def _box_key(box: Box) -> tuple:
    return tuple(f.cells for f in box.factors)


def _box_intersection(rule: RuleLike, a: Box, b: Box) -> Box:
    factors = []
    for fa, fb in zip(a.factors, b.factors):
        factor = intersect(rule, fa, fb)
        if not factor:
            return Box(tuple(CellSet.empty() for _ in a.factors))
        factors.append(factor)
    return Box(tuple(factors))


@dataclass(frozen=True)
class ExponentVector:
    k: tuple[int, ...]

    def __post_init__(self):
        if not self.k:
            raise ValueError("an exponent vector needs at least one entry")
        for i, k_i in enumerate(self.k):
            if not isinstance(k_i, int) or isinstance(k_i, bool) or k_i == 0:
                raise ValueError(f"exponents must be nonzero integers, got k[{i}]={k_i!r}")

    @classmethod
    def of(cls, values: Iterable[int] | ExponentVector) -> ExponentVector:
        if isinstance(values, ExponentVector):
            return values
        return cls(tuple(values))

    @property
    def arity(self) -> int:
        return len(self.k)

    def __iter__(self):
        return iter(self.k)

    def __getitem__(self, i: int) -> int:
        return self.k[i]


def _check_arity(*arities: int) -> None:
    if len(set(arities)) != 1:
        raise ArityMismatch(f"arities don't match: {arities}")


def product_translate(rule: RuleLike, s: RectSet, k: Sequence[int] | ExponentVector, H: int) -> RectSet:
    """Applies (T^{k_1} x ... x T^{k_r})^H. Every k_i must be positive."""
    schedule = as_schedule(rule)
    k = ExponentVector.of(k)
    _check_arity(s.arity, k.arity)
    if H < 0:
        raise ValueError(f"expected H >= 0, got {H}")
    negative = [i for i, k_i in enumerate(k) if k_i < 0]
    if negative:
        raise NegativeExponent(
            f"coordinates {negative} have negative exponents, use the adjoint form instead"
        )
    images: dict[tuple[int, CellSet], CellSet] = {}
    boxes = []
    for box in s:
        factors = []
        for k_i, factor in zip(k, box.factors):
            key = (k_i, factor)
            if key not in images:
                images[key] = translate(schedule, factor, k_i * H)
            factors.append(images[key])
        boxes.append(Box(tuple(factors)))
    logger.debug(f"Pushed {len(boxes)} boxes by k={list(k)}, H={H}")
    return RectSet.of(boxes, arity=s.arity)


def product_measure(rule: RuleLike, s: RectSet) -> Fraction:
    return sum((box.measure(rule) for box in s), Fraction(0))


def rect_intersect(rule: RuleLike, a: RectSet, b: RectSet) -> RectSet:
    _check_arity(a.arity, b.arity)
    boxes = [_box_intersection(rule, box_a, box_b) for box_a in a for box_b in b]
    return RectSet.of(boxes, arity=a.arity)


def coordinate_overlap(rule: RuleLike, I: CellSetLike, J: CellSetLike, k: int, H: int) -> Fraction:
    """mu(T^{kH} I & J). A negative k is handled with mu(T^{-|k|H} I & J) = mu(I & T^{|k|H} J)."""
    schedule = as_schedule(rule)
    I = as_cellset(schedule, I)
    J = as_cellset(schedule, J)
    if k >= 0:
        return measure(schedule, intersect(schedule, translate(schedule, I, k * H), J))
    return measure(schedule, intersect(schedule, I, translate(schedule, J, -k * H)))


def product_overlap(
    rule: RuleLike, A: RectSet, B: RectSet, k: Sequence[int] | ExponentVector, H: int
) -> Fraction:
    """nu((T^{k_1} x ... x T^{k_r})^H A & B), with negative exponents in adjoint form."""
    schedule = as_schedule(rule)
    k = ExponentVector.of(k)
    _check_arity(A.arity, B.arity, k.arity)
    cache: dict[tuple, Fraction] = {}
    total = Fraction(0)
    for box_a in A:
        for box_b in B:
            term = Fraction(1)
            for k_i, fa, fb in zip(k, box_a.factors, box_b.factors):
                key = (k_i, fa, fb)
                if key not in cache:
                    cache[key] = coordinate_overlap(schedule, fa, fb, k_i, H)
                term *= cache[key]
                if not term:
                    break
            total += term
    return total
