"""Witnesses for the ergodicity of T^{k_1} x ... x T^{k_r}: a power H with nu(T^H A & B) > 0.

`recipe_witness` follows the constructive argument: approximate A and B by rectangles of levels,
place them above/below each other, go to a stage where everything sits far enough below the top,
and take H = h_n + S. `minimal_witness` simply tries H = 1, 2, ... .
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from logging import getLogger as get_logger
from typing import Sequence

from simple_parsing.helpers.serialization.serializable import Serializable

from stacklab.cells import (
    Cell,
    CellSet,
    SpacerOrigin,
    ancestor_level,
    intersection_measure,
    sublevels,
    translate,
)
from stacklab.errors import ArityMismatch, NoRectangleFound
from stacklab.lemmas.approximation import double_approx_fraction, place_above_below, rect_fullness
from stacklab.lemmas.crescents import staircase_sum
from stacklab.products import ExponentVector, Rectangle, RectSet, product_overlap
from stacklab.rules import ColumnSchedule, RuleLike, as_schedule

logger = get_logger(__name__)

APPROXIMATION_THRESHOLD = Fraction(3, 4)
DEFAULT_STAGE_BOUND = 8


@dataclass
class WitnessParams(Serializable):
    K: int
    """ Largest |k_i|. """
    S: int
    """ Largest s_{|k_i|}. """
    d: int
    """ Largest distance between the placed factors I_i and J_i. """
    delta: Fraction
    """ Fullness slack of the double approximation, half of the per-rectangle bound. """
    H: int = 0
    stage: int = 0


@dataclass
class Placement(Serializable):
    coordinate: int
    exponent: int
    I: Cell
    J: Cell
    position: str
    """ "above" if I sits above (or at) J in the column, "below" otherwise. """
    distance: int


@dataclass
class WitnessReport(Serializable):
    exponents: list[int]
    stage: int
    H: int
    params: WitnessParams
    placements: list[Placement] = field(default_factory=list)
    double_approximation: str = "degenerate-DA"
    approximation_fraction: Fraction | None = None
    """ Share of the (1-delta)-full sub-rectangles of I at the chosen stage, when scanned. """
    rectangle_measure: Fraction = Fraction(0)
    """ nu(T^H I' & J') for the placed rectangles. """
    measure: Fraction = Fraction(0)
    """ nu(T^H A & B). """
    bound: Fraction = Fraction(0)
    meets_bound: bool = False
    positive: bool = False

    def __post_init__(self):
        # The verdict always follows the stored exact values.
        self.meets_bound = self.measure >= self.bound
        self.positive = self.measure > 0

    @property
    def passed(self) -> bool:
        return self.meets_bound and self.positive


def _lift(cell: Cell, n: int) -> Cell:
    # Copy 1 always sits at offset 0, so the copy-1 sublevel keeps the index.
    return Cell(n, cell.index)


def _candidate(schedule: ColumnSchedule, cells: CellSet, s: int) -> Cell | None:
    """Best level of C_s to approximate a cell set: the most covered one."""
    coverage: dict[int, Fraction] = {}
    for cell in cells:
        if cell.stage <= s:
            coverage[cell.index] = coverage.get(cell.index, Fraction(0)) + schedule.level_width(s)
            continue
        level = ancestor_level(schedule, cell, s)
        if not isinstance(level, SpacerOrigin):
            coverage[level] = coverage.get(level, Fraction(0)) + schedule.level_width(cell.stage)
    if not coverage:
        return None
    best = max(sorted(coverage), key=coverage.__getitem__)
    return Cell(s, best)


def approximating_rectangle(
    rule: RuleLike,
    A: RectSet,
    threshold: Fraction = APPROXIMATION_THRESHOLD,
    stage_bound: int = DEFAULT_STAGE_BOUND,
) -> Rectangle:
    """Finds a rectangle of levels I with nu(A & I) > threshold * nu(I), searching stage by stage."""
    schedule = as_schedule(rule)
    first = min((c.stage for box in A for f in box.factors for c in f), default=1)
    for s in range(first, stage_bound + 1):
        for box in A:
            factors = []
            for factor in box.factors:
                if factor.max_stage() <= s and len(factor) == 1:
                    factors.append(_lift(factor.cells[0], s))
                    continue
                candidate = _candidate(schedule, factor, s)
                if candidate is None:
                    break
                factors.append(candidate)
            else:
                rect = Rectangle(tuple(factors))
                if rect_fullness(schedule, A, rect) > threshold:
                    logger.debug(f"Approximating rectangle at stage {s}: {rect.factors}")
                    return rect
    raise NoRectangleFound(f"no {threshold}-full rectangle of levels up to stage {stage_bound}")


def _is_single_rectangle(A: RectSet) -> bool:
    return len(A) == 1 and all(len(f) == 1 for f in A.boxes[0].factors)


def _placement_ok(k_i: int, i_cell: Cell, j_cell: Cell) -> bool:
    return i_cell.index >= j_cell.index if k_i > 0 else i_cell.index <= j_cell.index


def recipe_witness(
    rule: RuleLike,
    k: Sequence[int] | ExponentVector,
    A: RectSet,
    B: RectSet,
    stage_bound: int = DEFAULT_STAGE_BOUND,
) -> WitnessReport:
    schedule = as_schedule(rule)
    k = ExponentVector.of(k)
    if not A.arity == B.arity == k.arity:
        raise ArityMismatch(f"arities: A={A.arity}, B={B.arity}, k={k.arity}")
    r = k.arity
    K = max(abs(k_i) for k_i in k)
    S = max(staircase_sum(abs(k_i)) for k_i in k)
    degenerate = _is_single_rectangle(A) and _is_single_rectangle(B)

    I = approximating_rectangle(schedule, A, stage_bound=stage_bound)
    J = approximating_rectangle(schedule, B, stage_bound=stage_bound)
    stage = max(c.stage for c in [*I.factors, *J.factors])
    I_cells = [_lift(c, stage) for c in I.factors]
    J_cells = [_lift(c, stage) for c in J.factors]
    if not all(_placement_ok(k_i, a, b) for k_i, a, b in zip(k, I_cells, J_cells)):
        I_cells, J_cells = place_above_below(schedule, I_cells, J_cells, list(k))
        stage += 1
    distances = [abs(a.index - b.index) for a, b in zip(I_cells, J_cells)]
    d = max(distances)
    per_rectangle = (Fraction(1) / Fraction(8) ** (K + d + K * S)) ** r
    params = WitnessParams(K=K, S=S, d=d, delta=per_rectangle / 2)

    def far_from_top(n: int, cells: Sequence[Cell]) -> bool:
        return all(schedule.height(n) - 1 - c.index > S * K for c in cells)

    fraction: Fraction | None = None
    if degenerate:
        n = stage
        while not far_from_top(n, [*I_cells, *J_cells]):
            n += 1
        I_prime = [_lift(c, n) for c in I_cells]
        J_prime = [_lift(c, n) for c in J_cells]
    else:
        n, I_prime, J_prime, fraction = _double_approximation(
            schedule, A, B, I_cells, J_cells, params.delta, stage, stage_bound, far_from_top
        )

    H = schedule.height(n) + S
    params.H = H
    params.stage = n
    I_rect = RectSet.from_rectangles(schedule, [I_prime])
    J_rect = RectSet.from_rectangles(schedule, [J_prime])
    rect_measure = product_overlap(schedule, I_rect, J_rect, k, H)
    total = product_overlap(schedule, A, B, k, H)
    bound = per_rectangle * Rectangle(tuple(I_prime)).measure(schedule)
    placements = [
        Placement(
            coordinate=i,
            exponent=k_i,
            I=a,
            J=b,
            position="above" if a.index >= b.index else "below",
            distance=abs(a.index - b.index),
        )
        for i, (k_i, a, b) in enumerate(zip(k, I_prime, J_prime))
    ]
    report = WitnessReport(
        exponents=list(k),
        stage=n,
        H=H,
        params=params,
        placements=placements,
        double_approximation="degenerate-DA" if degenerate else "scanned",
        approximation_fraction=fraction,
        rectangle_measure=rect_measure,
        measure=total,
        bound=bound,
    )
    logger.info(
        f"Witness for k={list(k)}: n={n}, H={H}, measure {total} vs bound {bound} "
        f"({'pass' if report.passed else 'FAIL'})."
    )
    return report


def _double_approximation(
    schedule: ColumnSchedule,
    A: RectSet,
    B: RectSet,
    I_cells: list[Cell],
    J_cells: list[Cell],
    delta: Fraction,
    stage: int,
    stage_bound: int,
    far_from_top,
) -> tuple[int, list[Cell], list[Cell], Fraction]:
    """Finds sub-rectangles I_v, J_v in the same C_stage-copies that are both (1-delta)-full."""
    for n in range(stage + 1, stage_bound + 1):
        I_subs = [sublevels(schedule, c, n) for c in I_cells]
        J_subs = [sublevels(schedule, c, n) for c in J_cells]
        for v in itertools.product(*(range(len(subs)) for subs in I_subs)):
            I_v = [Cell(n, subs[v_m]) for subs, v_m in zip(I_subs, v)]
            J_v = [Cell(n, subs[v_m]) for subs, v_m in zip(J_subs, v)]
            if not far_from_top(n, [*I_v, *J_v]):
                continue
            if rect_fullness(schedule, A, I_v) > 1 - delta and rect_fullness(schedule, B, J_v) > 1 - delta:
                fraction = double_approx_fraction(schedule, A, I_cells, n, delta).fraction
                return n, I_v, J_v, fraction
    raise NoRectangleFound(
        f"no pair of (1-{delta})-full sub-rectangles up to stage {stage_bound}"
    )


@dataclass
class MinimalWitness(Serializable):
    exponents: list[int]
    h_max: int
    H: int | None = None
    measure: Fraction = Fraction(0)

    @property
    def passed(self) -> bool:
        return self.H is not None


def minimal_witness(
    rule: RuleLike,
    k: Sequence[int] | ExponentVector,
    I: Rectangle | Sequence[Cell],
    J: Rectangle | Sequence[Cell],
    h_max: int,
) -> MinimalWitness:
    """Smallest H in [1, h_max] with nu((T^{k_1} x ... x T^{k_r})^H I & J) > 0."""
    schedule = as_schedule(rule)
    k = ExponentVector.of(k)
    I = I if isinstance(I, Rectangle) else Rectangle.of(schedule, I)
    J = J if isinstance(J, Rectangle) else Rectangle.of(schedule, J)
    if not I.arity == J.arity == k.arity:
        raise ArityMismatch(f"arities: I={I.arity}, J={J.arity}, k={k.arity}")
    result = MinimalWitness(exponents=list(k), h_max=h_max)
    # For a negative exponent the moving side is J (adjoint form), otherwise it's I.
    moving = [CellSet(((a if k_i > 0 else b),)) for k_i, a, b in zip(k, I.factors, J.factors)]
    fixed = [CellSet(((b if k_i > 0 else a),)) for k_i, a, b in zip(k, I.factors, J.factors)]
    for H in range(1, h_max + 1):
        moving = [translate(schedule, s, abs(k_i)) for k_i, s in zip(k, moving)]
        total = Fraction(1)
        for s, target in zip(moving, fixed):
            total *= intersection_measure(schedule, s, target)
            if not total:
                break
        if total:
            result.H = H
            result.measure = total
            logger.debug(f"Minimal witness for k={list(k)}: H={H}, measure {total}.")
            break
    return result
