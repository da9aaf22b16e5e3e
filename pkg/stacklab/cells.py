"""Exact symbolic levels (cells) and their push-forwards under powers of T.

A cell `(n, j)` is the level T^j B_n of the column C_n. Cells of later stages are sublevels of
cells of earlier stages through the copy offsets of the layouts, which is all we need to do exact
set algebra and exact push-forwards without ever choosing coordinates on the line.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger as get_logger
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

from stacklab.errors import NegativeExponent, OrbitBottom, StageOrder
from stacklab.rules import ColumnSchedule, RuleLike, SegmentKind, as_schedule

logger = get_logger(__name__)


class Cell(NamedTuple):
    stage: int
    index: int


class SpacerOrigin(NamedTuple):
    """Marks a cell that lies inside a spacer created when building C_{stage}."""

    stage: int


class PointAddress(NamedTuple):
    """A point of X: a level of C_stage and a position inside it, as a fraction of its width."""

    stage: int
    index: int
    offset: Fraction = Fraction(0)


def check_cell(schedule: ColumnSchedule, cell: Cell) -> Cell:
    n, j = cell
    if n < 1:
        raise StageOrder(f"stages start at 1, got {cell}")
    if not 0 <= j < schedule.height(n):
        raise IndexError(f"{cell} is outside of C_{n} (height {schedule.height(n)})")
    return Cell(n, j)


@dataclass(frozen=True)
class CellSet:
    """A finite union of pairwise disjoint cells in canonical form.

    Canonical means: no cell covers another, no complete group of siblings that could be merged into
    their parent, sorted by (stage, index). Two CellSets are equal as sets of points iff their
    canonical forms are equal. Use `CellSet.build` to canonicalize arbitrary cells; the constructor
    trusts its input.
    """

    cells: tuple[Cell, ...] = ()

    @classmethod
    def build(cls, rule: RuleLike, cells: Iterable[Sequence[int]], disjoint: bool = False) -> CellSet:
        schedule = as_schedule(rule)
        checked = [check_cell(schedule, Cell(*c)) for c in cells]
        return canonicalize(schedule, checked, disjoint=disjoint)

    @classmethod
    def empty(cls) -> CellSet:
        return cls(())

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __bool__(self) -> bool:
        return bool(self.cells)

    def __contains__(self, cell: object) -> bool:
        return cell in self.cells

    def max_stage(self) -> int:
        return max((c.stage for c in self.cells), default=0)


CellSetLike = Union[CellSet, Iterable[Sequence[int]]]


def as_cellset(rule: RuleLike, s: CellSetLike) -> CellSet:
    if isinstance(s, CellSet):
        return s
    return CellSet.build(rule, s)


def refine(rule: RuleLike, cell: Cell) -> list[Cell]:
    """The c sublevels of `cell` in the next column, one per copy, bottom to top."""
    schedule = as_schedule(rule)
    n, j = cell
    return [Cell(n + 1, offset + j) for offset in schedule.layout(n).copy_offsets]


def ancestor_level(rule: RuleLike, cell: Cell, n: int) -> int | SpacerOrigin:
    """The level of C_n containing `cell`, or the stage whose spacers contain it."""
    schedule = as_schedule(rule)
    if n > cell.stage:
        raise StageOrder(f"can't take the stage-{n} ancestor of {cell}")
    stage, index = cell
    while stage > n:
        location = schedule.layout(stage - 1).locate(index)
        if location.kind is not SegmentKind.COPY:
            return SpacerOrigin(stage)
        index = location.offset
        stage -= 1
    return index


def descendants(rule: RuleLike, cell: Cell, n: int) -> list[int]:
    """Indices of the stage-n sublevels of `cell`, in copy order (copy 1 first)."""
    schedule = as_schedule(rule)
    if n < cell.stage:
        raise StageOrder(f"can't refine {cell} down to the earlier stage {n}")
    indices = [cell.index]
    for stage in range(cell.stage, n):
        offsets = schedule.layout(stage).copy_offsets
        indices = [offset + j for j in indices for offset in offsets]
    return indices


def sublevels(rule: RuleLike, cell: Cell, n: int) -> list[int]:
    """Indices of the stage-n sublevels of `cell`, sorted."""
    return sorted(descendants(rule, cell, n))


def is_covered(schedule: ColumnSchedule, cell: Cell, others: set[Cell], min_stage: int) -> bool:
    """Whether `cell` or one of its ancestors is in `others`."""
    stage, index = cell
    while True:
        if (stage, index) in others:
            return True
        if stage <= min_stage:
            return False
        location = schedule.layout(stage - 1).locate(index)
        if location.kind is not SegmentKind.COPY:
            return False
        index = location.offset
        stage -= 1


def _ancestor_chain(schedule: ColumnSchedule, cell: Cell, down_to: int) -> dict[int, int]:
    chain = {cell.stage: cell.index}
    stage, index = cell
    while stage > down_to:
        location = schedule.layout(stage - 1).locate(index)
        if location.kind is not SegmentKind.COPY:
            break
        index = location.offset
        stage -= 1
        chain[stage] = index
    return chain


def canonicalize(rule: RuleLike, cells: Iterable[Cell], disjoint: bool = False) -> CellSet:
    """Puts a collection of cells in canonical form.

    With `disjoint=False` the cells may overlap (a cell and one of its sublevels), and the covered
    ones are removed first. Pass `disjoint=True` when the cells are known to be pairwise disjoint
    (e.g. the pieces of a push-forward) to skip that check.
    """
    schedule = as_schedule(rule)
    unique = set(cells)
    if not unique:
        return CellSet.empty()
    if not disjoint:
        min_stage = min(c.stage for c in unique)
        kept = set()
        for cell in unique:
            location = (
                None
                if cell.stage <= min_stage
                else schedule.layout(cell.stage - 1).locate(cell.index)
            )
            if location is None or location.kind is not SegmentKind.COPY:
                kept.add(cell)
                continue
            if not is_covered(schedule, Cell(cell.stage - 1, location.offset), unique, min_stage):
                kept.add(cell)
        unique = kept

    by_stage: dict[int, set[int]] = {}
    for stage, index in unique:
        by_stage.setdefault(stage, set()).add(index)
    cuts = schedule.cuts
    for stage in range(max(by_stage), 1, -1):
        indices = by_stage.get(stage)
        if not indices or len(indices) < cuts:
            continue
        lay = schedule.layout(stage - 1)
        siblings: dict[int, list[int]] = {}
        for index in indices:
            location = lay.locate(index)
            if location.kind is SegmentKind.COPY:
                siblings.setdefault(location.offset, []).append(index)
        for parent_index, children in siblings.items():
            if len(children) == cuts:
                indices.difference_update(children)
                by_stage.setdefault(stage - 1, set()).add(parent_index)
    return CellSet(
        tuple(sorted(Cell(stage, j) for stage, indices in by_stage.items() for j in indices))
    )


def measure(rule: RuleLike, s: CellSetLike) -> Fraction:
    schedule = as_schedule(rule)
    s = as_cellset(schedule, s)
    counts: dict[int, int] = {}
    for cell in s:
        counts[cell.stage] = counts.get(cell.stage, 0) + 1
    return sum((count * schedule.level_width(stage) for stage, count in counts.items()), Fraction(0))


def intersect(rule: RuleLike, a: CellSetLike, b: CellSetLike) -> CellSet:
    schedule = as_schedule(rule)
    a = as_cellset(schedule, a)
    b = as_cellset(schedule, b)
    if not a or not b:
        return CellSet.empty()
    a_cells, b_cells = set(a), set(b)
    a_min = min(c.stage for c in a_cells)
    b_min = min(c.stage for c in b_cells)
    out = {c for c in a_cells if is_covered(schedule, c, b_cells, b_min)}
    out.update(c for c in b_cells if is_covered(schedule, c, a_cells, a_min))
    return canonicalize(schedule, out, disjoint=True)


def _carve(schedule: ColumnSchedule, cell: Cell, holes: list[dict[int, int]]) -> list[Cell]:
    """The part of `cell` outside of the hole cells (given by their ancestor chains)."""
    if not holes:
        return [cell]
    pieces = []
    for child in refine(schedule, cell):
        child_holes = [h for h in holes if h.get(child.stage) == child.index]
        if any(max(h) == child.stage for h in child_holes):
            # The child itself is a hole.
            continue
        pieces.extend(_carve(schedule, child, child_holes))
    return pieces


def difference(rule: RuleLike, a: CellSetLike, b: CellSetLike) -> CellSet:
    schedule = as_schedule(rule)
    a = as_cellset(schedule, a)
    b = as_cellset(schedule, b)
    if not a or not b:
        return a
    b_cells = set(b)
    b_min = min(c.stage for c in b_cells)
    a_min = min(c.stage for c in a)
    chains = [_ancestor_chain(schedule, hole, a_min) for hole in b_cells]
    pieces: list[Cell] = []
    for cell in a:
        if is_covered(schedule, cell, b_cells, b_min):
            continue
        holes = [
            chain for chain in chains if max(chain) > cell.stage and chain.get(cell.stage) == cell.index
        ]
        pieces.extend(_carve(schedule, cell, holes))
    return canonicalize(schedule, pieces, disjoint=True)


def union(rule: RuleLike, a: CellSetLike, b: CellSetLike) -> CellSet:
    schedule = as_schedule(rule)
    a = as_cellset(schedule, a)
    extra = difference(schedule, b, a)
    return canonicalize(schedule, [*a, *extra], disjoint=True)


def intersection_measure(rule: RuleLike, a: CellSetLike, b: CellSetLike) -> Fraction:
    schedule = as_schedule(rule)
    return measure(schedule, intersect(schedule, a, b))


@dataclass(frozen=True)
class TranslateResult:
    cells: CellSet
    tail: Fraction = Fraction(0)
    """ Measure of the pieces dropped because they would refine past `max_stage`. """

    @property
    def exact(self) -> bool:
        return self.tail == 0


def push_pieces(
    rule: RuleLike, cells: Iterable[Cell], m: int, max_stage: int | None = None
) -> tuple[list[Cell], Fraction]:
    """Raw (non-canonical) pieces of T^m of the given cells, plus the measure of the dropped tail.

    Each cell advances by chunks up to the top of its column. At a top, it is refined once into the
    next column, where each of its c copies sits under fresh spacer mass, and keeps going.
    """
    schedule = as_schedule(rule)
    if m < 0:
        raise NegativeExponent(f"push-forwards need m >= 0, got {m}")
    pieces: list[Cell] = []
    tail = Fraction(0)
    stack = [(stage, index, m) for stage, index in cells]
    while stack:
        stage, index, remaining = stack.pop()
        h = schedule.height(stage)
        if index + remaining < h:
            pieces.append(Cell(stage, index + remaining))
            continue
        remaining -= h - 1 - index
        if max_stage is not None and stage >= max_stage:
            tail += schedule.level_width(stage)
            continue
        for offset in schedule.layout(stage).copy_offsets:
            stack.append((stage + 1, offset + h - 1, remaining))
    return pieces, tail


def push_forward(
    rule: RuleLike, s: CellSetLike, m: int, max_stage: int | None = None
) -> TranslateResult:
    """T^m(s), optionally refining no further than `max_stage` (the rest is reported as a tail)."""
    schedule = as_schedule(rule)
    s = as_cellset(schedule, s)
    pieces, tail = push_pieces(schedule, s, m, max_stage=max_stage)
    if tail:
        warnings.warn(
            UserWarning(f"T^{m}: unresolved tail of measure {tail} past stage {max_stage}")
        )
    return TranslateResult(canonicalize(schedule, pieces, disjoint=True), tail)


def translate(rule: RuleLike, s: CellSetLike, m: int) -> CellSet:
    """The exact image T^m(s), for m >= 0."""
    return push_forward(rule, s, m).cells


def translate_inverse(
    rule: RuleLike, s: CellSetLike, m: int, depth: int
) -> tuple[CellSet, Fraction]:
    """The resolved part of T^{-m}(s), and the measure that stayed unresolved.

    Going down is the hard direction: the bottom level of every column is the copy-1 sublevel of
    the next column's bottom level, so a piece reaching index 0 is refined, and only its copy-1
    part stays on the bottom. Each time a piece hits the bottom it may be refined `depth` times,
    after which its remaining measure is added to the residual.
    """
    schedule = as_schedule(rule)
    s = as_cellset(schedule, s)
    if m < 0:
        raise NegativeExponent(f"expected m >= 0, got {m}, use the adjoint form instead")
    if depth < 0:
        raise ValueError(f"expected depth >= 0, got {depth}")
    pieces: list[Cell] = []
    residual = Fraction(0)
    stack = [(stage, index, m, 0) for stage, index in s]
    while stack:
        stage, index, remaining, used = stack.pop()
        if index >= remaining:
            pieces.append(Cell(stage, index - remaining))
            continue
        remaining -= index
        if used >= depth:
            logger.debug(f"({stage}, {index}) unresolved after {used} refinements")
            residual += schedule.level_width(stage)
            continue
        for offset in schedule.layout(stage).copy_offsets:
            if offset == 0:
                stack.append((stage + 1, 0, remaining, used + 1))
            else:
                stack.append((stage + 1, offset - 1, remaining - 1, 0))
    return canonicalize(schedule, pieces, disjoint=True), residual


def _digit(cuts: int, offset: Fraction) -> tuple[int, Fraction]:
    scaled = offset * cuts
    digit = math.floor(scaled)
    return digit, scaled - digit


def apply_T_point(rule: RuleLike, p: PointAddress, m: int) -> PointAddress:
    """The address of T^m(p)."""
    schedule = as_schedule(rule)
    stage, index, offset = p
    offset = Fraction(offset)
    check_cell(schedule, Cell(stage, index))
    if not 0 <= offset < 1:
        raise ValueError(f"offsets are in [0, 1), got {offset}")
    if m >= 0:
        remaining = m
        while True:
            h = schedule.height(stage)
            if index + remaining < h:
                return PointAddress(stage, index + remaining, offset)
            remaining -= h - 1 - index
            digit, offset = _digit(schedule.cuts, offset)
            index = schedule.layout(stage).copy_offsets[digit] + h - 1
            stage += 1

    remaining = -m
    while True:
        if index >= remaining:
            return PointAddress(stage, index - remaining, offset)
        remaining -= index
        index = 0
        if offset == 0:
            # Every digit is zero from here on: this is the leftmost point of the bottom level.
            raise OrbitBottom(f"T^{m} is undefined at {p}")
        digit, offset = _digit(schedule.cuts, offset)
        copy_offset = schedule.layout(stage).copy_offsets[digit]
        stage += 1
        if copy_offset:
            index = copy_offset - 1
            remaining -= 1


def point_at_stage(rule: RuleLike, p: PointAddress, n: int) -> PointAddress:
    """The address of the same point at a later stage."""
    schedule = as_schedule(rule)
    stage, index, offset = p
    if n < stage:
        raise StageOrder(f"can't express {p} at the earlier stage {n}")
    offset = Fraction(offset)
    while stage < n:
        digit, offset = _digit(schedule.cuts, offset)
        index += schedule.layout(stage).copy_offsets[digit]
        stage += 1
    return PointAddress(stage, index, offset)


def contains_point(rule: RuleLike, s: CellSetLike, p: PointAddress) -> bool:
    schedule = as_schedule(rule)
    s = as_cellset(schedule, s)
    for cell in s:
        if cell.stage <= p.stage:
            if ancestor_level(schedule, Cell(p.stage, p.index), cell.stage) == cell.index:
                return True
        elif point_at_stage(schedule, p, cell.stage).index == cell.index:
            return True
    return False


def spacer_count(rule: RuleLike, N: int, lo: int, hi: int, above: int) -> tuple[int, int]:
    """Counts (staircase spacers, spacer-block levels) among the indices (lo, hi] of C_N.

    Only the spacers added when building C_{m+1} from C_m with m >= `above` are counted.
    """
    schedule = as_schedule(rule)
    full_counts: dict[int, tuple[int, int]] = {}

    def full(stage: int) -> tuple[int, int]:
        # Spacers of the counted generations inside a whole copy of C_stage.
        if stage <= above:
            return (0, 0)
        if stage not in full_counts:
            stairs, blocks = full(stage - 1)
            lay = schedule.layout(stage - 1)
            full_counts[stage] = (
                schedule.cuts * stairs + 1,
                schedule.cuts * blocks + lay.block_length,
            )
        return full_counts[stage]

    def count(stage: int, start: int, stop: int) -> tuple[int, int]:
        # Half-open window [start, stop) of C_stage.
        if stage <= above or start >= stop:
            return (0, 0)
        if start == 0 and stop == schedule.height(stage):
            return full(stage)
        lay = schedule.layout(stage - 1)
        stairs = 1 if start <= lay.staircase_index < stop else 0
        block = lay.spacer_block
        blocks = max(0, min(stop, block.stop) - max(start, block.start))
        for offset in lay.copy_offsets:
            a = max(start, offset)
            b = min(stop, offset + lay.height)
            if a < b:
                sub_stairs, sub_blocks = count(stage - 1, a - offset, b - offset)
                stairs += sub_stairs
                blocks += sub_blocks
        return stairs, blocks

    if lo > hi:
        raise ValueError(f"empty window ({lo}, {hi}]")
    return count(N, max(lo + 1, 0), min(hi + 1, schedule.height(N)))


def copy_starts(rule: RuleLike, N: int, lo: int, hi: int, n: int) -> int:
    """Counts the bottom levels of copies of C_n among the indices (lo, hi] of C_N."""
    schedule = as_schedule(rule)
    if n > N:
        raise StageOrder(f"C_{n} is not inside C_{N}")
    if lo > hi:
        raise ValueError(f"empty window ({lo}, {hi}]")

    def count(stage: int, start: int, stop: int) -> int:
        if start >= stop:
            return 0
        if stage == n:
            return 1 if start == 0 else 0
        if start == 0 and stop == schedule.height(stage):
            return schedule.copies_between(n, stage)
        lay = schedule.layout(stage - 1)
        total = 0
        for offset in lay.copy_offsets:
            a = max(start, offset)
            b = min(stop, offset + lay.height)
            if a < b:
                total += count(stage - 1, a - offset, b - offset)
        return total

    return count(N, max(lo + 1, 0), min(hi + 1, schedule.height(N)))


def level_masses(
    rule: RuleLike, s: CellSetLike | Iterable[Cell], n: int
) -> tuple[dict[int, Fraction], Fraction]:
    """Buckets the mass of `s` by level of C_n. Returns (mass per level, mass in later spacers)."""
    schedule = as_schedule(rule)
    cells = s.cells if isinstance(s, CellSet) else list(s)
    masses: dict[int, Fraction] = {}
    spacer_mass = Fraction(0)
    for cell in cells:
        width = schedule.level_width(cell.stage)
        if cell.stage < n:
            sub_width = schedule.level_width(n)
            for j in descendants(schedule, cell, n):
                masses[j] = masses.get(j, Fraction(0)) + sub_width
            continue
        level = ancestor_level(schedule, cell, n)
        if isinstance(level, SpacerOrigin):
            spacer_mass += width
        else:
            masses[level] = masses.get(level, Fraction(0)) + width
    return masses, spacer_mass
