"""Brute-force realization of T on [0, oo) with explicit intervals.

The oracle knows nothing about cells or push-forwards: it lays the levels of C_N out on the line,
cutting every level into c equal pieces (copy i takes the i-th piece from the left) and putting new
spacers at the lowest unused coordinates, in stacking order. T is then replayed one level at a time.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from logging import getLogger as get_logger
from typing import Iterable

import pandas as pd
from simple_parsing.helpers.serialization.serializable import Serializable
from tqdm import tqdm

from stacklab.cells import Cell, CellSet, descendants, sublevels, translate
from stacklab.errors import LeftColumn, StageOrder, TooLarge
from stacklab.rules import ColumnSchedule, RuleLike, as_schedule
from stacklab.utils.fractions import format_fraction

logger = get_logger(__name__)

MAX_LEVELS = 10**7

Interval = tuple[Fraction, Fraction]


@dataclass
class EmbeddingTable:
    stage: int
    left_endpoints: list[Fraction]
    width: Fraction
    schedule: ColumnSchedule = field(repr=False, compare=False)

    def __post_init__(self):
        order = sorted(range(len(self.left_endpoints)), key=self.left_endpoints.__getitem__)
        self._sorted_lefts = [self.left_endpoints[j] for j in order]
        self._sorted_levels = order

    @property
    def height(self) -> int:
        return len(self.left_endpoints)

    def interval(self, level: int) -> Interval:
        left = self.left_endpoints[level]
        return left, left + self.width

    def level_of(self, x: Fraction) -> int:
        """The level of C_N containing x. Raises `LeftColumn` if x isn't in C_N."""
        position = bisect_right(self._sorted_lefts, x) - 1
        if position < 0 or x >= self._sorted_lefts[position] + self.width:
            raise LeftColumn(f"{x} is not inside C_{self.stage}")
        return self._sorted_levels[position]

    def interval_of(self, cell: Cell) -> list[Interval]:
        """The merged intervals covered by a cell of stage <= N."""
        if cell.stage > self.stage:
            raise StageOrder(f"{cell} is finer than the table of C_{self.stage}")
        return merge_intervals(
            self.interval(j) for j in descendants(self.schedule, cell, self.stage)
        )

    def intervals_of(self, cells: Iterable[Cell]) -> list[Interval]:
        return merge_intervals(i for cell in cells for i in self.interval_of(cell))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "level": range(self.height),
                "left": [format_fraction(x) for x in self.left_endpoints],
                "right": [format_fraction(x + self.width) for x in self.left_endpoints],
            }
        )

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False)


def merge_intervals(intervals: Iterable[Interval]) -> list[Interval]:
    merged: list[list[Fraction]] = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def build_embedding(rule: RuleLike, N: int, max_levels: int = MAX_LEVELS) -> EmbeddingTable:
    schedule = as_schedule(rule)
    if schedule.height(N) > max_levels:
        raise TooLarge(f"C_{N} has {schedule.height(N)} levels, more than {max_levels}")
    width = Fraction(schedule.rule.base_width)
    lefts = [width * j for j in range(schedule.height(1))]
    next_free = width * len(lefts)
    for stage in range(1, N):
        lay = schedule.layout(stage)
        new_width = width / schedule.cuts
        new_lefts: list[Fraction | None] = [None] * schedule.height(stage + 1)
        for copy, offset in enumerate(lay.copy_offsets):
            for j, left in enumerate(lefts):
                new_lefts[offset + j] = left + copy * new_width
        # Spacers, bottom to top (index order is the stacking order).
        for index in [*lay.spacer_block, lay.staircase_index]:
            new_lefts[index] = next_free
            next_free += new_width
        assert all(x is not None for x in new_lefts)
        lefts = new_lefts  # type: ignore
        width = new_width
    logger.debug(f"Built the embedding of C_{N}: {len(lefts)} levels of width {width}.")
    return EmbeddingTable(stage=N, left_endpoints=lefts, width=width, schedule=schedule)


def oracle_apply_T(table: EmbeddingTable, x: Fraction, m: int) -> Fraction:
    """Moves x up (or down, for m < 0) one level at a time, |m| times."""
    level = table.level_of(Fraction(x))
    step = 1 if m >= 0 else -1
    for _ in range(abs(m)):
        next_level = level + step
        if not 0 <= next_level < table.height:
            raise LeftColumn(f"the orbit of {x} leaves C_{table.stage} after level {level}")
        x = x + table.left_endpoints[next_level] - table.left_endpoints[level]
        level = next_level
    return x


@dataclass
class Mismatch(Serializable):
    source: Cell
    m: int
    oracle: list[list[Fraction]]
    symbolic: list[list[Fraction]]
    reason: str = ""


@dataclass
class EquivalenceReport(Serializable):
    stage: int
    source_stage: int
    m_max: int
    checked: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


def check_equivalence(
    rule: RuleLike,
    N: int,
    m_max: int,
    source_stage: int | None = None,
    progress: bool = False,
) -> EquivalenceReport:
    """Compares the oracle and `translate` on every level of C_{source_stage} and every m <= m_max.

    Only the pairs whose image stays inside C_N are compared.
    """
    schedule = as_schedule(rule)
    source_stage = N if source_stage is None else source_stage
    if source_stage > N:
        raise StageOrder(f"source stage {source_stage} is after the table stage {N}")
    table = build_embedding(schedule, N)
    h_N = schedule.height(N)
    report = EquivalenceReport(stage=N, source_stage=source_stage, m_max=m_max)
    levels = range(schedule.height(source_stage))
    for j in tqdm(levels, desc=f"oracle C_{N}", disable=not progress):
        source = Cell(source_stage, j)
        subs = sublevels(schedule, source, N)
        points = [table.left_endpoints[q] for q in subs]
        for m in range(m_max + 1):
            if subs[-1] + m >= h_N:
                break
            if m:
                points = [oracle_apply_T(table, x, 1) for x in points]
            oracle = merge_intervals((x, x + table.width) for x in points)
            image = translate(schedule, CellSet((source,)), m)
            report.checked += 1
            too_fine = [c for c in image if c.stage > N]
            if too_fine:
                report.mismatches.append(
                    Mismatch(source, m, _listed(oracle), [], reason=f"cells past C_{N}: {too_fine}")
                )
                continue
            symbolic = table.intervals_of(image)
            if symbolic != oracle:
                report.mismatches.append(Mismatch(source, m, _listed(oracle), _listed(symbolic)))
    logger.info(
        f"Oracle check on C_{N}: {report.checked} comparisons, {len(report.mismatches)} mismatches."
    )
    return report


def _listed(intervals: list[Interval]) -> list[list[Fraction]]:
    return [[a, b] for a, b in intervals]
