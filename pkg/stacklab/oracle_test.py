from __future__ import annotations

from fractions import Fraction

import pytest

from stacklab.cells import Cell, CellSet, sublevels, translate
from stacklab.errors import LeftColumn, StageOrder, TooLarge
from stacklab.oracle import (
    EmbeddingTable,
    build_embedding,
    check_equivalence,
    merge_intervals,
    oracle_apply_T,
)
from stacklab.rules import RuleSpec, as_schedule

PAPER = as_schedule(RuleSpec())


@pytest.fixture(scope="module")
def table() -> EmbeddingTable:
    return build_embedding(PAPER, 2)


def test_embedding_of_the_second_column(table: EmbeddingTable):
    quarter = Fraction(1, 4)
    # Copies split the unit interval from the left; spacers go right after it.
    assert table.left_endpoints == [0, quarter, 1, 2 * quarter, 3 * quarter, 5 * quarter]
    assert table.width == quarter
    assert table.interval(2) == (1, Fraction(5, 4))


def test_level_of(table: EmbeddingTable):
    assert table.level_of(Fraction(1, 2)) == 3
    assert table.level_of(Fraction(11, 10)) == 2
    assert table.level_of(Fraction(0)) == 0
    with pytest.raises(LeftColumn):
        table.level_of(Fraction(3, 2))


def test_oracle_apply_T(table: EmbeddingTable):
    x = Fraction(1, 8)
    assert oracle_apply_T(table, x, 1) == Fraction(3, 8)
    assert oracle_apply_T(table, x, 2) == Fraction(9, 8)
    assert oracle_apply_T(table, x, 5) == Fraction(11, 8)
    assert oracle_apply_T(table, Fraction(11, 8), -5) == x
    with pytest.raises(LeftColumn):
        oracle_apply_T(table, x, 6)


def test_interval_of(table: EmbeddingTable):
    assert table.interval_of(Cell(1, 0)) == [(0, 1)]
    assert table.intervals_of([Cell(2, 2), Cell(2, 5)]) == [(1, Fraction(3, 2))]
    with pytest.raises(StageOrder):
        table.interval_of(Cell(3, 0))


def test_later_tables_refine_earlier_ones(table: EmbeddingTable):
    finer = build_embedding(PAPER, 3)
    for j in range(table.height):
        assert finer.interval_of(Cell(2, j)) == [table.interval(j)]


def test_merge_intervals():
    assert merge_intervals([(2, 3), (0, 1), (1, 2), (5, 6)]) == [(0, 3), (5, 6)]
    assert merge_intervals([]) == []


def test_too_large():
    with pytest.raises(TooLarge):
        build_embedding(PAPER, 5, max_levels=100)


def test_csv(table: EmbeddingTable):
    lines = table.to_csv().splitlines()
    assert lines[0] == "level,left,right"
    assert lines[1] == "0,0/1,1/4"
    assert len(lines) == 7


@pytest.mark.parametrize("rule", ["paper-T", "remark-c3", "remark-c5"])
def test_translate_agrees_with_the_oracle(rule: str):
    report = check_equivalence(rule, 4, 50)
    assert report.checked > 0
    assert report.passed, report.mismatches[:3]


def test_coarse_levels_over_a_long_range():
    report = check_equivalence(PAPER, 5, 200, source_stage=2)
    assert report.source_stage == 2
    assert report.passed, report.mismatches[:3]


def test_source_stage_after_table():
    with pytest.raises(StageOrder):
        check_equivalence(PAPER, 3, 10, source_stage=4)


@pytest.mark.parametrize("cell, m", [(Cell(2, 5), 1), (Cell(2, 0), 6), (Cell(2, 0), 7)])
def test_hand_derived_images(cell: Cell, m: int):
    table = build_embedding(PAPER, 4)
    points = [table.left_endpoints[j] for j in sublevels(PAPER, cell, 4)]
    moved = merge_intervals(
        (x, x + table.width) for x in (oracle_apply_T(table, p, m) for p in points)
    )
    assert table.intervals_of(translate(PAPER, CellSet((cell,)), m)) == moved
