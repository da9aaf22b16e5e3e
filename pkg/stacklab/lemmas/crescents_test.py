from __future__ import annotations

import sys
from fractions import Fraction

import pytest

from stacklab.cells import Cell, CellSet
from stacklab.errors import DepthExceeded, StageOrder
from stacklab.lemmas.crescents import crescent, per_level_bound, staircase_sum
from stacklab.rules import RuleSpec, as_schedule

PAPER = as_schedule(RuleSpec())


@pytest.mark.parametrize("ell, expected", [(1, 1), (2, 3), (3, 6), (10, 55)])
def test_staircase_sum(ell: int, expected: int):
    assert staircase_sum(ell) == expected


def test_staircase_sum_needs_a_pass():
    with pytest.raises(ValueError):
        staircase_sum(0)


class TestCrescent:
    def test_top_group(self):
        report = crescent(PAPER, Cell(3, 5), 1)
        (top,) = report.top
        assert top.target_level == 4
        assert top.drop == top.staircase_passes == 1
        assert top.cells == CellSet((Cell(5, 160), Cell(5, 628)))
        assert report.top_measure == Fraction(1, 128)
        assert report.source_measure == Fraction(1, 16)
        assert report.passed

    def test_bottom_level_has_no_crescent(self):
        report = crescent(PAPER, Cell(2, 0), 1)
        assert report.pieces == []
        assert report.aggregate == 0
        assert report.top == []

    @pytest.mark.parametrize("n", [2, 3])
    def test_top_group_is_an_eighth_of_the_level(self, n: int):
        for j in range(1, PAPER.height(n)):
            report = crescent(PAPER, Cell(n, j), 1)
            assert report.top_measure == PAPER.level_width(n) / 8

    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_drop_matches_staircase_passes(self, ell: int):
        for j in range(PAPER.height(2)):
            report = crescent(PAPER, Cell(2, j), ell)
            assert report.displacement_law_holds, report.pieces

    def test_drop_counts_whole_laps(self):
        # Three passes from the bottom of C_2 step over a whole column's worth of staircases.
        report = crescent(PAPER, Cell(2, 0), 3)
        deep = [p for p in report.pieces if p.staircase_passes >= PAPER.height(2)]
        assert deep
        for piece in deep:
            assert piece.drop == piece.staircase_passes
            assert piece.target_level == -piece.drop % PAPER.height(2)
        assert report.displacement_law_holds

    def test_two_passes_keep_an_eighth(self):
        for j in range(PAPER.height(2)):
            report = crescent(PAPER, Cell(2, j), 2)
            assert report.aggregate >= PAPER.level_width(2) / 8

    def test_pieces_are_sorted_by_drop(self):
        report = crescent(PAPER, Cell(3, 20), 2)
        drops = [p.drop for p in report.pieces]
        assert drops == sorted(drops)
        assert report.aggregate == sum(p.measure for p in report.pieces)

    def test_depth(self):
        shallow = crescent(PAPER, Cell(3, 5), 1, depth=4)
        assert shallow.unresolved_tail > 0
        with pytest.raises(DepthExceeded) as exc_info:
            crescent(PAPER, Cell(3, 5), 1, depth=4, strict=True)
        assert exc_info.value.tail == shallow.unresolved_tail
        with pytest.raises(StageOrder):
            crescent(PAPER, Cell(3, 5), 1, depth=2)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            crescent(PAPER, Cell(3, 5), 0)
        with pytest.raises(ValueError):
            crescent(PAPER, Cell(3, 5), 1, extra=-1)
        with pytest.raises(IndexError):
            crescent(PAPER, Cell(2, 6), 1)


@pytest.mark.parametrize("ell", [1, 2])
def test_per_level_bound(ell: int):
    report = per_level_bound(PAPER, 3, ell)
    assert report.extra == staircase_sum(ell) + 1
    assert len(report.pairs) == 31 * 32 // 2
    assert report.passed, [p for p in report.pairs if not p.holds][:5]


@pytest.mark.skipif("-vv" not in sys.argv, reason="This test takes a while to run.")
@pytest.mark.parametrize("ell", [1, 2])
def test_per_level_bound_at_stage_four(ell: int):
    assert per_level_bound(PAPER, 4, ell).passed


def test_per_level_bound_on_selected_levels():
    report = per_level_bound(PAPER, 2, 1, levels=[5])
    assert [p.target for p in report.pairs] == [5, 4, 3, 2, 1, 0]
