from __future__ import annotations

from fractions import Fraction

import hypothesis as hp
import pytest
from hypothesis import strategies as st

from stacklab.cells import CellSet, measure, translate
from stacklab.errors import ArityMismatch, NegativeExponent
from stacklab.products import (
    Box,
    ExponentVector,
    Rectangle,
    RectSet,
    coordinate_overlap,
    product_measure,
    product_overlap,
    product_translate,
    rect_intersect,
)
from stacklab.rules import RuleSpec, as_schedule

PAPER = as_schedule(RuleSpec())


def rects(*rectangles) -> RectSet:
    return RectSet.from_rectangles(PAPER, rectangles)


class TestRectangles:
    def test_measure(self):
        assert Rectangle.of(PAPER, [(2, 0), (3, 7)]).measure(PAPER) == Fraction(1, 64)
        assert product_measure(PAPER, rects([(1, 0), (2, 2)], [(2, 1), (1, 0)])) == Fraction(1, 2)

    def test_needs_a_factor(self):
        with pytest.raises(ArityMismatch):
            Rectangle.of(PAPER, [])

    def test_overlapping_rectangles_are_rejected(self):
        with pytest.raises(ValueError, match="overlapping"):
            rects([(1, 0)], [(2, 0)])

    def test_mixed_arities(self):
        with pytest.raises(ArityMismatch):
            RectSet.of(
                [
                    Rectangle.of(PAPER, [(1, 0)]).as_box(),
                    Rectangle.of(PAPER, [(1, 0), (1, 0)]).as_box(),
                ]
            )

    def test_empty_boxes_are_dropped(self):
        s = RectSet.of([Box((CellSet.build(PAPER, [(1, 0)]), CellSet.empty()))])
        assert s.arity == 2
        assert not s

    def test_intersect(self):
        both = rect_intersect(PAPER, rects([(1, 0), (2, 0)]), rects([(2, 0), (1, 0)]))
        assert product_measure(PAPER, both) == Fraction(1, 16)
        with pytest.raises(ArityMismatch):
            rect_intersect(PAPER, rects([(1, 0)]), rects([(1, 0), (1, 0)]))


@pytest.mark.parametrize("k", [(), (0,), (1, 0), (True,)])
def test_bad_exponent_vectors(k):
    with pytest.raises(ValueError):
        ExponentVector.of(k)


class TestProductTranslate:
    def test_factors_move_independently(self):
        image = product_translate(PAPER, rects([(2, 5), (2, 0)]), [1, 6], 1)
        expected = translate(PAPER, CellSet.build(PAPER, [(2, 5)]), 1)
        (box,) = image.boxes
        assert box.factors == (expected, expected)

    def test_negative_exponents_need_the_adjoint_form(self):
        with pytest.raises(NegativeExponent):
            product_translate(PAPER, rects([(2, 0), (2, 0)]), [1, -1], 3)

    def test_arity(self):
        with pytest.raises(ArityMismatch):
            product_translate(PAPER, rects([(2, 0), (2, 0)]), [1], 3)

    @hp.given(
        k=st.lists(st.integers(1, 3), min_size=1, max_size=3),
        H=st.integers(0, 20),
        indices=st.lists(st.integers(0, 5), min_size=3, max_size=3),
    )
    def test_measure_is_preserved(self, k: list[int], H: int, indices: list[int]):
        s = rects([(2, j) for j in indices[: len(k)]])
        assert product_measure(PAPER, product_translate(PAPER, s, k, H)) == product_measure(PAPER, s)


class TestOverlaps:
    def test_coordinate_overlap(self):
        assert coordinate_overlap(PAPER, [(2, 0)], [(2, 0)], 1, 7) == Fraction(1, 32)
        assert coordinate_overlap(PAPER, [(2, 0)], [(2, 0)], 1, 1) == 0

    def test_negative_exponent_uses_the_adjoint(self):
        I = CellSet.build(PAPER, [(2, 1)])
        J = CellSet.build(PAPER, [(2, 0)])
        assert coordinate_overlap(PAPER, J, I, -1, 7) == coordinate_overlap(PAPER, I, J, 1, 7)
        assert coordinate_overlap(PAPER, I, J, 1, 7) == Fraction(1, 128)

    def test_product_overlap_multiplies_coordinates(self):
        A = rects([(2, 0), (2, 0)])
        assert product_overlap(PAPER, A, A, [1, 1], 7) == Fraction(1, 1024)
        assert product_overlap(PAPER, A, A, [1, -1], 7) == Fraction(1, 1024)

    def test_product_overlap_matches_product_translate(self):
        A = rects([(2, 0), (3, 2)], [(2, 1), (1, 0)])
        B = rects([(2, 0), (2, 0)], [(2, 3), (2, 4)])
        for H in range(1, 12):
            moved = product_translate(PAPER, A, [1, 2], H)
            expected = product_measure(PAPER, rect_intersect(PAPER, moved, B))
            assert product_overlap(PAPER, A, B, [1, 2], H) == expected

    def test_overlap_of_the_whole_tower_is_its_measure(self):
        whole = CellSet.build(PAPER, [(1, 0)])
        assert coordinate_overlap(PAPER, whole, whole, 1, 0) == measure(PAPER, whole)
