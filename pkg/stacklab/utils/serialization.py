"""Encoders for the exact types, registered on simple-parsing's `encode`.

Importing this module is enough: every `Serializable.to_dict()` then renders rationals as "p/q",
cells as [n, j] and cell sets as sorted lists of cells.
"""
from __future__ import annotations

import enum
from fractions import Fraction

from simple_parsing.helpers.serialization import encode

from stacklab.cells import Cell, CellSet, PointAddress, SpacerOrigin
from stacklab.products import Box, ExponentVector, Rectangle, RectSet
from stacklab.utils.fractions import format_fraction


@encode.register(Fraction)
def encode_fraction(value: Fraction) -> str:
    return format_fraction(value)


@encode.register(Cell)
def encode_cell(cell: Cell) -> list[int]:
    return [cell.stage, cell.index]


@encode.register(SpacerOrigin)
def encode_spacer_origin(origin: SpacerOrigin) -> dict:
    return {"spacer_origin": origin.stage}


@encode.register(PointAddress)
def encode_point(p: PointAddress) -> list:
    return [p.stage, p.index, format_fraction(p.offset)]


@encode.register(CellSet)
def encode_cellset(s: CellSet) -> list[list[int]]:
    return [encode_cell(c) for c in s]


@encode.register(Rectangle)
def encode_rectangle(rect: Rectangle) -> list[list[int]]:
    return [encode_cell(c) for c in rect.factors]


@encode.register(Box)
def encode_box(box: Box) -> list[list[list[int]]]:
    return [encode_cellset(f) for f in box.factors]


@encode.register(RectSet)
def encode_rectset(s: RectSet) -> list:
    return [encode_box(b) for b in s.boxes]


@encode.register(ExponentVector)
def encode_exponents(k: ExponentVector) -> list[int]:
    return list(k.k)


@encode.register(enum.Enum)
def encode_enum(value: enum.Enum):
    return value.value
