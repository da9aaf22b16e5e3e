"""Cutting-and-stacking rules and the per-stage geometry they generate.

A rule cuts the column C_n into `cuts` equal-width copies, puts a block of h_n spacers on top of
copy `spacer_block_column`, a single (staircase) spacer on top of copy `staircase_column`, and
stacks everything from left to right to get C_{n+1}. All the quantities are exact: heights are
python integers and widths are `Fraction`s.
"""
from __future__ import annotations

import enum
import json
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from logging import getLogger as get_logger
from pathlib import Path
from typing import NamedTuple, Union

from simple_parsing.helpers.serialization.serializable import FrozenSerializable, Serializable

from stacklab.errors import InvalidRule, ParseError, StageOrder
from stacklab.utils.fractions import parse_fraction

logger = get_logger(__name__)

PAPER_PRESET = "paper-T"


@dataclass(frozen=True)
class RuleSpec(FrozenSerializable):
    """A cutting-and-stacking rule with a constant number of cuts per stage."""

    cuts: int = 4
    """ Number of equal-width subcolumns (copies) C_n is cut into. """

    spacer_block_column: int = 2
    """ 1-based copy that receives the block of h_n spacers. """

    staircase_column: int = 4
    """ 1-based copy that receives the single staircase spacer. """

    base_width: Fraction = Fraction(1)
    """ Width of the base B_1 of the first column. """

    initial_height: int = 1
    """ Height h_1 of the first column. """

    @classmethod
    def preset(cls, name: str) -> RuleSpec:
        if name not in PRESETS:
            raise InvalidRule("preset", f"unknown preset {name!r}, available: {sorted(PRESETS)}")
        return PRESETS[name]

    def to_json_dict(self) -> dict:
        return {
            "cuts": self.cuts,
            "spacer_block_column": self.spacer_block_column,
            "staircase_column": self.staircase_column,
            "base_width": f"{self.base_width.numerator}/{self.base_width.denominator}",
            "initial_height": self.initial_height,
        }

    def to_json(self, **dumps_kwargs) -> str:
        return json.dumps(self.to_json_dict(), **dumps_kwargs)

    @classmethod
    def from_json_dict(cls, data: dict, location: str = "$") -> RuleSpec:
        if not isinstance(data, dict):
            raise ParseError("a rule must be a JSON object", location)
        expected = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - expected)
        if unknown:
            raise ParseError(f"unknown field(s) {unknown}", f"{location}.{unknown[0]}")
        missing = sorted(expected - set(data))
        if missing:
            raise ParseError(f"missing field(s) {missing}", location)
        for key in ("cuts", "spacer_block_column", "staircase_column", "initial_height"):
            if not isinstance(data[key], int) or isinstance(data[key], bool):
                raise ParseError(f"expected an integer, got {data[key]!r}", f"{location}.{key}")
        try:
            base_width = parse_fraction(data["base_width"])
        except ValueError as exc:
            raise ParseError(str(exc), f"{location}.base_width") from exc
        return cls(
            cuts=data["cuts"],
            spacer_block_column=data["spacer_block_column"],
            staircase_column=data["staircase_column"],
            base_width=base_width,
            initial_height=data["initial_height"],
        )

    @classmethod
    def from_json(cls, text: str) -> RuleSpec:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
        return cls.from_json_dict(data)


PRESETS: dict[str, RuleSpec] = {
    PAPER_PRESET: RuleSpec(),
    # Remark-1 style rules: staircase on the last copy, spacer block on a middle copy.
    "remark-c3": RuleSpec(cuts=3, spacer_block_column=2, staircase_column=3),
    "remark-c5": RuleSpec(cuts=5, spacer_block_column=3, staircase_column=5),
}


@dataclass(frozen=True)
class ValidatedRule:
    rule: RuleSpec
    warnings: tuple[str, ...] = ()


def validate_rule(spec: RuleSpec) -> ValidatedRule:
    """Checks the constraints of a rule. Raises `InvalidRule` naming the violated constraint."""
    if spec.cuts < 2:
        raise InvalidRule("cuts >= 2", f"got cuts={spec.cuts}")
    if not 1 <= spec.spacer_block_column <= spec.cuts:
        raise InvalidRule(
            "1 <= spacer_block_column <= cuts",
            f"got spacer_block_column={spec.spacer_block_column} with cuts={spec.cuts}",
        )
    if not 1 <= spec.staircase_column <= spec.cuts:
        raise InvalidRule(
            "1 <= staircase_column <= cuts",
            f"got staircase_column={spec.staircase_column} with cuts={spec.cuts}",
        )
    if spec.spacer_block_column == spec.staircase_column:
        raise InvalidRule(
            "spacer_block_column != staircase_column",
            f"both are {spec.staircase_column}",
        )
    if Fraction(spec.base_width) <= 0:
        raise InvalidRule("base_width > 0", f"got {spec.base_width}")
    if spec.initial_height < 1:
        raise InvalidRule("initial_height >= 1", f"got {spec.initial_height}")

    notes: list[str] = []
    if spec.spacer_block_column in (1, spec.cuts):
        notes.append(
            f"spacer block on copy {spec.spacer_block_column} is not on a middle subcolumn"
        )
    if spec.staircase_column != spec.cuts:
        notes.append(
            f"staircase spacer on copy {spec.staircase_column} is not the top of the new column"
        )
    for note in notes:
        warnings.warn(UserWarning(note))
    return ValidatedRule(rule=spec, warnings=tuple(notes))


class SegmentKind(enum.Enum):
    COPY = "copy"
    BLOCK = "spacer-block"
    STAIRCASE = "staircase"


class Segment(NamedTuple):
    """A run of consecutive indices of C_{n+1}."""

    kind: SegmentKind
    start: int
    stop: int
    copy: int | None = None
    """ 0-based copy number, for COPY segments. """


class Location(NamedTuple):
    """Where an index of C_{n+1} sits in the layout of stage n."""

    kind: SegmentKind
    copy: int | None
    """ 0-based copy number, or None for spacers. """
    offset: int
    """ Index inside the segment (for a copy, this is the C_n level). """


@dataclass(frozen=True)
class Layout:
    """Segment map of C_{n+1} in terms of the copies of C_n and the new spacers."""

    stage: int
    height: int
    """ Height h_n of the column being cut. """
    copy_offsets: tuple[int, ...]
    spacer_block: range
    staircase_index: int

    @property
    def block_length(self) -> int:
        # `len` of a range is capped at sys.maxsize; heights are not.
        return self.spacer_block.stop - self.spacer_block.start

    @property
    def new_height(self) -> int:
        return len(self.copy_offsets) * self.height + self.block_length + 1

    def segments(self) -> list[Segment]:
        """The segments of C_{n+1}, bottom to top."""
        segments = [
            Segment(SegmentKind.COPY, offset, offset + self.height, copy=i)
            for i, offset in enumerate(self.copy_offsets)
        ]
        segments.append(
            Segment(SegmentKind.BLOCK, self.spacer_block.start, self.spacer_block.stop)
        )
        segments.append(
            Segment(SegmentKind.STAIRCASE, self.staircase_index, self.staircase_index + 1)
        )
        return sorted(segments, key=lambda s: s.start)

    def locate(self, index: int) -> Location:
        if not 0 <= index < self.new_height:
            raise IndexError(f"index {index} is outside of C_{self.stage + 1}")
        i = bisect_right(self.copy_offsets, index) - 1
        if i >= 0 and index < self.copy_offsets[i] + self.height:
            return Location(SegmentKind.COPY, i, index - self.copy_offsets[i])
        if index in self.spacer_block:
            return Location(SegmentKind.BLOCK, None, index - self.spacer_block.start)
        assert index == self.staircase_index
        return Location(SegmentKind.STAIRCASE, None, 0)


class ColumnSchedule:
    """Lazily computed, memoized geometry of all the columns of a rule.

    The per-stage caches only ever grow, so a schedule can be shared freely.
    """

    def __init__(self, rule: RuleSpec):
        self.rule = validate_rule(rule).rule
        self.cuts = rule.cuts
        self._heights: list[int] = [0, rule.initial_height]
        self._layouts: dict[int, Layout] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.rule!r})"

    def height(self, n: int) -> int:
        if n < 1:
            raise StageOrder(f"stages start at 1, got {n}")
        while len(self._heights) <= n:
            h = self._heights[-1]
            # c copies, a block of h spacers and the staircase spacer.
            self._heights.append(self.cuts * h + h + 1)
        return self._heights[n]

    def heights(self, upto: int) -> list[int]:
        return [self.height(n) for n in range(1, upto + 1)]

    def level_width(self, n: int) -> Fraction:
        if n < 1:
            raise StageOrder(f"stages start at 1, got {n}")
        return Fraction(self.rule.base_width) / self.cuts ** (n - 1)

    def widths(self, upto: int) -> list[Fraction]:
        return [self.level_width(n) for n in range(1, upto + 1)]

    def layout(self, n: int) -> Layout:
        """Segment map of C_{n+1}, built from the copies of C_n."""
        layout = self._layouts.get(n)
        if layout is not None:
            return layout
        h = self.height(n)
        offsets: list[int] = []
        block = range(0)
        staircase = -1
        position = 0
        for column in range(1, self.cuts + 1):
            offsets.append(position)
            position += h
            if column == self.rule.spacer_block_column:
                block = range(position, position + h)
                position += h
            if column == self.rule.staircase_column:
                staircase = position
                position += 1
        assert position == self.height(n + 1)
        layout = Layout(
            stage=n,
            height=h,
            copy_offsets=tuple(offsets),
            spacer_block=block,
            staircase_index=staircase,
        )
        self._layouts[n] = layout
        return layout

    def locate(self, n: int, j: int) -> Location:
        """Which segment of layout(n-1) holds index `j` of C_n."""
        if n < 2:
            raise StageOrder(f"C_{n} is not built from an earlier column")
        return self.layout(n - 1).locate(j)

    def copies_between(self, k: int, n: int) -> int:
        """Number of copies of C_k inside C_n."""
        if k > n:
            raise StageOrder(f"expected k <= n, got k={k}, n={n}")
        return self.cuts ** (n - k)

    def column_measure(self, n: int) -> Fraction:
        return self.height(n) * self.level_width(n)


RuleLike = Union[RuleSpec, ColumnSchedule, str]


@lru_cache(maxsize=None)
def _schedule_for_rule(rule: RuleSpec) -> ColumnSchedule:
    return ColumnSchedule(rule)


def load_rule(name_or_path: str) -> RuleSpec:
    """Loads a rule from a preset name (e.g. 'paper-T') or from the path to a JSON file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    path = Path(name_or_path)
    if not path.exists():
        raise InvalidRule("rule", f"{name_or_path!r} is neither a preset nor an existing file")
    logger.debug(f"Loading rule from {path}")
    return RuleSpec.from_json(path.read_text())


def as_schedule(rule: RuleLike) -> ColumnSchedule:
    if isinstance(rule, ColumnSchedule):
        return rule
    if isinstance(rule, str):
        rule = load_rule(rule)
    return _schedule_for_rule(rule)


def height(rule: RuleLike, n: int) -> int:
    return as_schedule(rule).height(n)


def level_width(rule: RuleLike, n: int) -> Fraction:
    return as_schedule(rule).level_width(n)


def layout(rule: RuleLike, n: int) -> Layout:
    return as_schedule(rule).layout(n)


def copies_between(rule: RuleLike, k: int, n: int) -> int:
    return as_schedule(rule).copies_between(k, n)


def column_measure(rule: RuleLike, n: int) -> Fraction:
    return as_schedule(rule).column_measure(n)


@dataclass
class ScheduleSummary(Serializable):
    """What the `build` command prints: heights, widths and layouts up to a stage."""

    rule: dict
    stages: list[int] = field(default_factory=list)
    heights: list[int] = field(default_factory=list)
    widths: list[Fraction] = field(default_factory=list)
    column_measures: list[Fraction] = field(default_factory=list)
    layouts: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return True


def summarize(rule: RuleLike, upto: int) -> ScheduleSummary:
    schedule = as_schedule(rule)
    stages = list(range(1, upto + 1))
    layouts = []
    for n in stages[:-1]:
        lay = schedule.layout(n)
        layouts.append(
            {
                "stage": n,
                "copy_offsets": list(lay.copy_offsets),
                "spacer_block": [lay.spacer_block.start, lay.spacer_block.stop],
                "staircase_index": lay.staircase_index,
            }
        )
    return ScheduleSummary(
        rule=schedule.rule.to_json_dict(),
        stages=stages,
        heights=schedule.heights(upto),
        widths=schedule.widths(upto),
        column_measures=[schedule.column_measure(n) for n in stages],
        layouts=layouts,
    )
