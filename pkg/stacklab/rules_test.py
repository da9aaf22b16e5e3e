from __future__ import annotations

import json
import sys
from fractions import Fraction

import pytest

from stacklab.errors import InvalidRule, ParseError, StageOrder
from stacklab.rules import (
    PRESETS,
    ColumnSchedule,
    RuleSpec,
    SegmentKind,
    as_schedule,
    column_measure,
    copies_between,
    height,
    layout,
    level_width,
    load_rule,
    summarize,
    validate_rule,
)


@pytest.fixture(scope="module")
def schedule() -> ColumnSchedule:
    return as_schedule(RuleSpec())


@pytest.mark.parametrize("n", range(1, 21))
def test_heights_follow_recurrence_and_closed_form(schedule: ColumnSchedule, n: int):
    assert schedule.height(n) == (5**n - 1) // 4
    if n > 1:
        assert schedule.height(n) == 5 * schedule.height(n - 1) + 1


@pytest.mark.parametrize("n", range(1, 21))
def test_column_measure(schedule: ColumnSchedule, n: int):
    assert schedule.column_measure(n) == Fraction(5**n - 1, 4**n)
    assert schedule.column_measure(n + 1) > schedule.column_measure(n)


@pytest.mark.parametrize(
    "n, offsets, block, staircase",
    [
        (1, (0, 1, 3, 4), range(2, 3), 5),
        (2, (0, 6, 18, 24), range(12, 18), 30),
        (3, (0, 31, 93, 124), range(62, 93), 155),
        (4, (0, 156, 468, 624), range(312, 468), 780),
    ],
)
def test_layouts(schedule: ColumnSchedule, n: int, offsets, block, staircase):
    lay = schedule.layout(n)
    assert lay.copy_offsets == offsets
    assert lay.spacer_block == block
    assert lay.staircase_index == staircase
    assert lay.new_height == schedule.height(n + 1)


@pytest.mark.parametrize("n", [28, 40, 100])
def test_layouts_past_machine_ints(schedule: ColumnSchedule, n: int):
    lay = schedule.layout(n)
    assert schedule.height(n) > sys.maxsize
    assert lay.block_length == schedule.height(n)
    assert lay.new_height == schedule.height(n + 1)
    assert lay.locate(lay.staircase_index).kind is SegmentKind.STAIRCASE
    assert lay.locate(lay.spacer_block.start + 1) == (SegmentKind.BLOCK, None, 1)


def test_segments_tile_the_next_column(schedule: ColumnSchedule):
    for n in range(1, 5):
        segments = schedule.layout(n).segments()
        assert segments[0].start == 0
        assert segments[-1].stop == schedule.height(n + 1)
        for below, above in zip(segments, segments[1:]):
            assert below.stop == above.start
        # The spacer block sits right on top of copy 2, the staircase on top of copy 4.
        kinds = [s.kind for s in segments]
        assert kinds == [
            SegmentKind.COPY,
            SegmentKind.COPY,
            SegmentKind.BLOCK,
            SegmentKind.COPY,
            SegmentKind.COPY,
            SegmentKind.STAIRCASE,
        ]


def test_locate(schedule: ColumnSchedule):
    assert schedule.locate(3, 7) == (SegmentKind.COPY, 1, 1)
    assert schedule.locate(3, 13).kind is SegmentKind.BLOCK
    assert schedule.locate(4, 155).kind is SegmentKind.STAIRCASE
    with pytest.raises(IndexError):
        schedule.locate(2, 6)
    with pytest.raises(StageOrder):
        schedule.locate(1, 0)


def test_widths(schedule: ColumnSchedule):
    assert schedule.widths(4) == [Fraction(1), Fraction(1, 4), Fraction(1, 16), Fraction(1, 64)]
    assert level_width("paper-T", 3) == Fraction(1, 16)


def test_module_level_helpers_accept_rules_and_names():
    rule = RuleSpec()
    assert height(rule, 3) == height("paper-T", 3) == 31
    assert layout(rule, 2).copy_offsets == (0, 6, 18, 24)
    assert copies_between(rule, 2, 4) == 16
    assert column_measure(rule, 2) == Fraction(3, 2)
    with pytest.raises(StageOrder):
        copies_between(rule, 4, 2)


@pytest.mark.parametrize(
    "kwargs, constraint",
    [
        (dict(cuts=1, spacer_block_column=1, staircase_column=1), "cuts >= 2"),
        (dict(spacer_block_column=5), "1 <= spacer_block_column <= cuts"),
        (dict(staircase_column=0), "1 <= staircase_column <= cuts"),
        (dict(spacer_block_column=4), "spacer_block_column != staircase_column"),
        (dict(base_width=Fraction(0)), "base_width > 0"),
        (dict(initial_height=0), "initial_height >= 1"),
    ],
)
def test_invalid_rules(kwargs: dict, constraint: str):
    with pytest.raises(InvalidRule) as exc_info:
        validate_rule(RuleSpec(**kwargs))
    assert exc_info.value.constraint == constraint


def test_non_interior_spacer_block_only_warns():
    with pytest.warns(UserWarning, match="not on a middle subcolumn"):
        result = validate_rule(RuleSpec(spacer_block_column=1))
    assert len(result.warnings) == 1


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_are_valid(name: str):
    rule = RuleSpec.preset(name)
    assert validate_rule(rule).warnings == ()
    schedule = ColumnSchedule(rule)
    c = rule.cuts
    for n in range(1, 6):
        assert schedule.height(n + 1) == (c + 1) * schedule.height(n) + 1
        assert schedule.layout(n).staircase_index == schedule.height(n + 1) - 1


def test_initial_height():
    schedule = ColumnSchedule(RuleSpec(initial_height=3))
    assert schedule.heights(3) == [3, 16, 81]
    assert schedule.layout(1).copy_offsets == (0, 3, 9, 12)


def test_json_round_trip(tmp_path):
    rule = RuleSpec(cuts=3, spacer_block_column=2, staircase_column=3, base_width=Fraction(2, 3))
    text = rule.to_json()
    assert json.loads(text)["base_width"] == "2/3"
    assert RuleSpec.from_json(text) == rule
    path = tmp_path / "rule.json"
    path.write_text(text)
    assert load_rule(str(path)) == rule
    assert load_rule("remark-c5") == PRESETS["remark-c5"]


@pytest.mark.parametrize(
    "text, location",
    [
        ('{"cuts": 4}', "$"),
        (
            '{"cuts": 4, "spacer_block_column": 2, "staircase_column": 4, '
            '"base_width": "1/1", "initial_height": 1, "colour": "red"}',
            "$.colour",
        ),
        (
            '{"cuts": "4", "spacer_block_column": 2, "staircase_column": 4, '
            '"base_width": "1/1", "initial_height": 1}',
            "$.cuts",
        ),
        (
            '{"cuts": 4, "spacer_block_column": 2, "staircase_column": 4, '
            '"base_width": 0.5, "initial_height": 1}',
            "$.base_width",
        ),
    ],
)
def test_bad_rule_json(text: str, location: str):
    with pytest.raises(ParseError) as exc_info:
        RuleSpec.from_json(text)
    assert exc_info.value.location == location


def test_unknown_rule_name():
    with pytest.raises(InvalidRule):
        load_rule("no-such-rule")


def test_summary():
    summary = summarize("paper-T", 3)
    assert summary.heights == [1, 6, 31]
    assert summary.layouts[1]["spacer_block"] == [12, 18]
    assert summary.column_measures[-1] == Fraction(31, 16)
