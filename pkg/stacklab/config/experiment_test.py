from __future__ import annotations

import json
from fractions import Fraction

import pytest

from stacklab.errors import ParseError
from stacklab.lemmas.crescents import CrescentReport
from stacklab.config.experiment import (
    Experiment,
    emit_report,
    parse_experiment,
    run_experiment,
    to_rectangle,
    to_rectset,
)


@pytest.mark.parametrize(
    "text, location",
    [
        ('{"mode": "crescent", "cell": [3, 5], "colour": 1}', "$.colour"),
        ('{"mode": "crescent"}', "$.cell"),
        ('{"mode": "sweep"}', "$.mode"),
        ('{"exponents": [1, 0], "A": [[2, 0]], "B": [[2, 0]]}', "$.exponents[1]"),
        ('{"exponents": [1], "A": [[2, 0], [2]], "B": [[2, 0]]}', "$.A[1][0]"),
        ('{"mode": "crescent", "cell": [3, 5], "ell": "1"}', "$.ell"),
        ('{"mode": "oracle-check", "stage": 3, "delta": 0.5}', "$.delta"),
        ('{"mode": "crescent", "cell": [3, 5], "rule": {"cuts": 4}}', "$.rule"),
        ('[1, 2]', "$"),
    ],
)
def test_parse_errors_point_at_the_field(text: str, location: str):
    with pytest.raises(ParseError) as exc_info:
        parse_experiment(text)
    assert exc_info.value.location == location


def test_bad_json():
    with pytest.raises(ParseError) as exc_info:
        parse_experiment('{"mode": ')
    assert exc_info.value.location.startswith("line 1")


def test_defaults():
    experiment = parse_experiment('{"exponents": [1], "A": [[[2, 0]]], "B": [[[2, 0]]]}')
    assert experiment.mode == "witness-recipe"
    assert experiment.rule == "paper-T"
    assert experiment.delta == "1/2"


def test_inline_rule():
    rule = {
        "cuts": 3,
        "spacer_block_column": 2,
        "staircase_column": 3,
        "base_width": "1/1",
        "initial_height": 1,
    }
    experiment = Experiment.from_mapping({"mode": "crescent", "cell": [2, 3], "rule": rule})
    report = run_experiment(experiment)
    assert isinstance(report, CrescentReport)
    assert report.source_measure == Fraction(1, 3)


@pytest.mark.parametrize(
    "data",
    [
        {"exponents": [1, -1], "A": [[[2, 1], [2, 0]]], "B": [[[2, 0], [2, 2]]]},
        {"mode": "minimal-witness", "exponents": [2], "A": [[1, 0]], "B": [[1, 0]], "h_max": 5},
        {"mode": "crescent", "cell": [3, 5], "ell": 2, "extra": 1, "depth": 9},
        {
            "mode": "double-approx",
            "A": [[2, 0], [2, 1]],
            "rectangle": [[1, 0]],
            "stage": 2,
            "delta": "1/3",
            "tau": "25",
        },
        {"mode": "oracle-check", "stage": 3, "source_stage": 2, "m_max": 20},
        {
            "mode": "crescent",
            "cell": [2, 3],
            "rule": {
                "cuts": 3,
                "spacer_block_column": 2,
                "staircase_column": 3,
                "base_width": "1/1",
                "initial_height": 1,
            },
        },
    ],
)
def test_emitted_experiments_parse_back(data: dict):
    experiment = Experiment.from_mapping(data)
    text = emit_report(experiment)
    assert parse_experiment(text) == experiment
    assert emit_report(parse_experiment(text)) == text


def test_cells_or_rectangles():
    assert to_rectset("paper-T", [[2, 0], [2, 1]]).arity == 1
    assert len(to_rectset("paper-T", [[2, 0], [2, 1]])) == 2
    assert to_rectset("paper-T", [[[2, 0], [2, 1]]]).arity == 2
    assert to_rectangle("paper-T", [[[2, 0], [2, 1]]]).arity == 2
    assert to_rectangle("paper-T", [[2, 0]]).arity == 1
    with pytest.raises(ParseError):
        to_rectset("paper-T", [[2, 6]], "$.A")
    with pytest.raises(ParseError):
        to_rectset("paper-T", [[[1, 0]], [[2, 0]]], "$.A")


class TestRunAndEmit:
    def test_witness(self):
        experiment = parse_experiment('{"exponents": [1], "A": [[[2, 0]]], "B": [[[2, 0]]]}')
        report = run_experiment(experiment)
        assert report.passed
        data = json.loads(emit_report(report))
        assert data["H"] == 7
        assert data["measure"] == "1/32"
        assert data["placements"][0]["I"] == [2, 0]

    def test_minimal_witness(self):
        experiment = parse_experiment(
            '{"mode": "minimal-witness", "exponents": [1], "A": [[2, 0]], "B": [[2, 0]]}'
        )
        data = json.loads(emit_report(run_experiment(experiment)))
        assert (data["H"], data["measure"]) == (6, "1/8")

    def test_double_approx(self):
        experiment = parse_experiment(
            '{"mode": "double-approx", "A": [[2, 0], [2, 1], [2, 3]], "rectangle": [[1, 0]], '
            '"stage": 2}'
        )
        report = run_experiment(experiment)
        assert report.fraction == Fraction(3, 4)
        assert report.passed

    def test_json_is_deterministic(self):
        experiment = parse_experiment('{"mode": "crescent", "cell": [3, 5]}')
        first = emit_report(run_experiment(experiment))
        assert emit_report(run_experiment(experiment)) == first
        data = json.loads(first)
        assert data["source"] == [3, 5]
        assert data["pieces"][0]["cells"] == [[5, 160], [5, 628]]
        assert data["pieces"][0]["measure"] == "1/128"

    def test_csv(self):
        experiment = parse_experiment('{"mode": "crescent", "cell": [3, 5]}')
        text = emit_report(run_experiment(experiment), "csv")
        header = text.splitlines()[0].split(",")
        assert header[:4] == ["source", "ell", "extra", "unresolved_tail"]
        assert "target_level" in header
        assert "staircase_passes" in header

    def test_oracle_csv_has_one_row_when_everything_matches(self):
        experiment = parse_experiment('{"mode": "oracle-check", "stage": 3, "m_max": 10}')
        report = run_experiment(experiment)
        assert report.passed
        assert len(emit_report(report, "csv").splitlines()) == 2

    def test_unknown_format(self):
        experiment = parse_experiment('{"mode": "crescent", "cell": [3, 5]}')
        with pytest.raises(ValueError):
            emit_report(run_experiment(experiment), "xml")
