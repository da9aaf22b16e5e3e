"""Experiment configs: parsing (with locations in the errors), running, and report output."""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from functools import singledispatch
from logging import getLogger as get_logger
from typing import Any, Optional, Union

import pandas as pd
from simple_parsing.helpers import choice, list_field
from simple_parsing.helpers.serialization import encode
from simple_parsing.helpers.serialization.serializable import Serializable

from stacklab.cells import Cell, CellSet, check_cell
from stacklab.errors import ParseError
from stacklab.lemmas.approximation import double_approx_fraction
from stacklab.lemmas.crescents import CrescentReport, PerLevelReport, crescent
from stacklab.oracle import EmbeddingTable, EquivalenceReport, check_equivalence
from stacklab.products import ExponentVector, Rectangle, RectSet
from stacklab.rules import ColumnSchedule, RuleSpec, as_schedule, load_rule
from stacklab.utils.fractions import parse_fraction
from stacklab.witness import DEFAULT_STAGE_BOUND, minimal_witness, recipe_witness

logger = get_logger(__name__)

MODES = ("witness-recipe", "minimal-witness", "crescent", "double-approx", "oracle-check")
FORMATS = ("json", "csv")

REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    "witness-recipe": ("exponents", "A", "B"),
    "minimal-witness": ("exponents", "A", "B"),
    "crescent": ("cell",),
    "double-approx": ("A", "rectangle", "stage"),
    "oracle-check": ("stage",),
}


@dataclass
class Experiment(Serializable):
    """One experiment: a mode, a rule, and the inputs that mode needs."""

    mode: str = choice(*MODES, default="witness-recipe")

    rule: Union[str, dict] = "paper-T"
    """ Preset name, path to a rule JSON file, or the rule itself as a mapping. """

    exponents: list[int] = list_field()
    """ Exponent vector k (nonzero integers), for the witness modes. """

    A: list = list_field()
    """ Rectangles of levels, each a list of [n, j] cells. A plain list of cells is an r=1 set. """

    B: list = list_field()

    cell: list[int] = list_field()
    """ The level [n, j] whose crescent is computed. """

    rectangle: list = list_field()
    """ The rectangle I (list of [n, j]) scanned by the double approximation. """

    stage: Optional[int] = None
    """ Table stage (oracle-check) or scan stage (double-approx). """

    source_stage: Optional[int] = None

    ell: int = 1

    extra: int = 0

    delta: str = "1/2"

    tau: str = "50"

    depth: Optional[int] = None

    h_max: int = 10

    m_max: int = 50

    stage_bound: int = DEFAULT_STAGE_BOUND

    @classmethod
    def from_mapping(cls, data: Any, location: str = "$") -> Experiment:
        """Validates a mapping (e.g. loaded JSON or a Hydra config) into an Experiment."""
        if not isinstance(data, dict):
            raise ParseError("an experiment must be an object", location)
        known = {f.name: f for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ParseError(f"unknown field {key!r}", f"{location}.{key}")
        values = dict(data)
        mode = values.get("mode", "witness-recipe")
        if mode not in MODES:
            raise ParseError(f"mode must be one of {list(MODES)}, got {mode!r}", f"{location}.mode")
        for key in REQUIRED_FIELDS[mode]:
            if values.get(key) in (None, [], ""):
                raise ParseError(f"mode {mode!r} needs {key!r}", f"{location}.{key}")

        for key in ("stage", "source_stage", "depth"):
            if values.get(key) is not None:
                _expect_int(values[key], f"{location}.{key}")
        for key in ("ell", "extra", "h_max", "m_max", "stage_bound"):
            if key in values:
                _expect_int(values[key], f"{location}.{key}")
        for key in ("delta", "tau"):
            if key in values:
                try:
                    parse_fraction(values[key])
                except ValueError as exc:
                    raise ParseError(str(exc), f"{location}.{key}") from exc
                values[key] = str(values[key])

        rule = values.get("rule", "paper-T")
        if isinstance(rule, dict):
            RuleSpec.from_json_dict(rule, f"{location}.rule")
        elif not isinstance(rule, str):
            raise ParseError("a rule is a preset name, a path or an object", f"{location}.rule")

        exponents = values.get("exponents", [])
        if not isinstance(exponents, list):
            raise ParseError("expected a list of integers", f"{location}.exponents")
        for i, k_i in enumerate(exponents):
            _expect_int(k_i, f"{location}.exponents[{i}]")
            if k_i == 0:
                raise ParseError("exponents must be nonzero", f"{location}.exponents[{i}]")

        for key in ("A", "B", "rectangle"):
            if key in values:
                _expect_cells(values[key], f"{location}.{key}")
        if "cell" in values and values["cell"]:
            _expect_cell(values["cell"], f"{location}.cell")
        return cls(**values)


def _expect_int(value: Any, location: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"expected an integer, got {value!r}", location)


def _expect_cell(value: Any, location: str) -> None:
    if not (isinstance(value, list) and len(value) == 2):
        raise ParseError(f"expected a cell [n, j], got {value!r}", location)
    for i, v in enumerate(value):
        _expect_int(v, f"{location}[{i}]")


def _is_cell(value: Any) -> bool:
    return (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    )


def _expect_cells(value: Any, location: str) -> None:
    """Accepts a list of cells or a list of rectangles (lists of cells)."""
    if not isinstance(value, list):
        raise ParseError("expected a list", location)
    for i, item in enumerate(value):
        if _is_cell(item):
            continue
        if not isinstance(item, list) or not item:
            raise ParseError(f"expected a cell or a rectangle, got {item!r}", f"{location}[{i}]")
        for j, cell in enumerate(item):
            _expect_cell(cell, f"{location}[{i}][{j}]")


def parse_experiment(text: str) -> Experiment:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
    return Experiment.from_mapping(data)


def experiment_rule(experiment: Experiment) -> ColumnSchedule:
    if isinstance(experiment.rule, dict):
        return as_schedule(RuleSpec.from_json_dict(experiment.rule))
    return as_schedule(load_rule(experiment.rule))


def to_rectset(rule, value: list, location: str = "$") -> RectSet:
    """A list of cells (r=1) or a list of rectangles, as a RectSet."""
    schedule = as_schedule(rule)
    try:
        if all(_is_cell(item) for item in value):
            cells = CellSet.build(schedule, value)
            return RectSet.from_rectangles(schedule, [[c] for c in cells])
        return RectSet.from_rectangles(schedule, [Rectangle.of(schedule, r) for r in value])
    except (IndexError, ValueError) as exc:
        raise ParseError(str(exc), location) from exc


def to_rectangle(rule, value: list, location: str = "$") -> Rectangle:
    """A single rectangle, given either as [[n, j], ...] or as a one-element list of rectangles."""
    if len(value) == 1 and not _is_cell(value[0]):
        value = value[0]
    try:
        return Rectangle.of(rule, value)
    except (IndexError, ValueError) as exc:
        raise ParseError(str(exc), location) from exc


def run_experiment(experiment: Experiment, progress: bool = False):
    """Runs an experiment and returns its report. Every report has a `passed` verdict."""
    schedule = experiment_rule(experiment)
    mode = experiment.mode
    logger.info(f"Running a {mode} experiment on {schedule.rule}")
    if mode == "witness-recipe":
        return recipe_witness(
            schedule,
            ExponentVector.of(experiment.exponents),
            to_rectset(schedule, experiment.A, "$.A"),
            to_rectset(schedule, experiment.B, "$.B"),
            stage_bound=experiment.stage_bound,
        )
    if mode == "minimal-witness":
        return minimal_witness(
            schedule,
            ExponentVector.of(experiment.exponents),
            to_rectangle(schedule, experiment.A, "$.A"),
            to_rectangle(schedule, experiment.B, "$.B"),
            h_max=experiment.h_max,
        )
    if mode == "crescent":
        try:
            L = check_cell(schedule, Cell(*experiment.cell))
        except IndexError as exc:
            raise ParseError(str(exc), "$.cell") from exc
        return crescent(schedule, L, experiment.ell, experiment.extra, depth=experiment.depth)
    if mode == "double-approx":
        assert experiment.stage is not None
        return double_approx_fraction(
            schedule,
            to_rectset(schedule, experiment.A, "$.A"),
            to_rectangle(schedule, experiment.rectangle, "$.rectangle").factors,
            experiment.stage,
            parse_fraction(experiment.delta),
            tau=parse_fraction(experiment.tau),
        )
    assert mode == "oracle-check" and experiment.stage is not None
    return check_equivalence(
        schedule,
        experiment.stage,
        experiment.m_max,
        source_stage=experiment.source_stage,
        progress=progress,
    )


def _flatten(value: Any, prefix: str = "") -> dict[str, Any]:
    if isinstance(value, dict):
        row: dict[str, Any] = {}
        for key, sub in value.items():
            row.update(_flatten(sub, f"{prefix}.{key}" if prefix else str(key)))
        return row
    if isinstance(value, list):
        return {prefix: json.dumps(value)}
    return {prefix: value}


@singledispatch
def report_rows(report: Any) -> list[dict[str, Any]]:
    """Rows of the CSV form of a report. By default, one row with the flattened fields."""
    return [_flatten(encode(report))]


@report_rows.register(CrescentReport)
def _crescent_rows(report: CrescentReport) -> list[dict[str, Any]]:
    header = {
        "source": json.dumps(encode(report.source)),
        "ell": report.ell,
        "extra": report.extra,
        "unresolved_tail": encode(report.unresolved_tail),
    }
    return [{**header, **_flatten(encode(piece))} for piece in report.pieces] or [header]


@report_rows.register(PerLevelReport)
def _per_level_rows(report: PerLevelReport) -> list[dict[str, Any]]:
    return [{"stage": report.stage, "ell": report.ell, **encode(pair)} for pair in report.pairs]


@report_rows.register(EquivalenceReport)
def _equivalence_rows(report: EquivalenceReport) -> list[dict[str, Any]]:
    header = {"stage": report.stage, "source_stage": report.source_stage, "checked": report.checked}
    return [{**header, **_flatten(encode(m))} for m in report.mismatches] or [header]


@report_rows.register(EmbeddingTable)
def _table_rows(report: EmbeddingTable) -> list[dict[str, Any]]:
    return report.to_frame().to_dict(orient="records")


def emit_report(report: Any, format: str = "json") -> str:
    """Deterministic text form of a report (or of an Experiment)."""
    if format == "json":
        if isinstance(report, EmbeddingTable):
            return json.dumps(report_rows(report), indent=2) + "\n"
        return json.dumps(encode(report), indent=2) + "\n"
    if format == "csv":
        return pd.DataFrame(report_rows(report)).to_csv(index=False)
    raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
