"""The `stacklab` command: one subcommand per operation, reports on stdout.

Exit codes: 0 when every verdict passes, 1 on a verdict failure, 2 on usage or input errors.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger as get_logger
from pathlib import Path
from typing import Optional, Sequence, Union

from simple_parsing import ArgumentParser
from simple_parsing.helpers import choice, field, flag, list_field, subparsers
from simple_parsing.helpers.serialization.serializable import Serializable

from stacklab.cells import Cell, CellSet, check_cell, measure, push_forward, translate_inverse
from stacklab.config.experiment import (
    FORMATS,
    emit_report,
    parse_experiment,
    run_experiment,
    to_rectangle,
    to_rectset,
)
from stacklab.errors import ParseError, StacklabError
from stacklab.lemmas.approximation import double_approx_fraction
from stacklab.lemmas.crescents import crescent
from stacklab.oracle import check_equivalence
from stacklab.products import ExponentVector
from stacklab.render import render_tower, save_tower
from stacklab.rules import ColumnSchedule, as_schedule, load_rule, summarize
from stacklab.utils.fractions import parse_fraction
from stacklab.utils.utils import setup_logging
from stacklab.witness import DEFAULT_STAGE_BOUND, minimal_witness, recipe_witness

logger = get_logger(__name__)


@dataclass
class Command:
    """Options shared by every subcommand."""

    rule: str = "paper-T"
    """ Preset name (paper-T, remark-c3, remark-c5) or path to a rule JSON file. """

    out: str = choice(*FORMATS, default="json")
    """ Report format. """

    verbose: bool = flag(False)
    """ Debug logs (and progress bars) on stderr. """

    def schedule(self) -> ColumnSchedule:
        return as_schedule(load_rule(self.rule))

    def run(self):
        raise NotImplementedError


def _cell(schedule: ColumnSchedule, values: Sequence[int], name: str) -> Cell:
    if len(values) != 2:
        raise ParseError(f"a cell is two integers (stage and index), got {list(values)}", name)
    try:
        return check_cell(schedule, Cell(*values))
    except IndexError as exc:
        raise ParseError(str(exc), name) from exc


def _fraction(text: str, name: str) -> Fraction:
    try:
        return parse_fraction(text)
    except ValueError as exc:
        raise ParseError(str(exc), name) from exc


def _json_arg(text: str, name: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", name) from exc


@dataclass
class Build(Command):
    """Heights, widths and layouts of the columns."""

    stage: int = 3

    def run(self):
        return summarize(self.schedule(), self.stage)


@dataclass
class TranslateReport(Serializable):
    source: Cell
    m: int
    cells: CellSet
    measure: Fraction
    tail: Fraction = Fraction(0)
    inverse_cells: Optional[CellSet] = None
    residual: Optional[Fraction] = None

    @property
    def passed(self) -> bool:
        return True


@dataclass
class Translate(Command):
    """Exact image T^m of a level (and optionally its preimage)."""

    cell: list[int] = list_field(2, 0)
    power: int = 1
    """ The power m of T. """
    inverse: bool = flag(False)
    """ Also compute the resolved part of T^-m of the level. """
    depth: int = 8
    """ Refinements allowed per bottom hit when going backward. """
    max_stage: Optional[int] = field(default=None, alias="--max-stage")

    def run(self):
        schedule = self.schedule()
        source = _cell(schedule, self.cell, "--cell")
        if self.power < 0:
            raise ParseError(f"the power must be >= 0, got {self.power}", "--power")
        if self.depth < 0:
            raise ParseError(f"the depth must be >= 0, got {self.depth}", "--depth")
        result = push_forward(schedule, CellSet((source,)), self.power, max_stage=self.max_stage)
        report = TranslateReport(
            source=source,
            m=self.power,
            cells=result.cells,
            measure=measure(schedule, result.cells),
            tail=result.tail,
        )
        if self.inverse:
            report.inverse_cells, report.residual = translate_inverse(
                schedule, CellSet((source,)), self.power, self.depth
            )
        return report


@dataclass
class Crescent(Command):
    """The crescent of T^{ell h_n + extra} L in the first subcolumn."""

    cell: list[int] = list_field(3, 5)
    ell: int = 1
    extra: int = 0
    depth: Optional[int] = None

    def run(self):
        schedule = self.schedule()
        L = _cell(schedule, self.cell, "--cell")
        if self.ell < 1:
            raise ParseError(f"ell must be >= 1, got {self.ell}", "--ell")
        if self.extra < 0:
            raise ParseError(f"extra must be >= 0, got {self.extra}", "--extra")
        return crescent(schedule, L, self.ell, self.extra, depth=self.depth)


@dataclass
class DoubleApprox(Command):
    """Share of the (1-delta)-full sub-rectangles of a rectangle."""

    cells: str = "[[2, 0], [2, 1], [2, 3]]"
    """ JSON: the set A, a list of cells (r=1) or a list of rectangles. """
    rectangle: str = "[[1, 0]]"
    """ JSON: the rectangle I, a list of cells. """
    stage: int = 2
    delta: str = "1/2"
    tau: str = "50"

    def run(self):
        schedule = self.schedule()
        A = to_rectset(schedule, _json_arg(self.cells, "--cells"), "--cells")
        I = to_rectangle(schedule, _json_arg(self.rectangle, "--rectangle"), "--rectangle")
        return double_approx_fraction(
            schedule,
            A,
            I.factors,
            self.stage,
            _fraction(self.delta, "--delta"),
            tau=_fraction(self.tau, "--tau"),
        )


@dataclass
class Witness(Command):
    """A power H with nu((T^{k_1} x ... x T^{k_r})^H A & B) > 0."""

    mode: str = choice("recipe", "minimal", default="recipe")
    exponents: list[int] = list_field(1)
    """ The exponent vector k. """
    source: str = "[[[2, 0]]]"
    """ JSON: the set A, a list of cells (r=1) or a list of rectangles. """
    target: str = "[[[2, 0]]]"
    """ JSON: the set B. """
    h_max: int = field(default=10, alias="--h-max")
    stage_bound: int = field(default=DEFAULT_STAGE_BOUND, alias="--stage-bound")

    def run(self):
        schedule = self.schedule()
        try:
            k = ExponentVector.of(self.exponents)
        except ValueError as exc:
            raise ParseError(str(exc), "--exponents") from exc
        A = _json_arg(self.source, "--source")
        B = _json_arg(self.target, "--target")
        if self.mode == "minimal":
            return minimal_witness(
                schedule,
                k,
                to_rectangle(schedule, A, "--source"),
                to_rectangle(schedule, B, "--target"),
                h_max=self.h_max,
            )
        return recipe_witness(
            schedule,
            k,
            to_rectset(schedule, A, "--source"),
            to_rectset(schedule, B, "--target"),
            stage_bound=self.stage_bound,
        )


@dataclass
class OracleCheck(Command):
    """Compares `translate` with the interval oracle on C_N."""

    stage: int = 4
    m_max: int = field(default=50, alias="--m-max")
    source_stage: Optional[int] = field(default=None, alias="--source-stage")

    def run(self):
        return check_equivalence(
            self.schedule(),
            self.stage,
            self.m_max,
            source_stage=self.source_stage,
            progress=self.verbose,
        )


@dataclass
class Render(Command):
    """Draws C_n, optionally marking the crescent of a level."""

    stage: int = 2
    crescent: list[int] = list_field()
    """ Highlight the crescent of this level [n, j] of C_stage. """
    ell: int = 1
    format: str = choice("text", "png", "svg", default="text")
    output: Optional[str] = None
    """ Where to save png/svg pictures. """

    def run(self):
        schedule = self.schedule()
        highlight = {}
        if self.crescent:
            L = _cell(schedule, self.crescent, "--crescent")
            report = crescent(schedule, L, self.ell)
            cells = [c for piece in report.pieces for c in piece.cells]
            highlight["crescent"] = CellSet.build(schedule, cells)
        if self.format == "text":
            return render_tower(schedule, self.stage, highlight)
        output = self.output or f"C_{self.stage}.{self.format}"
        save_tower(schedule, self.stage, output, highlight, format=self.format)
        return f"{output}\n"


@dataclass
class Run(Command):
    """Runs an experiment config (JSON file)."""

    experiment: str = ""

    def run(self):
        if not self.experiment:
            raise ParseError("--experiment is required", "--experiment")
        return run_experiment(parse_experiment(Path(self.experiment).read_text()), self.verbose)


@dataclass
class Program:
    command: Union[
        Build, Translate, Crescent, DoubleApprox, Witness, OracleCheck, Render, Run
    ] = subparsers(
        {
            "build": Build,
            "translate": Translate,
            "crescent": Crescent,
            "double-approx": DoubleApprox,
            "witness": Witness,
            "oracle-check": OracleCheck,
            "render": Render,
            "run": Run,
        }
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = ArgumentParser(prog="stacklab", description=__doc__)
    parser.add_arguments(Program, dest="program")
    args = parser.parse_args(argv)
    command: Command = args.program.command
    setup_logging(command.verbose)
    try:
        report = command.run()
    except (StacklabError, ValueError, OSError) as exc:
        # Plain ValueErrors are the preconditions of the library functions.
        print(f"stacklab: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(report, str):
        sys.stdout.write(report)
        return 0
    sys.stdout.write(emit_report(report, command.out))
    passed = getattr(report, "passed", True)
    if not passed:
        logger.warning("Verdict failure.")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
