"""Pictures of a column C_n: its copies, spacer block and staircase spacer, plus highlighted cells."""
from __future__ import annotations

from fractions import Fraction
from logging import getLogger as get_logger
from typing import Mapping

from matplotlib.figure import Figure
from matplotlib.patches import Rectangle as Patch

from stacklab.cells import CellSet, SpacerOrigin, ancestor_level, descendants
from stacklab.errors import TooTall
from stacklab.rules import RuleLike, SegmentKind, as_schedule
from stacklab.utils.fractions import format_fraction

logger = get_logger(__name__)

MAX_ROWS = 10**4

SEGMENT_COLORS = {
    "base": "tab:blue",
    SegmentKind.COPY: "tab:blue",
    SegmentKind.BLOCK: "tab:gray",
    SegmentKind.STAIRCASE: "tab:red",
}


def _row_labels(rule: RuleLike, n: int) -> list[tuple[object, str]]:
    schedule = as_schedule(rule)
    if n == 1:
        return [("base", f"level {j}") for j in range(schedule.height(1))]
    lay = schedule.layout(n - 1)
    labels = []
    for j in range(schedule.height(n)):
        location = lay.locate(j)
        if location.kind is SegmentKind.COPY:
            labels.append((location.kind, f"copy {location.copy + 1} level {location.offset}"))
        elif location.kind is SegmentKind.BLOCK:
            labels.append((location.kind, f"spacer {location.offset}"))
        else:
            labels.append((location.kind, "staircase"))
    return labels


def highlighted_levels(rule: RuleLike, n: int, cells: CellSet) -> set[int]:
    """The levels of C_n that meet a cell set."""
    schedule = as_schedule(rule)
    levels: set[int] = set()
    for cell in cells:
        if cell.stage < n:
            levels.update(descendants(schedule, cell, n))
            continue
        level = ancestor_level(schedule, cell, n)
        if not isinstance(level, SpacerOrigin):
            levels.add(level)
    return levels


def _check_height(rule: RuleLike, n: int) -> int:
    h = as_schedule(rule).height(n)
    if h > MAX_ROWS:
        raise TooTall(f"C_{n} has {h} levels, can't draw more than {MAX_ROWS}")
    return h


def render_tower(rule: RuleLike, n: int, highlight: Mapping[str, CellSet] | None = None) -> str:
    """Monospaced diagram of C_n, top level first. Each highlighted set gets a marker column."""
    schedule = as_schedule(rule)
    h = _check_height(schedule, n)
    highlight = dict(highlight or {})
    marked = {name: highlighted_levels(schedule, n, cells) for name, cells in highlight.items()}
    labels = _row_labels(schedule, n)
    label_width = max(len(text) for _, text in labels)
    index_width = len(str(h - 1))
    lines = [f"C_{n}  height {h}  width {format_fraction(schedule.level_width(n))}"]
    if marked:
        legend = "  ".join(f"{i + 1}={name}" for i, name in enumerate(marked))
        lines.append(f"marks: {legend}")
    for j in reversed(range(h)):
        _, text = labels[j]
        marks = "".join(
            str(i + 1) if j in levels else "." for i, levels in enumerate(marked.values())
        )
        line = f"{j:>{index_width}} | {text:<{label_width}} |"
        if marks:
            line += f" {marks}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def plot_tower(rule: RuleLike, n: int, highlight: Mapping[str, CellSet] | None = None) -> Figure:
    """Same picture as `render_tower`, drawn with matplotlib (levels as stacked bars)."""
    schedule = as_schedule(rule)
    h = _check_height(schedule, n)
    highlight = dict(highlight or {})
    width = float(schedule.level_width(n))
    figure = Figure(figsize=(4, max(3, min(h, 200) * 0.08 + 1)))
    axes = figure.add_subplot()
    for j, (kind, _) in enumerate(_row_labels(schedule, n)):
        axes.add_patch(
            Patch((0, j), width, 1, facecolor=SEGMENT_COLORS[kind], edgecolor="white", linewidth=0.3)
        )
    for i, (name, cells) in enumerate(highlight.items()):
        color = f"C{(i + 2) % 10}"
        for j in sorted(highlighted_levels(schedule, n, cells)):
            axes.add_patch(
                Patch((0, j), width, 1, fill=False, hatch="//", edgecolor=color, label=name)
            )
    axes.set_xlim(0, width)
    axes.set_ylim(0, h)
    axes.set_xlabel(f"width {format_fraction(Fraction(schedule.level_width(n)))}")
    axes.set_ylabel("level")
    axes.set_title(f"C_{n}")
    if highlight:
        handles, names = axes.get_legend_handles_labels()
        unique = dict(zip(names, handles))
        axes.legend(unique.values(), unique.keys(), loc="upper right")
    return figure


def save_tower(
    rule: RuleLike,
    n: int,
    path: str,
    highlight: Mapping[str, CellSet] | None = None,
    format: str | None = None,
) -> None:
    figure = plot_tower(rule, n, highlight)
    figure.savefig(path, format=format, bbox_inches="tight")
    logger.info(f"Saved the picture of C_{n} to {path}")

