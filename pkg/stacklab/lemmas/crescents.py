"""Crescents: the part of T^{l h_n + c} L that comes back into the first subcolumn of C_n.

Every time a piece of the image wraps around the top of a column it either lands in a spacer or in
a copy; the ones that end up in copy 1 of C_{n+1} (which is C_n itself) form the crescent. A piece
that stepped over p staircase spacers on its way comes back p levels lower than L would have.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from logging import getLogger as get_logger

from simple_parsing.helpers.serialization.serializable import Serializable
from tqdm import tqdm

from stacklab.cells import (
    Cell,
    CellSet,
    SpacerOrigin,
    ancestor_level,
    canonicalize,
    check_cell,
    copy_starts,
    level_masses,
    push_pieces,
    spacer_count,
)
from stacklab.errors import DepthExceeded, StageOrder
from stacklab.rules import RuleLike, as_schedule

logger = get_logger(__name__)


def staircase_sum(ell: int) -> int:
    """Most staircase spacers met by l passes through the columns: 1 + 2 + ... + l."""
    if ell < 1:
        raise ValueError(f"expected ell >= 1, got {ell}")
    return ell * (ell + 1) // 2


@dataclass
class CrescentPiece(Serializable):
    target_level: int
    """ Level of C_n the piece lands in. """

    drop: int
    """ How many levels below L + extra the piece lands, counting the full laps around C_n. """

    staircase_passes: int

    cells: CellSet = field(default_factory=CellSet.empty)

    measure: Fraction = Fraction(0)


@dataclass
class CrescentReport(Serializable):
    source: Cell
    ell: int
    extra: int
    depth: int
    """ Deepest stage the push-forward was allowed to refine to. """

    pieces: list[CrescentPiece] = field(default_factory=list)

    unresolved_tail: Fraction = Fraction(0)

    aggregate: Fraction = Fraction(0)
    """ Total measure of the crescent. """

    source_measure: Fraction = Fraction(0)

    @property
    def top(self) -> list[CrescentPiece]:
        """The pieces with the smallest drop."""
        if not self.pieces:
            return []
        smallest = min(p.drop for p in self.pieces)
        return [p for p in self.pieces if p.drop == smallest]

    @property
    def top_measure(self) -> Fraction:
        return sum((p.measure for p in self.top), Fraction(0))

    @property
    def displacement_law_holds(self) -> bool:
        return all(p.drop == p.staircase_passes for p in self.pieces)

    @property
    def passed(self) -> bool:
        return self.displacement_law_holds


def crescent(
    rule: RuleLike,
    L: Cell,
    ell: int,
    extra: int = 0,
    depth: int | None = None,
    strict: bool = False,
) -> CrescentReport:
    """Computes the L-crescent of T^{ell * h_n + extra} L, grouped by (target level, passes).

    `depth` is the deepest stage the push-forward may refine to (n + ell + 4 by default); the mass
    that would need to go deeper is reported as `unresolved_tail`, or raises `DepthExceeded` when
    `strict` is set.
    """
    schedule = as_schedule(rule)
    L = check_cell(schedule, Cell(*L))
    if ell < 1 or extra < 0:
        raise ValueError(f"expected ell >= 1 and extra >= 0, got ell={ell}, extra={extra}")
    n = L.stage
    h = schedule.height(n)
    if depth is None:
        depth = n + ell + 4
    if depth < n:
        raise StageOrder(f"the depth bound ({depth}) is before the stage of {L}")
    M = ell * h + extra
    pieces, tail = push_pieces(schedule, [L], M, max_stage=depth)
    if tail and strict:
        raise DepthExceeded(f"T^{M} of {L} doesn't resolve within stage {depth}", tail=tail)

    copy_one = schedule.layout(n).copy_offsets[0]
    groups: dict[tuple[int, int, int], list[Cell]] = {}
    for piece in pieces:
        if piece.stage == n:
            # Never wrapped: its copy-1 sublevel is in C_{n,1}.
            piece = Cell(n + 1, copy_one + piece.index)
        level = ancestor_level(schedule, piece, n + 1)
        if isinstance(level, SpacerOrigin) or not copy_one <= level < copy_one + h:
            continue
        target = level - copy_one
        lo = piece.index - M
        passes, blocks = spacer_count(schedule, piece.stage, lo, piece.index, above=n)
        laps = copy_starts(schedule, piece.stage, lo, piece.index, n)
        # Levels of C_n moved through, minus the whole copies of C_n wrapped around.
        drop = L.index + M - blocks - laps * h - target
        groups.setdefault((target, drop, passes), []).append(piece)

    report_pieces = []
    for (target, drop, passes), cells in groups.items():
        cellset = canonicalize(schedule, cells, disjoint=True)
        report_pieces.append(
            CrescentPiece(
                target_level=target,
                drop=drop,
                staircase_passes=passes,
                cells=cellset,
                measure=sum((schedule.level_width(c.stage) for c in cells), Fraction(0)),
            )
        )
    report_pieces.sort(key=lambda p: (p.drop, p.staircase_passes, p.target_level))
    aggregate = sum((p.measure for p in report_pieces), Fraction(0))
    logger.debug(
        f"Crescent of {L} (ell={ell}, extra={extra}): {len(report_pieces)} groups, "
        f"measure {aggregate}, tail {tail}."
    )
    return CrescentReport(
        source=L,
        ell=ell,
        extra=extra,
        depth=depth,
        pieces=report_pieces,
        unresolved_tail=tail,
        aggregate=aggregate,
        source_measure=schedule.level_width(n),
    )


@dataclass
class LevelPair(Serializable):
    source: int
    """ Level I of C_n. """
    target: int
    """ Level J = I - distance. """
    distance: int
    measure: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.measure >= self.bound


@dataclass
class PerLevelReport(Serializable):
    stage: int
    ell: int
    extra: int
    pairs: list[LevelPair] = field(default_factory=list)
    failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0


def per_level_bound(
    rule: RuleLike,
    n: int,
    ell: int,
    extra: int | None = None,
    levels: list[int] | None = None,
    max_stage: int | None = None,
    progress: bool = False,
) -> PerLevelReport:
    """Checks mu(T^{ell h_n + c} I & J) >= mu(J) / 8^{ell + d + c} for every J at distance d below I.

    `extra` is c, s_ell + 1 by default. `levels` restricts the levels I that are scanned.
    The push-forwards are exact unless `max_stage` is given.
    """
    schedule = as_schedule(rule)
    if extra is None:
        extra = staircase_sum(ell) + 1
    h = schedule.height(n)
    M = ell * h + extra
    width = schedule.level_width(n)
    sources = list(range(h)) if levels is None else levels
    report = PerLevelReport(stage=n, ell=ell, extra=extra)
    for i in tqdm(sources, desc=f"per-level n={n} ell={ell}", disable=not progress):
        pieces, _ = push_pieces(schedule, [Cell(n, i)], M, max_stage=max_stage)
        masses, _ = level_masses(schedule, pieces, n)
        for d in range(i + 1):
            pair = LevelPair(
                source=i,
                target=i - d,
                distance=d,
                measure=masses.get(i - d, Fraction(0)),
                bound=width / Fraction(8) ** (ell + d + extra),
            )
            if not pair.holds:
                report.failures += 1
            report.pairs.append(pair)
    logger.info(f"Per-level bound at n={n}, ell={ell}: {report.failures} failing pairs.")
    return report
