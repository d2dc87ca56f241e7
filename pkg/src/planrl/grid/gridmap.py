"""ASCII grid maps for the gridworld engine.

One character per cell, row 0 at the top, coordinates are (x, y) with x the
column index. Legend:

    ``#`` wall        ``.`` floor      ``L`` lever      ``P`` trap
    ``T`` treasure    ``G`` goal       ``C`` channel gate
    ``1``/``2``/``3`` key spot for that task variant
    ``B`` box start   ``r``/``b`` agent starts

A trailing ``[regions]`` section names rectangles of cells::

    [regions]
    lower: (1,4)-(5,6)
    lever: (4,5)-(4,5)

The same name may appear on several lines; the region is the union.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

from ..errors import ParseError, ValidationError

Cell = Tuple[int, int]

WALL = "#"
FLOOR = "."
LEVER = "L"
TRAP = "P"
TREASURE = "T"
GOAL = "G"
GATE = "C"
BOX = "B"
AGENT_RED = "r"
AGENT_BLUE = "b"
KEY_CHARS = ("1", "2", "3")

_LEGAL = set("#.LPTGCB rb123".replace(" ", ""))

_REGION_RE = re.compile(
    r"^(?P<name>[A-Za-z_][\w]*)\s*:\s*\((?P<x1>\d+)\s*,\s*(?P<y1>\d+)\)\s*-\s*"
    r"\((?P<x2>\d+)\s*,\s*(?P<y2>\d+)\)$"
)


@dataclass(frozen=True)
class GridMap:
    """Validated static geometry of one environment map."""

    width: int
    height: int
    rows: Tuple[str, ...]
    named_regions: Dict[str, FrozenSet[Cell]]
    region_rects: Tuple[Tuple[str, Tuple[int, int, int, int]], ...]
    walls: FrozenSet[Cell]
    gates: FrozenSet[Cell]
    levers: FrozenSet[Cell]
    traps: FrozenSet[Cell]
    treasures: FrozenSet[Cell]
    goals: FrozenSet[Cell]
    key_spots: Dict[str, FrozenSet[Cell]]
    box_start: Optional[Cell]
    agent_starts: Tuple[Cell, Cell]

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, cell: Cell) -> bool:
        return cell in self.walls or not self.in_bounds(cell)

    def char_at(self, cell: Cell) -> str:
        return self.rows[cell[1]][cell[0]]

    def region(self, name: str) -> FrozenSet[Cell]:
        return self.named_regions[name]


def load_map(text: str) -> GridMap:
    """Parse and validate a map file; raises ParseError / ValidationError."""
    grid_lines, rects = _split_sections(text)
    if not grid_lines:
        raise ParseError("map has no grid rows", line=1)
    width = len(grid_lines[0][1])
    cells: Dict[str, list] = {c: [] for c in "#LPTGCB"}
    key_spots: Dict[str, list] = {k: [] for k in KEY_CHARS}
    starts: Dict[str, Cell] = {}
    for y, (lineno, row) in enumerate(grid_lines):
        if len(row) != width:
            raise ParseError(f"row width {len(row)} != {width}", line=lineno)
        for x, ch in enumerate(row):
            if ch not in _LEGAL:
                raise ParseError(f"unknown cell character {ch!r}", line=lineno, column=x + 1)
            if ch in cells:
                cells[ch].append((x, y))
            elif ch in KEY_CHARS:
                key_spots[ch].append((x, y))
            elif ch in (AGENT_RED, AGENT_BLUE):
                if ch in starts:
                    raise ValidationError(f"duplicate agent start {ch!r}")
                starts[ch] = (x, y)
    height = len(grid_lines)
    rows = tuple(row for _, row in grid_lines)

    if set(starts) != {AGENT_RED, AGENT_BLUE}:
        raise ValidationError("map must contain exactly 2 agent starts ('r' and 'b')")
    if len(cells[BOX]) > 1:
        raise ValidationError("at most one box start allowed")

    walls = frozenset(cells[WALL])
    named_regions: Dict[str, FrozenSet[Cell]] = {}
    acc: Dict[str, set] = {}
    for name, (x1, y1, x2, y2) in rects:
        if x2 < x1 or y2 < y1:
            raise ValidationError(f"region {name!r} rectangle is inverted")
        acc.setdefault(name, set()).update(
            (x, y) for x in range(x1, x2 + 1) for y in range(y1, y2 + 1)
        )
    for name, cellset in acc.items():
        for cell in cellset:
            if not (0 <= cell[0] < width and 0 <= cell[1] < height):
                raise ValidationError(f"region {name!r} extends out of bounds")
            if cell in walls:
                raise ValidationError(f"region {name!r} covers a wall cell {cell}")
        if not cellset:
            raise ValidationError(f"region {name!r} is empty")
        named_regions[name] = frozenset(cellset)

    grid_map = GridMap(
        width=width,
        height=height,
        rows=rows,
        named_regions=named_regions,
        region_rects=tuple((name, rect) for name, rect in rects),
        walls=walls,
        gates=frozenset(cells[GATE]),
        levers=frozenset(cells[LEVER]),
        traps=frozenset(cells[TRAP]),
        treasures=frozenset(cells[TREASURE]),
        goals=frozenset(cells[GOAL]),
        key_spots={k: frozenset(v) for k, v in key_spots.items() if v},
        box_start=cells[BOX][0] if cells[BOX] else None,
        agent_starts=(starts[AGENT_RED], starts[AGENT_BLUE]),
    )
    _check_gates(grid_map)
    return grid_map


def serialize_map(grid_map: GridMap) -> str:
    """Inverse of load_map up to whitespace."""
    lines = list(grid_map.rows)
    if grid_map.region_rects:
        lines.append("")
        lines.append("[regions]")
        for name, (x1, y1, x2, y2) in grid_map.region_rects:
            lines.append(f"{name}: ({x1},{y1})-({x2},{y2})")
    return "\n".join(lines) + "\n"


def _split_sections(text: str):
    grid_lines = []
    rects = []
    in_regions = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not in_regions:
            if line.strip() == "[regions]":
                in_regions = True
                continue
            if not line.strip():
                continue
            grid_lines.append((lineno, line))
        else:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            m = _REGION_RE.match(stripped)
            if not m:
                raise ParseError(f"bad region line {stripped!r}", line=lineno)
            rects.append(
                (
                    m.group("name"),
                    (int(m.group("x1")), int(m.group("y1")), int(m.group("x2")), int(m.group("y2"))),
                )
            )
    return grid_lines, rects


def _check_gates(grid_map: GridMap) -> None:
    # A gate must separate exactly two passable areas: with all gates closed,
    # its passable neighbours must fall into exactly two connected components.
    if not grid_map.gates:
        return
    comp: Dict[Cell, int] = {}
    next_id = 0
    for y in range(grid_map.height):
        for x in range(grid_map.width):
            cell = (x, y)
            if cell in comp or grid_map.is_wall(cell) or cell in grid_map.gates:
                continue
            stack = [cell]
            comp[cell] = next_id
            while stack:
                cx, cy = stack.pop()
                for nx, ny in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                    ncell = (nx, ny)
                    if (
                        ncell not in comp
                        and not grid_map.is_wall(ncell)
                        and ncell not in grid_map.gates
                    ):
                        comp[ncell] = next_id
                        stack.append(ncell)
            next_id += 1
    for gate in sorted(grid_map.gates):
        gx, gy = gate
        sides = {
            comp[n]
            for n in ((gx + 1, gy), (gx - 1, gy), (gx, gy + 1), (gx, gy - 1))
            if n in comp
        }
        if len(sides) != 2:
            raise ValidationError(f"gate {gate} must separate exactly two areas, saw {len(sides)}")
