"""Discretized build volume, pad occupancy and the o/x scene text."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class GridError(ValueError):
    """Raised for invalid world parameters or illegal placements."""


class CellStatus(Enum):
    FREE = "free"
    OCCUPIED = "occupied"
    STACKED = "stacked"


MAX_LAYERS = 2  # stacked/behind classifier is binary


@dataclass(frozen=True, order=True)
class Cell:
    """Pad cell; (0, 0) is the bottom-left corner, x grows right, y grows up."""

    x: int
    y: int

    def in_bounds(self, pad_size: int) -> bool:
        return 0 <= self.x < pad_size and 0 <= self.y < pad_size

    def as_list(self) -> list[int]:
        return [self.x, self.y]


@dataclass(frozen=True)
class GridWorld:
    dims_cells: tuple[int, int, int]
    cell_size_m: float = 0.01
    pad_size: int = 5
    pad_origin_cell: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if len(self.dims_cells) != 3 or any(int(d) < 1 for d in self.dims_cells):
            raise GridError(f"dims_cells must be three positive integers, got {self.dims_cells}")
        if not self.cell_size_m > 0:
            raise GridError(f"cell_size_m must be positive, got {self.cell_size_m}")
        if self.pad_size < 1:
            raise GridError(f"pad_size must be >= 1, got {self.pad_size}")
        ox, oy = self.pad_origin_cell
        if ox < 0 or oy < 0:
            raise GridError(f"pad_origin_cell must be non-negative, got {self.pad_origin_cell}")
        # dims are (H, W, L); the pad lies in the W x L footprint plane (x along W, y along L)
        _, w, l = self.dims_cells
        if ox + self.pad_size > w or oy + self.pad_size > l:
            raise GridError(
                f"pad_origin_cell {self.pad_origin_cell} with pad_size {self.pad_size} "
                f"exceeds world footprint {w}x{l}"
            )


def new_world(dims_cells, cell_size_m: float = 0.01, pad_size: int = 5,
              pad_origin_cell=(0, 0)) -> GridWorld:
    return GridWorld(tuple(int(d) for d in dims_cells), float(cell_size_m), int(pad_size),
                     tuple(int(c) for c in pad_origin_cell))


@dataclass(frozen=True)
class Placement:
    cell: Cell
    layer: int
    step_index: int


@dataclass(frozen=True)
class BuildState:
    """Immutable pad occupancy plus the ordered ledger of placed blocks."""

    pad_size: int
    placed: tuple[Placement, ...] = field(default=())

    @classmethod
    def empty(cls, pad_size: int) -> "BuildState":
        if pad_size < 1:
            raise GridError(f"pad_size must be >= 1, got {pad_size}")
        return cls(pad_size=pad_size)

    def layers_at(self, cell: Cell) -> int:
        return sum(1 for p in self.placed if p.cell == cell)

    def status(self, cell: Cell) -> CellStatus:
        n = self.layers_at(cell)
        if n == 0:
            return CellStatus.FREE
        return CellStatus.OCCUPIED if n == 1 else CellStatus.STACKED

    @property
    def occupancy(self) -> list[list[CellStatus]]:
        """Row-major grid indexed ``occupancy[y][x]``."""
        grid = [[CellStatus.FREE] * self.pad_size for _ in range(self.pad_size)]
        for p in self.placed:
            grid[p.cell.y][p.cell.x] = (
                CellStatus.STACKED if p.layer == 1 else CellStatus.OCCUPIED)
        return grid

    @property
    def next_step(self) -> int:
        return self.placed[-1].step_index + 1 if self.placed else 0


def apply_placement(state: BuildState, cell: Cell, stacked: bool = False,
                    step_index: int | None = None) -> BuildState:
    if not cell.in_bounds(state.pad_size):
        raise GridError(f"cell ({cell.x},{cell.y}) outside {state.pad_size}x{state.pad_size} pad")
    layers = state.layers_at(cell)
    if stacked:
        if layers == 0:
            raise GridError(f"cannot stack on free cell ({cell.x},{cell.y})")
        if layers >= MAX_LAYERS:
            raise GridError(f"cell ({cell.x},{cell.y}) already holds a stacked block")
        layer = 1
    else:
        if layers:
            raise GridError(f"cell ({cell.x},{cell.y}) is already occupied; pass stacked=True")
        layer = 0
    step = state.next_step if step_index is None else step_index
    if state.placed and step <= state.placed[-1].step_index:
        raise GridError(f"step_index {step} must exceed {state.placed[-1].step_index}")
    return BuildState(state.pad_size, state.placed + (Placement(cell, layer, step),))


def occupied_cells(state: BuildState) -> frozenset[Cell]:
    return frozenset(p.cell for p in state.placed)


def render_scene_text(state: BuildState) -> str:
    n = state.pad_size
    occ = occupied_cells(state)
    rows = []
    for y in range(n - 1, -1, -1):
        rows.append(" ".join("x" if Cell(x, y) in occ else "o" for x in range(n)))
    return "\n".join(rows)


def parse_scene_text(text: str) -> frozenset[Cell]:
    """Inverse of :func:`render_scene_text`: the set of cells marked ``x``."""
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    n = len(rows)
    cells = set()
    for r, row in enumerate(rows):
        if len(row) != n:
            raise GridError(f"scene row {r} has {len(row)} symbols, expected {n}")
        for x, sym in enumerate(row):
            if sym == "x":
                cells.add(Cell(x, n - 1 - r))
            elif sym != "o":
                raise GridError(f"unknown scene symbol {sym!r}")
    return frozenset(cells)


def cells_to_grid(cells, pad_size: int) -> list[list[bool]]:
    """Boolean grid ``g[y][x]`` from an iterable of cells."""
    grid = [[False] * pad_size for _ in range(pad_size)]
    for c in cells:
        grid[c.y][c.x] = True
    return grid


def state_from_cells(cells, pad_size: int) -> BuildState:
    state = BuildState.empty(pad_size)
    for c in cells:
        state = apply_placement(state, c)
    return state
