"""Seeded placement-error injection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gridworld import MAX_LAYERS, BuildState, Cell

FOUR_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))
PICKUP_DRAWS = 8  # upper bound on pickup tries drawn per attempt


@dataclass(frozen=True)
class ErrorEvent:
    """Raw error draws for one placement attempt; independent of the target cell."""

    attempt: int
    misplaced: bool
    offset_draw: float
    drop_failed: bool
    pickup_failed: tuple[bool, ...]

    def to_dict(self) -> dict:
        return {"attempt": self.attempt, "misplaced": self.misplaced,
                "offset_draw": self.offset_draw, "drop_failed": self.drop_failed,
                "pickup_failed": list(self.pickup_failed)}


@dataclass(frozen=True)
class ErrorModel:
    misplace_prob: float = 0.0
    offsets: tuple[tuple[int, int], ...] = FOUR_NEIGHBORS
    offset_weights: tuple[float, ...] | None = None  # uniform when None
    drop_fail_prob: float = 0.0
    pickup_fail_prob: float = 0.0
    seed: int = 0
    # (attempt, dx, dy): misplace that attempt by exactly this offset
    forced: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        for name in ("misplace_prob", "drop_fail_prob", "pickup_fail_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if not self.offsets:
            raise ValueError("offsets must be non-empty")
        if self.offset_weights is not None:
            if len(self.offset_weights) != len(self.offsets) or min(self.offset_weights) < 0 \
                    or sum(self.offset_weights) <= 0:
                raise ValueError("offset_weights must be non-negative, one per offset")
        object.__setattr__(self, "offsets", tuple(tuple(o) for o in self.offsets))
        object.__setattr__(self, "forced", tuple(tuple(f) for f in self.forced))

    def rng(self, attempt: int) -> np.random.Generator:
        """Independent stream per attempt, so paired runs see identical draws."""
        return np.random.default_rng([int(self.seed), int(attempt)])

    def draw(self, rng: np.random.Generator, attempt: int) -> ErrorEvent:
        u = rng.random(3 + PICKUP_DRAWS)
        forced = {a: (dx, dy) for a, dx, dy in self.forced}
        return ErrorEvent(
            attempt=attempt,
            misplaced=attempt in forced or bool(u[0] < self.misplace_prob),
            offset_draw=float(u[1]),
            drop_failed=bool(u[2] < self.drop_fail_prob),
            pickup_failed=tuple(bool(v < self.pickup_fail_prob) for v in u[3:]),
        )

    def landing_cell(self, event: ErrorEvent, cell: Cell, state: BuildState) -> Cell:
        """Where the block actually lands for this event; out-of-bounds offsets are resampled."""
        if not event.misplaced:
            return cell
        forced = {a: (dx, dy) for a, dx, dy in self.forced}
        if event.attempt in forced:
            dx, dy = forced[event.attempt]
            c = Cell(cell.x + dx, cell.y + dy)
            return c if c.in_bounds(state.pad_size) else cell
        weights = self.offset_weights or (1.0,) * len(self.offsets)
        options = []
        for (dx, dy), w in zip(self.offsets, weights):
            c = Cell(cell.x + dx, cell.y + dy)
            if w > 0 and c.in_bounds(state.pad_size) and state.layers_at(c) < MAX_LAYERS:
                options.append((c, w))
        if not options:
            return cell
        total = sum(w for _, w in options)
        acc = 0.0
        for c, w in options:
            acc += w / total
            if event.offset_draw < acc:
                return c
        return options[-1][0]
