"""Deterministic planner fixtures standing in for a live model.

Each :class:`MockDesign` knows a canonical cell layout and the family of
layouts it is allowed to fall back to (translations, optionally rotations and
mirror images). Given the current scene it returns a completion plan:

1. the first layout in the family that already contains every occupied cell
   is completed (this covers out-of-order placements);
2. otherwise the layout overlapping the occupied cells the most is chosen and
   the stray blocks are absorbed into the design.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gridworld import Cell
from .plan import ActionPlan

# order matters: identity first so the canonical layout wins ties
_ROTATIONS = (
    lambda x, y: (x, y),
    lambda x, y: (-y, x),
    lambda x, y: (-x, -y),
    lambda x, y: (y, -x),
)
_MIRROR = lambda x, y: (-x, y)  # noqa: E731


def _normalize(cells):
    mx = min(x for x, _ in cells)
    my = min(y for _, y in cells)
    return [(x - mx, y - my) for x, y in cells]


@dataclass(frozen=True)
class MockDesign:
    name: str
    cells: tuple[Cell, ...]
    pad_size: int = 5
    translate: bool = True
    rotate: bool = False
    mirror: bool = False
    title: str = ""
    _variants: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.cells:
            raise ValueError(f"design {self.name!r} has no cells")
        if len(set(self.cells)) != len(self.cells):
            raise ValueError(f"design {self.name!r} repeats a cell")
        if not all(c.in_bounds(self.pad_size) for c in self.cells):
            raise ValueError(f"design {self.name!r} does not fit a {self.pad_size} pad")
        object.__setattr__(self, "_variants", tuple(self._enumerate_variants()))

    def _enumerate_variants(self):
        base = [(c.x, c.y) for c in self.cells]
        shapes = []
        for mirrored in ((False, True) if self.mirror else (False,)):
            for rot in (_ROTATIONS if self.rotate else _ROTATIONS[:1]):
                pts = [rot(*(_MIRROR(x, y) if mirrored else (x, y))) for x, y in base]
                shapes.append(pts)
        n = self.pad_size
        out, seen = [], set()
        canon = tuple(self.cells)
        out.append(canon)
        seen.add(frozenset(canon))
        for pts in shapes:
            norm = _normalize(pts)
            w = max(x for x, _ in norm) + 1
            h = max(y for _, y in norm) + 1
            shifts = ([(dx, dy) for dy in range(n - h + 1) for dx in range(n - w + 1)]
                      if self.translate else [])
            if not self.translate:
                # rotations/mirrors about the canonical bounding box only
                ox = min(c.x for c in self.cells)
                oy = min(c.y for c in self.cells)
                if ox + w <= n and oy + h <= n:
                    shifts = [(ox, oy)]
            for dx, dy in shifts:
                v = tuple(Cell(x + dx, y + dy) for x, y in norm)
                key = frozenset(v)
                if key not in seen:
                    seen.add(key)
                    out.append(v)
        return out

    @property
    def variants(self) -> tuple[tuple[Cell, ...], ...]:
        """Acceptable layouts, canonical first, each in build order."""
        return self._variants

    def target_grids(self) -> list[frozenset[Cell]]:
        return [frozenset(v) for v in self._variants]

    def plan_for(self, occupied: frozenset[Cell]) -> ActionPlan:
        """Completion plan for the given occupied footprint."""
        occupied = frozenset(occupied)
        chosen = None
        for v in self._variants:
            if occupied <= set(v):
                chosen, note = v, "continuing the layout around the blocks already placed"
                break
        if chosen is None:
            chosen = max(self._variants, key=lambda v: len(occupied & set(v)))
            note = "re-laying the design to incorporate blocks outside the original layout"
        remaining = tuple(c for c in chosen if c not in occupied)
        used = tuple(sorted(occupied, key=lambda c: (c.y, c.x)))
        if not occupied:
            note = "initial layout"
        return ActionPlan(self.title or self.name, remaining, used, f"{self.name}: {note}")


def _cells(*pairs) -> tuple[Cell, ...]:
    return tuple(Cell(x, y) for x, y in pairs)


def mock_design_library() -> dict[str, MockDesign]:
    """Keyword -> design for the six 5x5 pipeline test designs."""
    designs = [
        MockDesign("square", _cells((1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)),
                   title="Square"),
        MockDesign("cross", _cells((2, 0), (2, 1), (2, 2), (2, 3), (2, 4), (1, 3), (3, 3)),
                   rotate=True, title="Cross"),
        MockDesign("diamond", _cells((2, 1), (3, 2), (2, 3), (1, 2)), title="Diamond"),
        MockDesign("smiley face", _cells((1, 3), (3, 3), (0, 1), (1, 0), (2, 0), (3, 0), (4, 1)),
                   title="Smiley Face"),
        MockDesign("letter l", _cells((1, 4), (1, 3), (1, 2), (1, 1), (2, 1), (3, 1)),
                   title="Letter L"),
        MockDesign("two columns on the left and bottom right corner only",
                   _cells((0, 0), (0, 1), (0, 2), (0, 3), (0, 4),
                          (1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (4, 0)),
                   translate=False, title="Two Columns and Corner"),
    ]
    return {d.name: d for d in designs}


def lookup_design(library: dict[str, MockDesign], request: str) -> MockDesign:
    """Exact (case-insensitive) match first, then the longest keyword contained in the request."""
    key = request.strip().lower()
    lowered = {k.lower(): v for k, v in library.items()}
    if key in lowered:
        return lowered[key]
    hits = [k for k in lowered if k and k in key]
    if not hits:
        raise KeyError(f"no mock design matches {request!r}; available: {sorted(library)}")
    return lowered[max(hits, key=len)]
