"""Action plans: extraction from raw model text, validation, serialization."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..gridworld import BuildState, Cell, CellStatus

REQUIRED_FIELDS = ("title", "coordinates", "used_coordinates", "reasoning")
OPTIONAL_FIELDS = ("stacked",)


class PlanParseError(ValueError):
    """Base class; each subclass names one kind of defect so callers can re-prompt precisely."""

    kind = "parse_error"


class NoJsonFound(PlanParseError):
    kind = "no_json_found"


class SchemaMismatch(PlanParseError):
    kind = "schema_mismatch"


class NonIntegerCoordinate(PlanParseError):
    kind = "non_integer_coordinate"


class OutOfBounds(PlanParseError):
    kind = "out_of_bounds"


class DuplicateCoordinate(PlanParseError):
    kind = "duplicate_coordinate"


@dataclass(frozen=True)
class ActionPlan:
    title: str
    coordinates: tuple[Cell, ...]
    used_coordinates: tuple[Cell, ...] = ()
    reasoning: str = ""
    stacked: frozenset[Cell] = frozenset()
    # cells dropped by a lenient parse (evaluation scoring only)
    discarded: tuple[Cell, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = {
            "title": self.title,
            "coordinates": [c.as_list() for c in self.coordinates],
            "used_coordinates": [c.as_list() for c in self.used_coordinates],
            "reasoning": self.reasoning,
        }
        if self.stacked:
            d["stacked"] = [c.as_list() for c in sorted(self.stacked)]
        return d


def serialize_plan(plan: ActionPlan) -> str:
    return json.dumps(plan.to_dict(), indent=2)


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_json(raw: str, strict: bool = False) -> dict:
    """Return the first JSON object in ``raw``.

    Lenient mode tolerates code fences and surrounding prose; strict mode
    requires the whole response to be one JSON object.
    """
    if strict:
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise NoJsonFound(f"response is not a JSON document: {exc}") from None
        if not isinstance(obj, dict):
            raise NoJsonFound("response JSON is not an object")
        return obj
    candidates = [m.group(1) for m in _FENCE.finditer(raw)] + [raw]
    decoder = json.JSONDecoder()
    for text in candidates:
        for i, ch in enumerate(text):
            if ch != "{":
                continue
            try:
                obj, _ = decoder.raw_decode(text, i)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict):
                return obj
    raise NoJsonFound("no JSON object found in response")


def _to_cell(value, field_name: str) -> Cell:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaMismatch(f"{field_name}: each coordinate must be an [x, y] pair, got {value!r}")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, int):
            raise NonIntegerCoordinate(f"{field_name}: coordinate {value!r} is not integer-valued")
    return Cell(int(value[0]), int(value[1]))


def _cell_list(obj: dict, key: str) -> list[Cell]:
    value = obj[key]
    if not isinstance(value, list):
        raise SchemaMismatch(f"{key} must be a list of [x, y] pairs")
    return [_to_cell(v, key) for v in value]


def parse_plan(raw: str, pad_size: int, *, strict: bool = False, allow_empty: bool = False,
               drop_out_of_bounds: bool = False) -> ActionPlan:
    """Parse a planner response into an :class:`ActionPlan`.

    ``pad_size`` may also be a GridWorld. ``allow_empty`` accepts an empty
    coordinate list (a re-plan declaring the design finished).
    ``drop_out_of_bounds`` discards out-of-bounds cells into ``plan.discarded``
    instead of raising.
    """
    n = getattr(pad_size, "pad_size", pad_size)
    obj = extract_json(raw, strict=strict)
    missing = [k for k in REQUIRED_FIELDS if k not in obj]
    extra = [k for k in obj if k not in REQUIRED_FIELDS + OPTIONAL_FIELDS]
    if missing or extra:
        raise SchemaMismatch(f"missing fields {missing}, unexpected fields {extra}")
    if not isinstance(obj["title"], str) or not isinstance(obj["reasoning"], str):
        raise SchemaMismatch("title and reasoning must be strings")

    coords = _cell_list(obj, "coordinates")
    used = _cell_list(obj, "used_coordinates")
    stacked = _cell_list(obj, "stacked") if "stacked" in obj else []

    discarded = []
    if drop_out_of_bounds:
        discarded = [c for c in coords if not c.in_bounds(n)]
        coords = [c for c in coords if c.in_bounds(n)]
    for c in coords + used + stacked:
        if not c.in_bounds(n):
            raise OutOfBounds(f"coordinate [{c.x}, {c.y}] outside 0..{n - 1}")

    seen = set()
    for c in coords:
        if c in seen:
            raise DuplicateCoordinate(f"coordinate [{c.x}, {c.y}] appears more than once")
        seen.add(c)
    if not coords and not allow_empty and not discarded:
        raise SchemaMismatch("coordinates must be non-empty")
    stray = [c for c in stacked if c not in seen]
    if stray:
        raise SchemaMismatch(f"stacked cells {[c.as_list() for c in stray]} are not in coordinates")
    overlap = [c for c in coords if c in set(used) and c not in set(stacked)]
    if overlap:
        raise SchemaMismatch(
            f"coordinates {[c.as_list() for c in overlap]} are listed as used but not marked stacked")
    return ActionPlan(obj["title"], tuple(coords), tuple(used), obj["reasoning"],
                      frozenset(stacked), tuple(discarded))


@dataclass(frozen=True)
class Violation:
    kind: str  # "out_of_bounds" | "collision" | "stack_on_free" | "stack_full"
    cell: Cell

    def __str__(self):
        return f"{self.kind}({self.cell.x},{self.cell.y})"


def validate_plan(plan: ActionPlan, state: BuildState) -> list[Violation]:
    """All violations of ``plan`` against ``state``; an empty list means the plan is ok."""
    out = []
    for c in plan.coordinates:
        if not c.in_bounds(state.pad_size):
            out.append(Violation("out_of_bounds", c))
            continue
        status = state.status(c)
        if c in plan.stacked:
            if status is CellStatus.FREE:
                out.append(Violation("stack_on_free", c))
            elif status is CellStatus.STACKED:
                out.append(Violation("stack_full", c))
        elif status is not CellStatus.FREE:
            out.append(Violation("collision", c))
    return out
