"""Five-part planner prompt: task, design request, current scene, rules, output schema.

The rules text is a reconstruction; only the task, rules and schema parts are
fixed, the scene is regenerated on every call.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..gridworld import BuildState, CellStatus, GridWorld, render_scene_text

TASK = (
    "You are the planner for a drone that builds designs out of blocks on a square build pad. "
    "Choose the pad cells the drone should place blocks on, in the order they should be placed, "
    "so that the finished pad shows the requested design."
)

RULES = """\
1. Use only integer coordinates [x, y] with 0 <= x < {n} and 0 <= y < {n}.
2. Stay inside the {n}x{n} pad; never output a coordinate outside it.
3. Do not place a block on a cell marked "x" in the current scene unless you also list that cell
   in "stacked"; a stack is at most two blocks high.
4. Do not repeat a coordinate.
5. Place at most one block per listed coordinate; list them in build order.
6. Respond with a single JSON object that follows the output schema and nothing else."""

REPLAN_RULES = """\
7. This is a re-plan. Blocks have already been placed and cannot be moved or removed.
   Build on the existing blocks instead of starting over: keep the requested design, shifting,
   rotating or re-laying it out if needed so that the blocks already on the pad become part of it.
   List only the blocks that still need to be placed; an empty "coordinates" list means the design
   is already complete.
8. Last step report: {failed_step}
9. Cells already occupied (x, y): {used}"""

OUTPUT_SCHEMA = """\
{
  "title": "<short name for the design>",
  "coordinates": [[x, y], ...],
  "used_coordinates": [[x, y], ...],
  "reasoning": "<how the design was laid out>"
}
"coordinates" are the cells to place blocks on, in build order, as [x, y] with x the column and
y the row. "used_coordinates" are the cells already occupied on the pad when you answer.
An optional "stacked": [[x, y], ...] lists cells from "coordinates" that go on top of an existing
block."""


@dataclass(frozen=True)
class PromptParts:
    task: str
    design_request: str
    current_scene: str
    rules: str
    output_schema: str

    def __post_init__(self):
        for name in ("task", "design_request", "current_scene", "rules", "output_schema"):
            if not getattr(self, name).strip():
                raise ValueError(f"prompt part {name!r} is empty")

    def system_text(self) -> str:
        return (f"# Task\n{self.task}\n\n# Rules\n{self.rules}\n\n"
                f"# Output Schema\n{self.output_schema}")

    def user_text(self) -> str:
        return f"# Design Request\n{self.design_request}\n\n# Current Scene\n{self.current_scene}"

    def messages(self) -> list[dict]:
        return [{"role": "system", "content": self.system_text()},
                {"role": "user", "content": self.user_text()}]

    def text(self) -> str:
        return self.system_text() + "\n\n" + self.user_text()


def scene_block(state: BuildState) -> str:
    n = state.pad_size
    preamble = (
        f"The build pad is a {n}x{n} grid of cells. A cell is addressed as [x, y]: x is the "
        f"column from 0 (left) to {n - 1} (right) and y is the row from 0 (bottom) to {n - 1} "
        f"(top), so [0, 0] is the bottom-left cell. The grid below is printed with the top row "
        f"(y = {n - 1}) first. \"o\" is a free cell and \"x\" is a cell a block already occupies."
    )
    return preamble + "\n\n" + render_scene_text(state)


def _pad_size(state: BuildState, grid: GridWorld | None) -> int:
    if grid is not None and grid.pad_size != state.pad_size:
        raise ValueError(f"state pad_size {state.pad_size} != world pad_size {grid.pad_size}")
    return state.pad_size


def build_prompt(design_request: str, state: BuildState, grid: GridWorld | None = None) -> PromptParts:
    if not design_request.strip():
        raise ValueError("design_request must be non-empty")
    n = _pad_size(state, grid)
    return PromptParts(TASK, design_request.strip(), scene_block(state), RULES.format(n=n),
                       OUTPUT_SCHEMA)


def used_coordinates_text(state: BuildState) -> str:
    seen = []
    for p in state.placed:
        if p.cell not in seen:
            seen.append(p.cell)
    items = []
    for c in sorted(seen, key=lambda c: (c.y, c.x)):
        tag = " stacked" if state.status(c) is CellStatus.STACKED else ""
        items.append(f"[{c.x}, {c.y}]{tag}")
    return ", ".join(items) if items else "none"


def build_reprompt(design_request: str, state: BuildState, grid: GridWorld | None,
                   failed_step: str) -> PromptParts:
    base = build_prompt(design_request, state, grid)
    rules = base.rules + "\n" + REPLAN_RULES.format(
        failed_step=failed_step.strip() or "placement did not match the plan",
        used=used_coordinates_text(state))
    return PromptParts(base.task, base.design_request, base.current_scene, rules,
                       base.output_schema)


def build_correction(prompt: PromptParts, error: str) -> PromptParts:
    """Re-issue ``prompt`` quoting a parse/validation problem with the previous answer."""
    rules = (prompt.rules + "\nYour previous answer was rejected: " + error.strip()
             + "\nAnswer again, fixing exactly this problem.")
    return PromptParts(prompt.task, prompt.design_request, prompt.current_scene, rules,
                       prompt.output_schema)
