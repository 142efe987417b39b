"""Deterministic overview-camera raster of the pad and its blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gridworld import BuildState, Cell
from ..vision.detectors import DetectorConfig
from ..vision.frames import Frame

BACKGROUND = (200, 200, 200)
PAD = (150, 150, 150)
GRID_LINE = (110, 110, 110)
NOTCH = (40, 40, 40)
PALETTE = (
    (220, 40, 40), (40, 170, 60), (40, 80, 220), (230, 200, 30),
    (200, 60, 200), (30, 190, 200), (240, 130, 20), (120, 40, 180),
)


@dataclass(frozen=True)
class Camera:
    """Top-down camera: pixels per cell, border around the pad, block insets.

    A second-layer block shows only its top face, drawn inset and shifted by
    ``stack_offset_px`` to mimic the projection of a block one layer up.
    """

    px_per_cell: int = 40
    margin_px: int = 20
    inset_px: int = 6
    stack_inset_px: int = 10
    stack_offset_px: tuple[int, int] = (-2, -4)

    def __post_init__(self):
        if self.px_per_cell <= 2 * self.stack_inset_px or self.inset_px < 1:
            raise ValueError("camera insets leave no block area")
        dx, dy = self.stack_offset_px
        if self.stack_inset_px - max(abs(dx), abs(dy)) < self.inset_px:
            raise ValueError("stacked top face must stay within the block below")

    def image_size(self, pad_size: int) -> tuple[int, int]:
        side = 2 * self.margin_px + pad_size * self.px_per_cell
        return side, side  # width, height

    def pad_corners(self, pad_size: int):
        """Pad corners in pixels: top-left, top-right, bottom-left, bottom-right."""
        m, s = self.margin_px, pad_size * self.px_per_cell
        return ((m, m), (m + s, m), (m, m + s), (m + s, m + s))

    def pad_box(self, pad_size: int) -> tuple[int, int, int, int]:
        m, s = self.margin_px, pad_size * self.px_per_cell
        return (m, m, m + s - 1, m + s - 1)

    def block_footprint_px(self) -> int:
        side = self.px_per_cell - 2 * self.inset_px
        return side * side

    def cell_origin(self, cell: Cell, pad_size: int) -> tuple[int, int]:
        """Top-left pixel (col, row) of a cell."""
        row = pad_size - 1 - cell.y
        return (self.margin_px + cell.x * self.px_per_cell,
                self.margin_px + row * self.px_per_cell)

    def detector_config(self, **overrides) -> DetectorConfig:
        params = dict(eps_d=self.px_per_cell / 2.0, eps_A=0.6 * self.block_footprint_px())
        params.update(overrides)
        return DetectorConfig(**params)


def block_color(step_index: int, avoid=None) -> tuple[int, int, int]:
    color = PALETTE[step_index % len(PALETTE)]
    if avoid is not None and color == avoid:
        color = PALETTE[(step_index + 1) % len(PALETTE)]
    return color


def render_world(world, state: BuildState, camera: Camera = Camera()) -> Frame:
    """Raster of the pad region; ``world`` may be None or a GridWorld checked against the state."""
    if world is not None and world.pad_size != state.pad_size:
        raise ValueError(f"world pad_size {world.pad_size} != state pad_size {state.pad_size}")
    n = state.pad_size
    w, h = camera.image_size(n)
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    m, s, p = camera.margin_px, n * camera.px_per_cell, camera.px_per_cell
    img[m:m + s, m:m + s] = PAD
    for k in range(n + 1):
        line = min(m + k * p, m + s - 1)
        img[m:m + s, line] = GRID_LINE
        img[line, m:m + s] = GRID_LINE
    for i in range(n + 1):
        for j in range(n + 1):
            cx, cy = min(m + i * p, m + s - 1), min(m + j * p, m + s - 1)
            img[max(cy - 1, 0):cy + 2, max(cx - 1, 0):cx + 2] = NOTCH

    base_colors: dict[Cell, tuple[int, int, int]] = {}
    for pl in state.placed:
        x0, y0 = camera.cell_origin(pl.cell, n)
        if pl.layer == 0:
            color = block_color(pl.step_index)
            base_colors[pl.cell] = color
            a, b = camera.inset_px, p - camera.inset_px
            img[y0 + a:y0 + b, x0 + a:x0 + b] = color
        else:
            color = block_color(pl.step_index, avoid=base_colors.get(pl.cell))
            dx, dy = camera.stack_offset_px
            a, b = camera.stack_inset_px, p - camera.stack_inset_px
            img[y0 + a + dy:y0 + b + dy, x0 + a + dx:x0 + b + dx] = color
    return Frame(img)
