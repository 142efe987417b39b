"""Synthetic frames for the vision tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from aerobuild.dronesim.render import Camera, render_world
from aerobuild.gridworld import BuildState, Cell, apply_placement
from aerobuild.vision import Frame


def single_block_frames(cell: Cell, n: int = 5, camera: Camera = Camera()):
    before = BuildState.empty(n)
    return render_world(None, before, camera), render_world(None, apply_placement(before, cell),
                                                            camera)


def stacked_fixture(cell: Cell, n: int = 5, camera: Camera = Camera()):
    """Frames around stacking a second block on ``cell``, plus the base block's pixel centre."""
    base = apply_placement(BuildState.empty(n), cell)
    after = apply_placement(base, cell, stacked=True)
    x0, y0 = camera.cell_origin(cell, n)
    centre = (x0 + (camera.px_per_cell - 1) / 2.0, y0 + (camera.px_per_cell - 1) / 2.0)
    return render_world(None, base, camera), render_world(None, after, camera), centre


def placed_behind_fixture(rng: np.random.Generator, camera: Camera = Camera(), n: int = 5):
    """A full-size block drawn next to, and partly overlapping, an existing block.

    Its centroid lies within a few pixels of the existing block, but the changed
    area is a whole footprint.
    """
    cell = Cell(int(rng.integers(1, n - 1)), int(rng.integers(1, n - 1)))
    before = render_world(None, apply_placement(BuildState.empty(n), cell), camera)
    x0, y0 = camera.cell_origin(cell, n)
    a = camera.inset_px
    side = camera.px_per_cell - 2 * a
    centre = (x0 + a + (side - 1) / 2.0, y0 + a + (side - 1) / 2.0)
    limit = camera.detector_config().eps_d * 0.8
    while True:
        dx, dy = rng.integers(-int(limit), int(limit) + 1, 2)
        if 4 <= np.hypot(dx, dy) < limit:
            break
    px = before.pixels.copy()
    r0, c0 = y0 + a + int(dy), x0 + a + int(dx)
    px[r0:r0 + side, c0:c0 + side] = (250, 250, 10)  # behind block shows as a full square
    return before, Frame(px), centre
