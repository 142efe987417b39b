"""Pickup, dropoff and current-state verification on frames and feature tracks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from ..gridworld import Cell
from .frames import Frame


class VisionError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    """Thresholds in pixels. Defaults match the simulator's default camera
    (40 px cells, 28 px block footprint)."""

    pickup_threshold_T: float = 20.0
    frame_gap: int = 3
    diff_binarize_threshold: int = 25
    eps_d: float = 20.0
    eps_A: float = 470.4

    def __post_init__(self):
        for name in ("pickup_threshold_T", "frame_gap", "diff_binarize_threshold", "eps_d", "eps_A"):
            if not getattr(self, name) > 0:
                raise VisionError(f"{name} must be positive")


@dataclass(frozen=True)
class FeatureTrack:
    point_id: int
    positions: tuple[tuple[float, float], ...]
    times: tuple[int, ...] | None = None  # defaults to 0..len-1

    def __post_init__(self):
        if not self.positions:
            raise VisionError(f"track {self.point_id} has no positions")
        times = tuple(range(len(self.positions))) if self.times is None else tuple(self.times)
        if len(times) != len(self.positions):
            raise VisionError(f"track {self.point_id}: {len(times)} times for "
                              f"{len(self.positions)} positions")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise VisionError(f"track {self.point_id}: times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def at(self, t: int) -> tuple[float, float]:
        try:
            return self.positions[self.times.index(t)]
        except ValueError:
            raise VisionError(f"track {self.point_id} has no position at t={t}") from None


def pickup_detect(tracks, t: int, cfg: DetectorConfig = DetectorConfig()) -> tuple[bool, float]:
    """Sum of upward displacements between ``t`` and ``t + frame_gap`` against the threshold.

    Image rows grow downward, so a point's upward displacement is the negated
    row delta.
    """
    tracks = list(tracks)
    if not tracks:
        raise VisionError("pickup_detect needs at least one track")
    total = 0.0
    for tr in tracks:
        total += -(tr.at(t + cfg.frame_gap)[1] - tr.at(t)[1])
    return total > cfg.pickup_threshold_T, total


def frame_diff(before: Frame, after: Frame) -> Frame:
    if before.pixels.shape != after.pixels.shape:
        raise VisionError(f"frame shapes differ: {before.pixels.shape} vs {after.pixels.shape}")
    d = np.abs(after.pixels.astype(np.int16) - before.pixels.astype(np.int16))
    return Frame(d.astype(np.uint8))


@dataclass(frozen=True, eq=False)
class ChangeRegion:
    mask: np.ndarray  # boolean, True on omega
    centroid: tuple[float, float]  # (c_x, c_y) = (mean column, mean row)
    area: int

    @property
    def omega(self) -> frozenset[tuple[int, int]]:
        ys, xs = np.nonzero(self.mask)
        return frozenset(zip(xs.tolist(), ys.tolist()))

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        ys, xs = np.nonzero(self.mask)
        return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def change_region(D: Frame, cfg: DetectorConfig = DetectorConfig()) -> ChangeRegion | None:
    """Largest 4-connected blob of the binarized difference image, or None."""
    px = D.pixels
    d = np.maximum(np.maximum(px[..., 0], px[..., 1]), px[..., 2]) if D.is_rgb else px
    binary = d > cfg.diff_binarize_threshold
    labels, n = ndimage.label(binary)  # default structure is 4-connected
    if n == 0:
        return None
    sizes = np.bincount(labels.ravel())[1:]
    best = int(np.argmax(sizes)) + 1  # first label wins ties
    mask = labels == best
    ys, xs = np.nonzero(mask)
    mask.setflags(write=False)
    return ChangeRegion(mask, (float(xs.mean()), float(ys.mean())), int(xs.size))


def dropoff_verify(count_before: int, count_after: int, region: ChangeRegion | None,
                   pad_box) -> bool:
    """Detector count went up by one, or the change centroid falls inside ``pad_box``.

    ``pad_box`` is ``(x_min, y_min, x_max, y_max)`` in pixels.
    """
    if count_after == count_before + 1:
        return True
    if region is None:
        return False
    cx, cy = region.centroid
    x0, y0, x1, y1 = pad_box
    return x0 <= cx <= x1 and y0 <= cy <= y1


def _inside_quad(pt, corners, tol=1e-9) -> bool:
    # p0 TL, p1 TR, p3 BR, p2 BL is the boundary walk
    p0, p1, p2, p3 = corners
    ring = [p0, p1, p3, p2]
    signs = []
    for a, b in zip(ring, ring[1:] + ring[:1]):
        cross = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
        if abs(cross) > tol:
            signs.append(cross > 0)
    return all(signs) or not any(signs)


def grid_indices(centroid, corners, pad_size: int) -> tuple[int, int]:
    """Raw ``(x_grid, y_grid)`` with y counted from the top image edge, clamped to the pad."""
    p0, p1, p2, _ = [tuple(map(float, p)) for p in corners]
    den_x = p1[0] - p0[0]
    den_y = p2[1] - p0[1]
    if den_x == 0 or den_y == 0:
        raise VisionError("degenerate pad corners")
    if not _inside_quad(tuple(map(float, centroid)), [p0, p1, p2, tuple(map(float, corners[3]))]):
        raise VisionError(f"centroid {tuple(centroid)} lies outside the pad")
    cx, cy = centroid
    xg = math.floor((cx - p0[0]) / den_x * pad_size)
    yg = math.floor((cy - p0[1]) / den_y * pad_size)
    clamp = lambda v: min(max(v, 0), pad_size - 1)  # noqa: E731
    return clamp(xg), clamp(yg)


def centroid_to_grid(centroid, corners, pad_size: int) -> Cell:
    """Pad cell under an image point.

    ``corners`` are the pad corners in pixels ordered top-left, top-right,
    bottom-left, bottom-right. The image-row index is flipped into the
    bottom-left-origin cell convention.
    """
    xg, yg = grid_indices(centroid, corners, pad_size)
    return Cell(xg, pad_size - 1 - yg)


class StackClass(Enum):
    STACKED = "stacked"
    PLACED_BEHIND = "placed_behind"
    NEW_CELL = "new_cell"


def classify_stack(new_pos, existing, area: float,
                   cfg: DetectorConfig = DetectorConfig()) -> StackClass:
    existing = list(existing)
    if not existing:
        return StackClass.NEW_CELL
    d_min = min(math.hypot(new_pos[0] - p[0], new_pos[1] - p[1]) for p in existing)
    if d_min >= cfg.eps_d:
        return StackClass.NEW_CELL
    return StackClass.STACKED if area < cfg.eps_A else StackClass.PLACED_BEHIND


def nearest_index(point, positions) -> int:
    return min(range(len(positions)),
               key=lambda i: math.hypot(point[0] - positions[i][0], point[1] - positions[i][1]))
