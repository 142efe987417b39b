"""Color-blob block detector with nearest-centroid id association.

Stands in for a learned detector/tracker: same outputs (boxes with stable ids),
computed from saturated-color connected components inside the pad region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .frames import Frame

SATURATION_MIN = 60
MIN_BLOB_AREA = 16


@dataclass(frozen=True)
class DetectedBlock:
    box: tuple[int, int, int, int]  # x_min, y_min, x_max, y_max (inclusive)
    id: int

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.box
        return (x0 + x1) / 2.0, (y0 + y1) / 2.0


class BlockTracker:
    """Keeps ids stable across frames by greedy nearest-centroid matching."""

    def __init__(self, max_distance: float = 20.0):
        self.max_distance = max_distance
        self._tracks: dict[int, tuple[float, float]] = {}
        self._next_id = 0

    def assign(self, centers: list[tuple[float, float]]) -> list[int]:
        pairs = sorted(
            (math.hypot(c[0] - p[0], c[1] - p[1]), i, tid)
            for i, c in enumerate(centers) for tid, p in self._tracks.items())
        ids: list[int | None] = [None] * len(centers)
        used = set()
        for dist, i, tid in pairs:
            if dist > self.max_distance:
                break
            if ids[i] is None and tid not in used:
                ids[i] = tid
                used.add(tid)
        for i, v in enumerate(ids):
            if v is None:
                ids[i] = self._next_id
                self._next_id += 1
        self._tracks = {tid: centers[i] for i, tid in enumerate(ids)}
        return ids


def detect_blocks(frame: Frame, pad_region, tracker: BlockTracker | None = None
                  ) -> list[DetectedBlock]:
    """Boxes of saturated blobs inside ``pad_region`` = ``(x_min, y_min, x_max, y_max)``."""
    if not frame.is_rgb:
        raise ValueError("detect_blocks needs an RGB frame")
    x0, y0, x1, y1 = (int(round(v)) for v in pad_region)
    crop = frame.pixels[y0:y1 + 1, x0:x1 + 1]
    r, g, b = crop[..., 0], crop[..., 1], crop[..., 2]
    sat = (np.maximum(np.maximum(r, g), b).astype(np.int16)
           - np.minimum(np.minimum(r, g), b))
    mask = np.zeros(frame.pixels.shape[:2], dtype=bool)
    mask[y0:y1 + 1, x0:x1 + 1] = sat >= SATURATION_MIN
    labels, n = ndimage.label(mask)
    boxes = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None or np.count_nonzero(labels[sl] == idx) < MIN_BLOB_AREA:
            continue
        boxes.append((sl[1].start, sl[0].start, sl[1].stop - 1, sl[0].stop - 1))
    boxes.sort(key=lambda b: (b[1], b[0]))
    centers = [((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0) for b in boxes]
    ids = tracker.assign(centers) if tracker is not None else list(range(len(boxes)))
    return [DetectedBlock(b, i) for b, i in zip(boxes, ids)]
