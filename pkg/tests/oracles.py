"""Independent reference implementations used by the tests.

Nothing here imports the package's own math; each helper is written from the
definitions so it can serve as an oracle.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation via a normalized quaternion."""
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def yaw_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues formula."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def tag_poses(R_cam: np.ndarray, t_cam: np.ndarray, R_pad: np.ndarray, p_pad: np.ndarray):
    """Camera-frame poses of the origin tag (= world frame) and a pad tag.

    ``R_cam, t_cam`` map world points into the camera frame; the pad tag sits at
    world position ``p_pad`` with world orientation ``R_pad``.
    """
    origin = (R_cam, t_cam)
    pad = (R_cam @ R_pad, R_cam @ p_pad + t_cam)
    return origin, pad


def cell_world(notch, R, spacing, x, y, z=0.0):
    return np.asarray(notch) + R @ np.array([x * spacing, y * spacing, z])


def components_bfs(mask: np.ndarray) -> list[set[tuple[int, int]]]:
    """4-connected components by breadth-first search; pixels as (row, col)."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for r in range(h):
        for c in range(w):
            if not mask[r, c] or seen[r, c]:
                continue
            comp, queue = set(), deque([(r, c)])
            seen[r, c] = True
            while queue:
                i, j = queue.popleft()
                comp.add((i, j))
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    a, b = i + di, j + dj
                    if 0 <= a < h and 0 <= b < w and mask[a, b] and not seen[a, b]:
                        seen[a, b] = True
                        queue.append((a, b))
            comps.append(comp)
    return comps


def iou_enumerate(a, b) -> float:
    """Count cells one at a time."""
    inter = union = 0
    for row_a, row_b in zip(a, b):
        for u, v in zip(row_a, row_b):
            inter += bool(u) and bool(v)
            union += bool(u) or bool(v)
    return 1.0 if union == 0 else inter / union


def upward_sum(tracks, t, gap):
    """Summed upward motion; image rows grow downward."""
    total = 0.0
    for tr in tracks:
        pos = dict(zip(tr.times, tr.positions))
        total += pos[t][1] - pos[t + gap][1]
    return total
