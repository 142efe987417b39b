from __future__ import annotations

import numpy as np


def iou(answer, response) -> float:
    """Intersection over union of two equally shaped boolean grids; 1.0 when both are empty."""
    a = np.asarray(answer, dtype=bool)
    b = np.asarray(response, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"grid shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def cell_iou(a, b) -> float:
    """IoU of two cell sets."""
    a, b = set(a), set(b)
    union = len(a | b)
    return 1.0 if union == 0 else len(a & b) / union


def mean_and_variance(values) -> tuple[float, float]:
    """Mean and population variance (ddof=0)."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    return float(v.mean()), float(v.var())
