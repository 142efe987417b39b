"""Pad-frame to world-frame coordinate synchronization.

Two ways of locating the pad are supported: from a pair of fiducial tag poses
seen by a fixed camera (`pad_map_from_tags`) and from a surveyed corner plus a
yaw (`pad_map_hardcoded`). Both produce a :class:`PadMap`, which turns planner
cells into world waypoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridworld import Cell

ORTHO_TOL = 1e-9


class FrameSyncError(ValueError):
    pass


def check_rotation(R, name: str = "rotation") -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise FrameSyncError(f"{name} must be 3x3, got shape {R.shape}")
    if not np.allclose(R.T @ R, np.eye(3), atol=ORTHO_TOL, rtol=0.0):
        raise FrameSyncError(f"{name} is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
        raise FrameSyncError(f"{name} has determinant {np.linalg.det(R):.12g}, expected +1")
    return R


def rot_z(angle_rad: float) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = check_rotation(self.rotation, "Pose.rotation")
        t = np.asarray(self.translation, dtype=float).reshape(3)
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True, eq=False)
class PadMap:
    notch_world: np.ndarray
    rotation_rel: np.ndarray
    spacing_m: float
    pad_size: int
    block_height_m: float | None = None  # defaults to spacing_m (cubic blocks)

    def __post_init__(self):
        R = check_rotation(self.rotation_rel, "PadMap.rotation_rel")
        if not self.spacing_m > 0:
            raise FrameSyncError(f"spacing_m must be positive, got {self.spacing_m}")
        if self.pad_size < 1:
            raise FrameSyncError(f"pad_size must be >= 1, got {self.pad_size}")
        notch = np.asarray(self.notch_world, dtype=float).reshape(3)
        R.setflags(write=False)
        notch.setflags(write=False)
        object.__setattr__(self, "rotation_rel", R)
        object.__setattr__(self, "notch_world", notch)

    @property
    def layer_height(self) -> float:
        return self.spacing_m if self.block_height_m is None else self.block_height_m


def relative_translation(p_origin_cam, p_pad_cam) -> np.ndarray:
    return np.asarray(p_origin_cam, dtype=float) - np.asarray(p_pad_cam, dtype=float)


def relative_rotation(R_cam_world, R_cam_pad) -> np.ndarray:
    R_cw = check_rotation(R_cam_world, "R_cam_world")
    R_cp = check_rotation(R_cam_pad, "R_cam_pad")
    return R_cw.T @ R_cp


def notch_world(t_rel, R_rel, p_notch_pad) -> np.ndarray:
    return np.asarray(t_rel, dtype=float) + np.asarray(R_rel, dtype=float) @ np.asarray(
        p_notch_pad, dtype=float)


def interpolate_pad_point(pad_map: PadMap, cell: Cell, layer: int = 0) -> np.ndarray:
    if not cell.in_bounds(pad_map.pad_size):
        raise FrameSyncError(
            f"cell ({cell.x},{cell.y}) outside {pad_map.pad_size}x{pad_map.pad_size} pad")
    if layer not in (0, 1):
        raise FrameSyncError(f"layer must be 0 or 1, got {layer}")
    local = np.array([cell.x * pad_map.spacing_m, cell.y * pad_map.spacing_m,
                      layer * pad_map.layer_height])
    return pad_map.notch_world + pad_map.rotation_rel @ local


def pad_map_from_tags(origin_tag: Pose, pad_tag: Pose, notch_offset_pad, spacing_m: float,
                      pad_size: int, block_height_m: float | None = None) -> PadMap:
    """Locate the pad from two tag poses expressed in the camera frame.

    The origin tag defines the world frame. The camera-frame difference of the
    two tag positions is rotated into that frame and oriented from origin to pad
    before the notch offset is applied.
    """
    R_rel = relative_rotation(origin_tag.rotation, pad_tag.rotation)
    # camera-frame vector origin - pad, expressed in the world (origin-tag) frame, reversed
    t_world = -(origin_tag.rotation.T @ relative_translation(origin_tag.translation,
                                                           pad_tag.translation))
    return PadMap(notch_world(t_world, R_rel, notch_offset_pad), R_rel, spacing_m, pad_size,
                  block_height_m)


def pad_map_hardcoded(anchor_world, yaw_rad: float, spacing_m: float, pad_size: int,
                      block_height_m: float | None = None) -> PadMap:
    """Pad map from the surveyed bottom-right notch and the pad yaw about +z."""
    R = rot_z(yaw_rad)
    anchor = np.asarray(anchor_world, dtype=float)
    notch = anchor - R @ np.array([(pad_size - 1) * spacing_m, 0.0, 0.0])
    return PadMap(notch, R, spacing_m, pad_size, block_height_m)


def plan_to_world(coordinates, pad_map: PadMap, layers=None) -> list[np.ndarray]:
    """One waypoint per cell, order preserved. ``coordinates`` may be an ActionPlan."""
    cells = getattr(coordinates, "coordinates", coordinates)
    if layers is None:
        stacked = getattr(coordinates, "stacked", frozenset())
        layers = [1 if c in stacked else 0 for c in cells]
    return [interpolate_pad_point(pad_map, c, layer) for c, layer in zip(cells, layers)]
