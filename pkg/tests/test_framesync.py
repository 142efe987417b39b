from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerobuild.framesync import (FrameSyncError, PadMap, Pose, check_rotation,
                                 interpolate_pad_point, notch_world, pad_map_from_tags,
                                 pad_map_hardcoded, plan_to_world, relative_rotation,
                                 relative_translation, rot_z)
from aerobuild.gridworld import Cell
from aerobuild.planner import ActionPlan
from oracles import axis_angle, cell_world, random_rotation, tag_poses, yaw_matrix


def test_relative_translation_examples():
    assert np.array_equal(relative_translation((0, 0, 0), (0, 0, 0)), np.zeros(3))
    assert np.array_equal(relative_translation((1, 2, 3), (1, 2, 3)), np.zeros(3))
    np.testing.assert_allclose(relative_translation((0.5, 0, 1), (0.2, 0.1, 1)), (0.3, -0.1, 0),
                               atol=1e-15)


def test_relative_rotation_examples():
    assert np.allclose(relative_rotation(np.eye(3), np.eye(3)), np.eye(3))
    R = random_rotation(np.random.default_rng(3))
    np.testing.assert_allclose(relative_rotation(R, R), np.eye(3), atol=1e-12)
    got = relative_rotation(yaw_matrix(math.pi / 2), yaw_matrix(math.pi / 4))
    np.testing.assert_allclose(got, yaw_matrix(-math.pi / 4), atol=1e-12)


def test_relative_rotation_rejects_non_orthonormal():
    with pytest.raises(FrameSyncError):
        relative_rotation(np.eye(3) * 2, np.eye(3))
    with pytest.raises(FrameSyncError):
        relative_rotation(np.diag([1.0, 1.0, -1.0]), np.eye(3))  # reflection


def test_notch_world_examples():
    np.testing.assert_allclose(notch_world(np.zeros(3), np.eye(3), (0.1, 0, 0)), (0.1, 0, 0))
    np.testing.assert_allclose(notch_world((1, 1, 0), np.eye(3), (0, 0, 0)), (1, 1, 0))
    np.testing.assert_allclose(notch_world((1, 0, 0), yaw_matrix(math.pi / 2), (0.1, 0, 0)),
                               (1, 0.1, 0), atol=1e-15)


def test_interpolate_examples():
    m = PadMap(np.array([0.3, -0.2, 0.05]), np.eye(3), 0.04, 5)
    np.testing.assert_array_equal(interpolate_pad_point(m, Cell(0, 0)), m.notch_world)
    np.testing.assert_allclose(interpolate_pad_point(m, Cell(2, 2)),
                               m.notch_world + (0.08, 0.08, 0), atol=1e-15)
    with pytest.raises(FrameSyncError):
        interpolate_pad_point(m, Cell(5, 0))
    with pytest.raises(FrameSyncError):
        interpolate_pad_point(m, Cell(0, 0), layer=2)
    np.testing.assert_allclose(interpolate_pad_point(m, Cell(0, 0), layer=1),
                               m.notch_world + (0, 0, 0.04))


def test_tags_coincident_zero_offset():
    pose = Pose(random_rotation(np.random.default_rng(0)), np.array([0.1, 0.2, 1.0]))
    m = pad_map_from_tags(pose, pose, np.zeros(3), 0.04, 5)
    np.testing.assert_allclose(m.notch_world, np.zeros(3), atol=1e-15)


def test_hardcoded_examples():
    m = pad_map_hardcoded((0.36, 0, 0), 0.0, 0.04, 10)
    np.testing.assert_allclose(m.notch_world, np.zeros(3), atol=1e-15)
    np.testing.assert_array_equal(interpolate_pad_point(m, Cell(0, 0)), m.notch_world)
    m180 = pad_map_hardcoded((0.36, 0, 0), math.pi, 0.04, 10)
    np.testing.assert_allclose(interpolate_pad_point(m180, Cell(1, 0)),
                               m180.notch_world - (0.04, 0, 0), atol=1e-15)


def test_plan_to_world_examples():
    m = PadMap(np.array([0.1, 0.1, 0.0]), np.eye(3), 0.04, 5)
    square = [Cell(x, y) for x, y in [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]]
    wps = plan_to_world(ActionPlan("sq", tuple(square)), m)
    assert len(wps) == 8
    np.testing.assert_allclose(wps[0], (0.14, 0.14, 0.0))
    np.testing.assert_array_equal(plan_to_world([Cell(0, 0)], m)[0], m.notch_world)
    np.testing.assert_array_equal(plan_to_world([Cell(2, 2)], m)[0],
                                  interpolate_pad_point(m, Cell(2, 2)))
    stacked = ActionPlan("s", (Cell(1, 1),), stacked=frozenset({Cell(1, 1)}))
    assert plan_to_world(stacked, m)[0][2] == pytest.approx(0.04)


def _random_truth(rng):
    R_cam = random_rotation(rng)
    t_cam = rng.uniform(-1, 1, 3) + np.array([0, 0, 2.0])
    R_pad = random_rotation(rng)
    p_pad = rng.uniform(-0.5, 0.5, 3)
    offset = rng.uniform(-0.1, 0.1, 3)
    spacing = rng.uniform(0.01, 0.06)
    n = int(rng.integers(1, 11))
    return R_cam, t_cam, R_pad, p_pad, offset, spacing, n


def test_generate_then_recover():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        R_cam, t_cam, R_pad, p_pad, off, s, n = _random_truth(rng)
        (Ro, to), (Rp, tp) = tag_poses(R_cam, t_cam, R_pad, p_pad)
        m = pad_map_from_tags(Pose(Ro, to), Pose(Rp, tp), off, s, n)
        truth_notch = p_pad + R_pad @ off
        for x in range(n):
            for y in range(n):
                err = np.linalg.norm(interpolate_pad_point(m, Cell(x, y))
                                     - cell_world(truth_notch, R_pad, s, x, y))
                worst = max(worst, err)
    assert worst < 1e-9


def test_literal_translation_fails_recovery():
    # The verbatim composition (t = P_origin - P_pad in the camera frame) misses
    # the notch whenever the camera is rotated or the pad tag is away from origin.
    rng = np.random.default_rng(5)
    R_cam, t_cam, R_pad, p_pad, off, s, n = _random_truth(rng)
    (Ro, to), (Rp, tp) = tag_poses(R_cam, t_cam, R_pad, p_pad)
    literal = notch_world(relative_translation(to, tp), relative_rotation(Ro, Rp), off)
    assert np.linalg.norm(literal - (p_pad + R_pad @ off)) > 1e-3


def test_noise_monte_carlo_within_one_pitch():
    rng = np.random.default_rng(11)
    sigma = math.radians(0.5)
    spacing, n = 0.04, 10  # 0.4 m pad
    worst = 0.0
    for _ in range(1000):
        R_cam = random_rotation(rng)
        t_cam = np.array([0, 0, 1.5]) + rng.uniform(-0.2, 0.2, 3)
        yaw = rng.uniform(-math.pi, math.pi)
        R_pad = yaw_matrix(yaw)
        p_pad = np.append(rng.uniform(-0.3, 0.3, 2), 0.0)
        (Ro, to), (Rp, tp) = tag_poses(R_cam, t_cam, R_pad, p_pad)
        noisy = [axis_angle(rng.normal(size=3), rng.normal(0, sigma)) for _ in range(2)]
        m = pad_map_from_tags(Pose(noisy[0] @ Ro, to), Pose(noisy[1] @ Rp, tp), np.zeros(3),
                              spacing, n)
        for x, y in ((0, 0), (n - 1, 0), (0, n - 1), (n - 1, n - 1)):
            err = np.linalg.norm(interpolate_pad_point(m, Cell(x, y))
                                 - cell_world(p_pad, R_pad, spacing, x, y))
            worst = max(worst, err)
    assert worst < spacing


def test_hardcoded_agrees_with_tags():
    rng = np.random.default_rng(99)
    for _ in range(200):
        yaw = rng.uniform(-math.pi, math.pi)
        notch = rng.uniform(-1, 1, 3)
        s, n = 0.04, int(rng.integers(1, 11))
        anchor = notch + yaw_matrix(yaw) @ np.array([(n - 1) * s, 0, 0])
        hard = pad_map_hardcoded(anchor, yaw, s, n)
        (Ro, to), (Rp, tp) = tag_poses(random_rotation(rng), rng.uniform(-1, 1, 3),
                                       yaw_matrix(yaw), notch)
        tags = pad_map_from_tags(Pose(Ro, to), Pose(Rp, tp), np.zeros(3), s, n)
        for x in range(n):
            for y in range(n):
                assert np.linalg.norm(interpolate_pad_point(hard, Cell(x, y))
                                      - interpolate_pad_point(tags, Cell(x, y))) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.005, 0.1), st.integers(2, 10))
def test_rigidity_adjacent_cells(seed, spacing, n):
    R = random_rotation(np.random.default_rng(seed))
    m = PadMap(np.random.default_rng(seed).uniform(-1, 1, 3), R, spacing, n)
    for x in range(n - 1):
        for y in range(n - 1):
            p = interpolate_pad_point(m, Cell(x, y))
            assert abs(np.linalg.norm(interpolate_pad_point(m, Cell(x + 1, y)) - p) - spacing) < 1e-12
            assert abs(np.linalg.norm(interpolate_pad_point(m, Cell(x, y + 1)) - p) - spacing) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_composition_stays_orthonormal(seed):
    rng = np.random.default_rng(seed)
    R = relative_rotation(random_rotation(rng), random_rotation(rng))
    check_rotation(R)
    check_rotation(rot_z(rng.uniform(-10, 10)))
