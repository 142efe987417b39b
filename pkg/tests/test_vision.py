from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerobuild.dronesim.render import Camera
from aerobuild.gridworld import Cell
from aerobuild.vision import (BlockTracker, DetectorConfig, FeatureTrack, Frame, StackClass,
                              change_region, centroid_to_grid, classify_stack, detect_blocks,
                              dropoff_verify, frame_diff, pickup_detect, read_pnm, write_pnm)
from aerobuild.vision.detectors import VisionError, grid_indices
from oracles import components_bfs, upward_sum
from vision_fixtures import placed_behind_fixture, single_block_frames, stacked_fixture


def _tracks(dys, x=10.0, y0=100.0, gap=3):
    return [FeatureTrack(i, ((x + i, y0), (x + i, y0 - d / 3), (x + i, y0 - 2 * d / 3), (x + i, y0 - d)))
            for i, d in enumerate(dys)]


# pickup ---------------------------------------------------------------------------------------

def test_pickup_examples():
    ok, dy = pickup_detect(_tracks([5] * 10), 0, DetectorConfig(pickup_threshold_T=30))
    assert ok and dy == pytest.approx(50)
    assert pickup_detect(_tracks([0] * 6), 0) == (False, 0.0)
    ok, dy = pickup_detect(_tracks([2] * 4 + [-2] * 4), 0, DetectorConfig(pickup_threshold_T=0.1))
    assert not ok and dy == pytest.approx(0)


def test_pickup_threshold_is_strict():
    ok, dy = pickup_detect(_tracks([4] * 5), 0, DetectorConfig(pickup_threshold_T=20))
    assert dy == pytest.approx(20) and not ok


def test_pickup_errors():
    with pytest.raises(VisionError):
        pickup_detect([], 0)
    with pytest.raises(VisionError):
        pickup_detect([FeatureTrack(0, ((0, 0), (0, 1)))], 0)
    with pytest.raises(VisionError):
        FeatureTrack(0, ((0, 0), (0, 1)), times=(1, 1))
    with pytest.raises(VisionError):
        FeatureTrack(0, ())


track_sets = st.lists(
    st.lists(st.tuples(st.floats(-500, 500), st.floats(-500, 500)), min_size=4, max_size=4),
    min_size=1, max_size=12)


@settings(max_examples=300, deadline=None)
@given(track_sets, st.floats(-50, 50), st.floats(0.5, 200))
def test_pickup_sum_and_horizontal_invariance(pos, shift, T):
    cfg = DetectorConfig(pickup_threshold_T=T)
    tracks = [FeatureTrack(i, tuple(p)) for i, p in enumerate(pos)]
    ok, dy = pickup_detect(tracks, 0, cfg)
    assert dy == pytest.approx(upward_sum(tracks, 0, 3), abs=1e-9)
    assert ok == (dy > T)
    moved = [FeatureTrack(i, tuple((x + shift * k, y) for k, (x, y) in enumerate(p)))
             for i, p in enumerate(pos)]
    assert pickup_detect(moved, 0, cfg) == (ok, dy)


# frame differencing ---------------------------------------------------------------------------

def test_frame_diff_examples():
    a = Frame(np.full((4, 5), 7, np.uint8))
    assert not frame_diff(a, a).pixels.any()
    zero, full = Frame(np.zeros((3, 3), np.uint8)), Frame(np.full((3, 3), 255, np.uint8))
    assert (frame_diff(zero, full).pixels == 255).all()
    one = np.zeros((3, 3), np.uint8)
    one[1, 2] = 9
    d = frame_diff(zero, Frame(one)).pixels
    assert d[1, 2] == 9 and d.sum() == 9
    with pytest.raises(VisionError):
        frame_diff(zero, Frame(np.zeros((3, 4), np.uint8)))


def test_change_region_examples():
    assert change_region(Frame(np.zeros((60, 60), np.uint8))) is None
    d = np.zeros((80, 80), np.uint8)
    d[40:50, 20:30] = 200  # rows 40..49, cols 20..29
    r = change_region(Frame(d))
    assert r.centroid == (24.5, 44.5) and r.area == 100
    d[2:5, 70:73] = 200  # 9-pixel blob
    assert change_region(Frame(d)).area == 100


def test_change_region_rgb_uses_max_channel():
    d = np.zeros((10, 10, 3), np.uint8)
    d[2:4, 2:4, 1] = 90
    assert change_region(Frame(d)).area == 4


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.6))
def test_change_region_matches_bfs_oracle(seed, density):
    rng = np.random.default_rng(seed)
    d = (rng.random((24, 24)) < density).astype(np.uint8) * 255
    region = change_region(Frame(d))
    comps = components_bfs(d > 25)
    if not comps:
        assert region is None
        return
    best = max(len(c) for c in comps)
    assert region.area == best == len(region.omega)
    assert {(c, r) for r, c in max(comps, key=len)} == region.omega or \
        any({(c, r) for r, c in comp} == region.omega for comp in comps if len(comp) == best)
    xs, ys = zip(*region.omega)
    assert region.centroid == pytest.approx((np.mean(xs), np.mean(ys)))
    x0, y0, x1, y1 = region.bbox
    assert x0 <= region.centroid[0] <= x1 and y0 <= region.centroid[1] <= y1


def test_dropoff_examples():
    d = np.zeros((100, 100), np.uint8)
    d[45:55, 45:55] = 255
    r = change_region(Frame(d))
    box = (10, 10, 90, 90)
    assert dropoff_verify(2, 3, None, box)
    assert dropoff_verify(2, 2, r, box)
    assert not dropoff_verify(2, 2, None, box)
    assert not dropoff_verify(2, 2, r, (0, 0, 20, 20))


# centroid -> grid -----------------------------------------------------------------------------

CORNERS = ((0, 0), (100, 0), (0, 100), (100, 100))


def test_centroid_to_grid_examples():
    assert grid_indices((0, 0), CORNERS, 5) == (0, 0)
    assert centroid_to_grid((0, 0), CORNERS, 5) == Cell(0, 4)
    assert grid_indices((50, 50), CORNERS, 5) == (2, 2)
    assert grid_indices((100, 0), CORNERS, 5) == (4, 0)  # clamped
    assert grid_indices((99.999, 0), CORNERS, 5) == (4, 0)


def test_centroid_to_grid_errors():
    with pytest.raises(VisionError):
        grid_indices((5, 5), ((0, 0), (0, 0), (0, 100), (0, 100)), 5)
    with pytest.raises(VisionError):
        grid_indices((150, 50), CORNERS, 5)


@pytest.mark.parametrize("x", range(5))
@pytest.mark.parametrize("y", range(5))
def test_pipeline_recovers_each_cell(x, y):
    cam = Camera()
    before, after = single_block_frames(Cell(x, y))
    region = change_region(frame_diff(before, after), cam.detector_config())
    assert centroid_to_grid(region.centroid, cam.pad_corners(5), 5) == Cell(x, y)
    assert region.area == cam.block_footprint_px()


# stacking -------------------------------------------------------------------------------------

def test_classify_examples():
    cfg = DetectorConfig(eps_d=10, eps_A=200)
    assert classify_stack((3, 0), [(0, 0)], 50, cfg) is StackClass.STACKED
    assert classify_stack((3, 0), [(0, 0)], 500, cfg) is StackClass.PLACED_BEHIND
    assert classify_stack((3, 0), [], 50, cfg) is StackClass.NEW_CELL
    assert classify_stack((30, 0), [(0, 0)], 50, cfg) is StackClass.NEW_CELL
    assert classify_stack((10, 0), [(0, 0)], 50, cfg) is StackClass.NEW_CELL  # boundary


@settings(max_examples=300, deadline=None)
@given(st.tuples(st.floats(0, 200), st.floats(0, 200)),
       st.lists(st.tuples(st.floats(0, 200), st.floats(0, 200)), max_size=5),
       st.floats(1, 2000), st.floats(1, 50), st.floats(1, 1000), st.sampled_from([2.0, 4.0, 8.0, 0.5]))
def test_classify_scale_consistent(p, existing, area, eps_d, eps_a, k):
    # powers of two keep the scaled comparisons exact in floating point
    base = classify_stack(p, existing, area, DetectorConfig(eps_d=eps_d, eps_A=eps_a))
    scaled = classify_stack((p[0] * k, p[1] * k), [(a * k, b * k) for a, b in existing],
                            area * k * k, DetectorConfig(eps_d=eps_d * k, eps_A=eps_a * k * k))
    assert base is scaled


def test_stacked_and_behind_fixtures():
    cam = Camera()
    cfg = cam.detector_config()
    for x in range(5):
        for y in range(5):
            b, a, centre = stacked_fixture(Cell(x, y))
            r = change_region(frame_diff(b, a), cfg)
            assert classify_stack(r.centroid, [centre], r.area, cfg) is StackClass.STACKED
    rng = np.random.default_rng(0)
    for _ in range(25):
        b, a, centre = placed_behind_fixture(rng)
        r = change_region(frame_diff(b, a), cfg)
        assert classify_stack(r.centroid, [centre], r.area, cfg) is StackClass.PLACED_BEHIND


# block detector -------------------------------------------------------------------------------

def test_detect_blocks_counts_and_ids():
    from aerobuild.dronesim.render import render_world
    from aerobuild.gridworld import BuildState, state_from_cells
    cam = Camera()
    box = cam.pad_box(5)
    assert detect_blocks(render_world(None, BuildState.empty(5)), box) == []
    three = render_world(None, state_from_cells([Cell(0, 0), Cell(2, 3), Cell(4, 4)], 5))
    assert len(detect_blocks(three, box)) == 3

    tracker = BlockTracker(max_distance=20)
    px = np.array(render_world(None, BuildState.empty(5)).pixels)
    px[60:80, 60:80] = (220, 40, 40)
    first = detect_blocks(Frame(px), box, tracker)
    px2 = np.array(render_world(None, BuildState.empty(5)).pixels)
    px2[63:83, 64:84] = (220, 40, 40)  # moved 5 px
    px2[150:170, 150:170] = (40, 80, 220)
    second = detect_blocks(Frame(px2), box, tracker)
    moved = min(second, key=lambda b: b.box[0])
    assert moved.id == first[0].id
    assert {b.id for b in second} == {first[0].id, first[0].id + 1}


def test_pnm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    rgb = Frame(rng.integers(0, 256, (7, 9, 3), dtype=np.uint8))
    gray = Frame(rng.integers(0, 256, (5, 4), dtype=np.uint8))
    assert read_pnm(write_pnm(rgb, tmp_path / "a.ppm")) == rgb
    assert read_pnm(write_pnm(gray, tmp_path / "a.pgm")) == gray
    assert gray.gray() is gray and rgb.gray().pixels.shape == (7, 9)
