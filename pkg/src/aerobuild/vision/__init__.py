from .blocks import BlockTracker, DetectedBlock, detect_blocks
from .detectors import (ChangeRegion, DetectorConfig, FeatureTrack, StackClass, VisionError,
                        centroid_to_grid, change_region, classify_stack, dropoff_verify,
                        frame_diff, grid_indices, pickup_detect)
from .frames import Frame, read_pnm, write_pnm

__all__ = [
    "BlockTracker", "ChangeRegion", "DetectedBlock", "DetectorConfig", "FeatureTrack", "Frame",
    "StackClass", "VisionError", "centroid_to_grid", "change_region", "classify_stack",
    "detect_blocks", "dropoff_verify", "frame_diff", "grid_indices", "pickup_detect",
    "read_pnm", "write_pnm",
]
