from .errors import FOUR_NEIGHBORS, ErrorEvent, ErrorModel
from .loop import (BuildAborted, BuildConfig, BuildReport, PlacementOutcome, StepRecord,
                   execute_placement, run_build, synthesize_tracks)
from .render import Camera, render_world

__all__ = [
    "FOUR_NEIGHBORS", "BuildAborted", "BuildConfig", "BuildReport", "Camera", "ErrorEvent",
    "ErrorModel", "PlacementOutcome", "StepRecord", "execute_placement", "render_world",
    "run_build", "synthesize_tracks",
]
