"""Closed-loop build: plan, sync, execute, verify, re-plan."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..evalharness.metrics import cell_iou
from ..framesync import PadMap, interpolate_pad_point
from ..gridworld import (MAX_LAYERS, BuildState, Cell, GridError, GridWorld, apply_placement,
                         occupied_cells)
from ..planner.backends import BackendError, RunLedger, request_plan
from ..planner.plan import ActionPlan, PlanParseError, parse_plan, validate_plan
from ..planner.prompt import PromptParts, build_correction, build_prompt, build_reprompt
from ..vision.blocks import BlockTracker, detect_blocks
from ..vision.detectors import (DetectorConfig, FeatureTrack, StackClass, centroid_to_grid,
                                change_region, classify_stack, dropoff_verify, frame_diff,
                                nearest_index, pickup_detect)
from ..vision.frames import Frame, write_pnm
from .errors import ErrorEvent, ErrorModel
from .render import Camera, render_world

TRACK_POINTS = 6
LIFT_PX_PER_FRAME = 4.0


@dataclass(frozen=True)
class BuildConfig:
    reprompt_enabled: bool = True
    max_reprompts: int = 5
    max_steps: int = 60
    max_corrections: int = 2
    pickup_retries: int = 2

    def __post_init__(self):
        if self.max_reprompts < 0 or self.max_steps < 1 or self.max_corrections < 0:
            raise ValueError("max_reprompts/max_corrections must be >= 0 and max_steps >= 1")
        if not 0 <= self.pickup_retries < 8:
            raise ValueError("pickup_retries must be in 0..7")


@dataclass(frozen=True, eq=False)
class PlacementOutcome:
    kind: str  # "placed" | "drop_failed" | "pickup_failed"
    actual_cell: Cell | None
    layer: int | None
    state_after: BuildState
    frame_before: Frame
    frame_after: Frame
    tracks: tuple[tuple[FeatureTrack, ...], ...]  # one track set per pickup try
    pickup_dy: tuple[float, ...]
    event: ErrorEvent


def synthesize_tracks(rng: np.random.Generator, lifted: bool, frame_gap: int
                      ) -> tuple[FeatureTrack, ...]:
    """Corner-feature tracks at the pickup station: rising when lifted, jittering otherwise."""
    base = rng.uniform([100.0, 300.0], [128.0, 328.0], size=(TRACK_POINTS, 2))
    sway = rng.uniform(-2.0, 2.0, size=frame_gap + 1).cumsum()
    tracks = []
    for i, (x, y) in enumerate(base):
        pos = []
        for t in range(frame_gap + 1):
            jitter = rng.uniform(-0.5, 0.5, size=2)
            dy = -LIFT_PX_PER_FRAME * t if lifted else 0.0
            pos.append((float(x + sway[t] + jitter[0]), float(y + dy + jitter[1])))
        tracks.append(FeatureTrack(i, tuple(pos)))
    return tuple(tracks)


def execute_placement(state: BuildState, waypoint, cell: Cell, err: ErrorModel,
                      rng: np.random.Generator, *, attempt: int = 0, stacked: bool = False,
                      camera: Camera = Camera(), detector: DetectorConfig | None = None,
                      pickup_retries: int = 2) -> PlacementOutcome:
    """Fly one block to ``waypoint`` (the world position of ``cell``) and release it.

    Misplacement and drop failures follow ``err``; the pickup is confirmed by the
    pickup detector on synthesized feature tracks.
    """
    detector = detector or camera.detector_config()
    event = err.draw(rng, attempt)
    before = render_world(None, state, camera)
    track_sets, dys = [], []
    picked = False
    for k in range(pickup_retries + 1):
        tracks = synthesize_tracks(rng, not event.pickup_failed[k], detector.frame_gap)
        ok, dy = pickup_detect(tracks, 0, detector)
        track_sets.append(tracks)
        dys.append(dy)
        if ok:
            picked = True
            break
    if not picked:
        return PlacementOutcome("pickup_failed", None, None, state, before, before,
                                tuple(track_sets), tuple(dys), event)
    if event.drop_failed:
        return PlacementOutcome("drop_failed", None, None, state, before, before,
                                tuple(track_sets), tuple(dys), event)
    actual = err.landing_cell(event, cell, state)
    layers = state.layers_at(actual)
    if layers >= MAX_LAYERS:
        # nowhere to put it; the block falls off the pad
        return PlacementOutcome("drop_failed", None, None, state, before, before,
                                tuple(track_sets), tuple(dys), event)
    after_state = apply_placement(state, actual, stacked=layers > 0)
    after = render_world(None, after_state, camera)
    return PlacementOutcome("placed", actual, layers, after_state, before, after,
                            tuple(track_sets), tuple(dys), event)


@dataclass
class StepRecord:
    index: int
    planned: Cell
    planned_layer: int
    waypoint: list[float]
    outcome: str
    executed: Cell | None
    executed_layer: int | None
    observed: Cell | None
    observed_layer: int | None
    classification: str | None
    verified: bool
    reprompt_issued: bool = False
    pickup_dy: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        cell = lambda c: None if c is None else c.as_list()  # noqa: E731
        return {
            "index": self.index, "planned": cell(self.planned),
            "planned_layer": self.planned_layer, "waypoint": self.waypoint,
            "outcome": self.outcome, "executed": cell(self.executed),
            "executed_layer": self.executed_layer, "observed": cell(self.observed),
            "observed_layer": self.observed_layer, "classification": self.classification,
            "verified": self.verified, "reprompt_issued": self.reprompt_issued,
            "pickup_dy": [round(v, 6) for v in self.pickup_dy],
        }


@dataclass
class BuildReport:
    design_request: str
    steps: list[StepRecord]
    prompts_used: int
    reprompts: int
    planner_calls: list[dict]
    final_state: BuildState
    observed_state: BuildState
    committed_design: frozenset[Cell]
    final_iou: float
    target_iou: float | None
    termination: str
    unrecovered_mismatch: bool
    error_events: list[ErrorEvent]
    duration_s: float = 0.0

    @property
    def completed(self) -> bool:
        return self.termination == "plan_complete"

    def to_dict(self, include_timing: bool = False) -> dict:
        srt = lambda cells: [c.as_list() for c in sorted(cells, key=lambda c: (c.y, c.x))]  # noqa: E731
        d = {
            "design_request": self.design_request,
            "termination": self.termination,
            "completed": self.completed,
            "prompts_used": self.prompts_used,
            "reprompts": self.reprompts,
            "final_iou": self.final_iou,
            "target_iou": self.target_iou,
            "unrecovered_mismatch": self.unrecovered_mismatch,
            "committed_design": srt(self.committed_design),
            "final_state": [[p.cell.x, p.cell.y, p.layer, p.step_index]
                            for p in self.final_state.placed],
            "observed_state": [[p.cell.x, p.cell.y, p.layer, p.step_index]
                               for p in self.observed_state.placed],
            "steps": [s.to_dict() for s in self.steps],
            "planner_calls": self.planner_calls,
            "error_events": [e.to_dict() for e in self.error_events],
        }
        if include_timing:
            d["duration_s"] = self.duration_s
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"


class BuildAborted(RuntimeError):
    """A backend error stopped the build; ``report`` holds the partial run."""

    def __init__(self, cause: BaseException, report: BuildReport):
        super().__init__(f"build aborted: {cause}")
        self.cause = cause
        self.report = report


class _PlanRejected(Exception):
    pass


def _footprint(state: BuildState) -> frozenset[Cell]:
    return occupied_cells(state)


def run_build(design_request: str, backend, world: GridWorld, pad_map: PadMap,
              err: ErrorModel, cfg: BuildConfig = BuildConfig(), *, target=None,
              ledger: RunLedger | None = None, camera: Camera = Camera(),
              detector: DetectorConfig | None = None,
              frame_dir: str | Path | None = None) -> BuildReport:
    """Run one closed-loop build.

    ``target`` is an optional iterable of acceptable cell sets; ``target_iou`` is
    the best IoU of the final footprint against any of them. ``final_iou`` always
    compares the final footprint with the design the planner last committed to.
    """
    t0 = time.perf_counter()
    n = world.pad_size
    if pad_map.pad_size != n:
        raise ValueError(f"pad map size {pad_map.pad_size} != world pad size {n}")
    detector = detector or camera.detector_config()
    corners = camera.pad_corners(n)
    pad_box = camera.pad_box(n)
    tracker = BlockTracker(max_distance=camera.px_per_cell / 2.0)
    frame_dir = Path(frame_dir) if frame_dir is not None else None
    if frame_dir is not None:
        frame_dir.mkdir(parents=True, exist_ok=True)

    true_state = BuildState.empty(n)
    obs_state = BuildState.empty(n)
    obs_positions: list[tuple[tuple[float, float], Cell]] = []
    steps: list[StepRecord] = []
    calls: list[dict] = []
    events: list[ErrorEvent] = []
    counters = {"prompts": 0, "reprompts": 0}
    committed: frozenset[Cell] = frozenset()
    unrecovered = False
    termination = "plan_complete"

    def ask(prompt: PromptParts, kind: str, allow_empty: bool) -> ActionPlan:
        current = prompt
        for k in range(cfg.max_corrections + 1):
            counters["prompts"] += 1
            completion = request_plan(backend, current, ledger, pad_size=n)
            call = {"kind": kind if k == 0 else "correction",
                    "prompt_sha256": hashlib.sha256(current.text().encode()).hexdigest()}
            try:
                plan = parse_plan(completion.text, n, allow_empty=allow_empty)
                problems = validate_plan(plan, obs_state)
                if problems:
                    raise PlanParseError("plan violates the scene: "
                                         + ", ".join(str(v) for v in problems))
            except PlanParseError as exc:
                call["result"] = f"{getattr(exc, 'kind', 'invalid_plan')}: {exc}"
                calls.append(call)
                current = build_correction(prompt, str(exc))
                continue
            call["result"] = "ok"
            call["coordinates"] = [c.as_list() for c in plan.coordinates]
            calls.append(call)
            return plan
        raise _PlanRejected()

    def report() -> BuildReport:
        footprint = _footprint(true_state)
        target_iou = None
        if target is not None:
            target_iou = max(cell_iou(footprint, frozenset(t)) for t in target)
        return BuildReport(design_request, steps, counters["prompts"], counters["reprompts"],
                           calls, true_state, obs_state, committed,
                           cell_iou(footprint, committed), target_iou, termination,
                           unrecovered, events, time.perf_counter() - t0)

    try:
        try:
            plan = ask(build_prompt(design_request, obs_state, world), "initial", False)
        except _PlanRejected:
            termination = "plan_rejected"
            return report()
        queue = [(c, c in plan.stacked) for c in plan.coordinates]
        committed = _footprint(obs_state) | frozenset(plan.coordinates)

        attempt = 0
        while queue:
            if len(steps) >= cfg.max_steps:
                termination = "max_steps"
                break
            cell, stk = queue[0]
            layer = 1 if stk else 0
            waypoint = interpolate_pad_point(pad_map, cell, layer)
            out = execute_placement(true_state, waypoint, cell, err, err.rng(attempt),
                                    attempt=attempt, stacked=stk, camera=camera,
                                    detector=detector, pickup_retries=cfg.pickup_retries)
            attempt += 1
            events.append(out.event)
            step = StepRecord(len(steps), cell, layer, [float(v) for v in waypoint], out.kind,
                              out.actual_cell, out.layer, None, None, None, False,
                              pickup_dy=list(out.pickup_dy))
            if frame_dir is not None:
                write_pnm(out.frame_before, frame_dir / f"step_{step.index:03d}_before.ppm")
                write_pnm(out.frame_after, frame_dir / f"step_{step.index:03d}_after.ppm")
            steps.append(step)
            if out.kind == "pickup_failed":
                continue

            # dropoff presence, then location, then stack classification
            count_before = len(detect_blocks(out.frame_before, pad_box, tracker))
            count_after = len(detect_blocks(out.frame_after, pad_box, tracker))
            region = change_region(frame_diff(out.frame_before, out.frame_after), detector)
            if not dropoff_verify(count_before, count_after, region, pad_box):
                continue
            true_state = out.state_after
            pos = region.centroid
            cls = classify_stack(pos, [p for p, _ in obs_positions], region.area, detector)
            if cls is StackClass.STACKED:
                ocell = obs_positions[nearest_index(pos, [p for p, _ in obs_positions])][1]
            else:
                ocell = centroid_to_grid(pos, corners, n)
            olayer = min(obs_state.layers_at(ocell), MAX_LAYERS - 1)
            try:
                obs_state = apply_placement(obs_state, ocell, stacked=olayer > 0)
            except GridError:
                olayer = None
            obs_positions.append((pos, ocell))
            step.observed, step.observed_layer = ocell, olayer
            step.classification = cls.value
            queue.pop(0)
            step.verified = ocell == cell and olayer == layer
            if step.verified:
                continue

            if not cfg.reprompt_enabled:
                unrecovered = True
                continue
            if counters["reprompts"] >= cfg.max_reprompts:
                unrecovered = True
                termination = "max_reprompts"
                break
            counters["reprompts"] += 1
            step.reprompt_issued = True
            where = f"[{ocell.x}, {ocell.y}]" + (" on top of another block" if olayer else "")
            note = (f"the block planned for [{cell.x}, {cell.y}] was observed at {where}.")
            try:
                plan = ask(build_reprompt(design_request, obs_state, world, note), "reprompt",
                           True)
            except _PlanRejected:
                unrecovered = True
                termination = "plan_rejected"
                break
            queue = [(c, c in plan.stacked) for c in plan.coordinates]
            committed = _footprint(obs_state) | frozenset(plan.coordinates)
    except BackendError as exc:
        termination = "backend_error"
        raise BuildAborted(exc, report()) from exc
    return report()
