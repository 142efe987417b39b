"""Paired with/without re-planning runs under identical error realizations."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..dronesim.errors import ErrorModel
from ..dronesim.loop import BuildAborted, BuildConfig, BuildReport, run_build
from ..framesync import PadMap
from ..gridworld import GridWorld


@dataclass(frozen=True)
class PairedRow:
    design: str
    seed: int
    iou_reprompt: float
    iou_no_reprompt: float
    target_iou_reprompt: float | None
    target_iou_no_reprompt: float | None
    prompts_reprompt: int
    prompts_no_reprompt: int
    reprompts: int
    misplacements: int
    events_match: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class MatrixAborted(RuntimeError):
    def __init__(self, cause: BaseException, rows: list[PairedRow]):
        super().__init__(f"matrix aborted after {len(rows)} rows: {cause}")
        self.cause = cause
        self.rows = rows


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Disjoint per-run seeds from one master seed."""
    children = np.random.SeedSequence(int(master_seed)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def events_agree(a: BuildReport, b: BuildReport) -> bool:
    """Both arms drew identical error events for every attempt index they share."""
    k = min(len(a.error_events), len(b.error_events))
    return a.error_events[:k] == b.error_events[:k]


def _target_for(backend, design: str):
    if hasattr(backend, "design_for"):
        return backend.design_for(design).target_grids()
    return None


def run_pair(design: str, seed: int, backend, world: GridWorld, pad_map: PadMap,
             err: ErrorModel, cfg: BuildConfig) -> tuple[PairedRow, BuildReport, BuildReport]:
    e = dataclasses.replace(err, seed=int(seed))
    target = _target_for(backend, design)
    on = run_build(design, backend, world, pad_map, e,
                   dataclasses.replace(cfg, reprompt_enabled=True), target=target)
    off = run_build(design, backend, world, pad_map, e,
                    dataclasses.replace(cfg, reprompt_enabled=False), target=target)
    row = PairedRow(design, int(seed), on.final_iou, off.final_iou, on.target_iou,
                    off.target_iou, on.prompts_used, off.prompts_used, on.reprompts,
                    sum(1 for s in on.steps if s.executed is not None and s.executed != s.planned),
                    events_agree(on, off))
    return row, on, off


def run_reprompt_matrix(designs, backend, err: ErrorModel, seeds, *, world: GridWorld,
                        pad_map: PadMap, cfg: BuildConfig = BuildConfig(),
                        workers: int = 1) -> list[PairedRow]:
    designs, seeds = list(designs), [int(s) for s in seeds]
    for d in designs:
        _target_for(backend, d)  # fail fast on unknown designs
    jobs = [(d, s) for d in designs for s in seeds]
    rows: list[PairedRow] = []

    def one(job):
        return run_pair(job[0], job[1], backend, world, pad_map, err, cfg)[0]

    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(one, jobs):
                    rows.append(row)
        else:
            for job in jobs:
                rows.append(one(job))
    except BuildAborted as exc:
        raise MatrixAborted(exc, rows) from exc
    return rows
