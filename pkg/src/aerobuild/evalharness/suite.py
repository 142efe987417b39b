"""Constrained-prompt IoU suite."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from ..gridworld import BuildState, Cell, GridError, cells_to_grid, parse_scene_text
from ..planner.backends import BackendError, MockBackend, RunLedger, request_plan
from ..planner.designs import MockDesign
from ..planner.plan import PlanParseError, parse_plan
from ..planner.prompt import build_prompt
from .metrics import iou, mean_and_variance

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class ConstrainedPrompt:
    id: str
    request: str
    answer_grid: tuple[tuple[bool, ...], ...]  # answer_grid[y][x], y = 0 is the bottom row

    def __post_init__(self):
        n = len(self.answer_grid)
        if n == 0 or any(len(r) != n for r in self.answer_grid):
            raise CorpusError(f"prompt {self.id}: answer grid must be square")
        if not any(any(r) for r in self.answer_grid):
            raise CorpusError(f"prompt {self.id}: answer grid is empty")

    @property
    def pad_size(self) -> int:
        return len(self.answer_grid)

    @property
    def answer_cells(self) -> frozenset[Cell]:
        return frozenset(Cell(x, y) for y, row in enumerate(self.answer_grid)
                         for x, v in enumerate(row) if v)

    @classmethod
    def from_scene(cls, id: str, request: str, grid_text: str) -> "ConstrainedPrompt":
        try:
            cells = parse_scene_text(grid_text)
        except GridError as exc:
            raise CorpusError(f"prompt {id}: {exc}") from None
        n = len(grid_text.strip().splitlines())
        return cls(id, request, tuple(tuple(r) for r in cells_to_grid(cells, n)))


def load_corpus(path: str | Path | None = None) -> list[ConstrainedPrompt]:
    """Read a multi-document YAML corpus (``id``, ``request``, ``answer`` o/x rows).

    With no path the bundled 15-prompt 10x10 corpus is loaded.
    """
    if path is None:
        text = resources.files("aerobuild.data").joinpath("constrained_prompts.yaml").read_text()
    else:
        p = Path(path)
        if not p.is_file():
            raise CorpusError(f"corpus file not found: {p}")
        text = p.read_text()
    prompts = []
    for doc in yaml.safe_load_all(text):
        if doc is None:
            continue
        try:
            prompts.append(ConstrainedPrompt.from_scene(str(doc["id"]), str(doc["request"]),
                                                        str(doc["answer"])))
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"malformed corpus document: {exc}") from None
    ids = [p.id for p in prompts]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate prompt ids in corpus")
    return prompts


def corpus_mock_backend(prompts) -> MockBackend:
    """Mock planner that answers every corpus prompt correctly."""
    lib = {p.request: MockDesign(p.request, tuple(sorted(p.answer_cells, key=lambda c: (c.y, c.x))),
                                 pad_size=p.pad_size, translate=False, title=p.id)
           for p in prompts}
    return MockBackend(lib)


@dataclass(frozen=True)
class TrialResult:
    prompt_id: str
    trial_id: int
    plan: dict | None
    iou: float
    latency_ms: float | None
    cost_tokens: int | None
    parse_ok: bool
    error: str | None = None
    violations: int = 0


@dataclass(frozen=True)
class EvalResult:
    prompt_id: str
    trials: tuple[TrialResult, ...]
    mean_iou: float
    variance: float
    model: str

    @classmethod
    def from_trials(cls, prompt_id: str, trials, model: str) -> "EvalResult":
        trials = tuple(sorted(trials, key=lambda t: t.trial_id))
        mean, var = mean_and_variance(t.iou for t in trials)
        return cls(prompt_id, trials, mean, var, model)


def run_trial(prompt: ConstrainedPrompt, backend, trial_id: int,
              ledger: RunLedger | None = None) -> TrialResult:
    n = prompt.pad_size
    parts = build_prompt(prompt.request, BuildState.empty(n))
    try:
        completion = request_plan(backend, parts, ledger, pad_size=n, trial_id=trial_id)
    except BackendError as exc:
        log.warning("prompt %s trial %d: backend error %s", prompt.id, trial_id, exc)
        return TrialResult(prompt.id, trial_id, None, 0.0, None, None, False,
                           f"{type(exc).__name__}: {exc}")
    try:
        plan = parse_plan(completion.text, n, drop_out_of_bounds=True, allow_empty=True)
    except PlanParseError as exc:
        return TrialResult(prompt.id, trial_id, None, 0.0, completion.latency_ms,
                           completion.tokens, False, f"{exc.kind}: {exc}")
    response = cells_to_grid(plan.coordinates, n)
    return TrialResult(prompt.id, trial_id, plan.to_dict(), iou(prompt.answer_grid, response),
                       completion.latency_ms, completion.tokens, True, None, len(plan.discarded))


def run_constrained_suite(prompts, backend, trials_per_prompt: int = 5, *, workers: int = 1,
                          ledger: RunLedger | None = None, model: str | None = None
                          ) -> list[EvalResult]:
    """Score ``trials_per_prompt`` independent plans per prompt on an empty pad."""
    if trials_per_prompt < 1:
        raise ValueError("trials_per_prompt must be >= 1")
    prompts = list(prompts)
    jobs = [(p, t) for p in prompts for t in range(trials_per_prompt)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(lambda j: run_trial(j[0], backend, j[1], ledger), jobs))
    else:
        trials = [run_trial(p, backend, t, ledger) for p, t in jobs]
    by_prompt: dict[str, list[TrialResult]] = {p.id: [] for p in prompts}
    for tr in trials:
        by_prompt[tr.prompt_id].append(tr)
    label = model or getattr(backend, "label", type(backend).__name__)
    return [EvalResult.from_trials(pid, trs, label) for pid, trs in by_prompt.items()]
