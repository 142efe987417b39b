"""Command-line entry point: ``aerobuild {build,eval,matrix,report}``.

Exit codes: 0 ok, 2 bad configuration or input, 3 planner backend failure,
4 build finished without reaching its design.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .config import OPTIONS, ConfigError, RunConfig, load_config
from .dronesim import BuildAborted, BuildConfig, ErrorModel, run_build
from .evalharness import (CorpusError, corpus_mock_backend, emit_report, load_corpus,
                          load_results, run_constrained_suite)
from .evalharness.matrix import MatrixAborted, derive_seeds, run_reprompt_matrix
from .evalharness.plotting import pad_chart
from .evalharness.report import emit_matrix_report
from .framesync import pad_map_hardcoded
from .gridworld import GridError, new_world
from .planner import BackendError, LiveBackend, MockBackend, RunLedger

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND, EXIT_INCOMPLETE = 0, 2, 3, 4

STEP_COLUMNS = ("index", "planned", "planned_layer", "outcome", "executed", "executed_layer",
                "observed", "observed_layer", "classification", "verified", "reprompt_issued")


class CliError(Exception):
    def __init__(self, message: str, code: int, kind: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="YAML file of config keys (flags override it)")
    for opt in OPTIONS:
        p.add_argument(_flag(opt.key), dest=opt.key, default=None, metavar=opt.metavar,
                       help=f"{opt.help} (default: {opt.default!r})")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="aerobuild",
                                     description="LLM-planned block building with a simulated drone.")
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", parents=[common], help="run one closed-loop build")
    b.add_argument("--request", required=True, help="design request, e.g. 'square'")
    sub.add_parser("eval", parents=[common], help="score the constrained-prompt corpus")
    sub.add_parser("matrix", parents=[common],
                   help="paired runs with and without re-planning over designs x seeds")
    r = sub.add_parser("report", parents=[common], help="re-render a report from a trials CSV")
    r.add_argument("--trials-csv", required=True, metavar="PATH")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides({o.key: getattr(args, o.key) for o in OPTIONS})


def _world_and_pad(cfg: RunConfig):
    try:
        world = new_world(cfg.world_dims, cfg.cell_size_m, cfg.pad_size, cfg.pad_origin)
    except GridError as exc:
        raise CliError(str(exc), EXIT_CONFIG, "config") from None
    pad_map = pad_map_hardcoded(cfg.pad_anchor, math.radians(cfg.pad_yaw_deg), cfg.spacing_m,
                                cfg.pad_size)
    return world, pad_map


def _backend(cfg: RunConfig, mock_factory):
    if cfg.backend == "mock":
        return mock_factory()
    live = LiveBackend(cfg.endpoint, cfg.model, cfg.api_key_env, provider=cfg.provider,
                       timeout_s=cfg.timeout_s, max_retries=cfg.max_retries,
                       temperature=cfg.temperature, max_tokens=cfg.max_tokens)
    try:
        live.api_key()  # fail before any work is done
    except BackendError as exc:
        raise CliError(str(exc), EXIT_BACKEND, "backend") from None
    return live


def _error_model(cfg: RunConfig) -> ErrorModel:
    return ErrorModel(misplace_prob=cfg.misplace_prob, drop_fail_prob=cfg.drop_fail_prob,
                      pickup_fail_prob=cfg.pickup_fail_prob, seed=cfg.seed,
                      forced=tuple(tuple(f) for f in cfg.force_offset))


def _build_config(cfg: RunConfig) -> BuildConfig:
    return BuildConfig(reprompt_enabled=cfg.reprompt, max_reprompts=cfg.max_reprompts,
                       max_steps=cfg.max_steps)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fresh_ledger(out: Path) -> RunLedger:
    path = out / "ledger.jsonl"
    if path.exists():
        path.unlink()
    return RunLedger(path)


def _write_steps_csv(path: Path, report) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEP_COLUMNS)
        for s in report.steps:
            d = s.to_dict()
            w.writerow(["" if d[c] is None else
                        (" ".join(map(str, d[c])) if isinstance(d[c], list) else
                         str(d[c]).lower() if isinstance(d[c], bool) else d[c])
                        for c in STEP_COLUMNS])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_build(args, cfg: RunConfig) -> int:
    world, pad_map = _world_and_pad(cfg)
    mock = MockBackend()
    backend = _backend(cfg, lambda: mock)
    target = None
    try:
        target = mock.design_for(args.request).target_grids()
    except KeyError:
        if cfg.backend == "mock":
            raise CliError(f"unknown design {args.request!r}; available: "
                           + ", ".join(sorted(mock.library)), EXIT_CONFIG, "config") from None
    out = _out_dir(cfg)
    ledger = _fresh_ledger(out)
    frame_dir = out / "frames" if cfg.dump_frames else None
    try:
        report = run_build(args.request, backend, world, pad_map, _error_model(cfg),
                           _build_config(cfg), target=target, ledger=ledger, frame_dir=frame_dir)
    except BuildAborted as exc:
        (out / "build_report.json").write_text(exc.report.to_json(), encoding="utf-8")
        raise CliError(str(exc.cause), EXIT_BACKEND, "backend") from None
    (out / "build_report.json").write_text(report.to_json(), encoding="utf-8")
    _write_json(out / "build_meta.json", {"duration_s": report.duration_s,
                                          "config": cfg.to_dict()})
    _write_steps_csv(out / "build_steps.csv", report)
    pad_chart(report, out / "build_final.svg")
    ok = report.completed and report.final_iou == 1.0
    print(f"{args.request}: termination={report.termination} final_iou={report.final_iou:.3f} "
          f"target_iou={report.target_iou if report.target_iou is None else round(report.target_iou, 3)} "
          f"prompts={report.prompts_used} reprompts={report.reprompts} "
          f"unrecovered_mismatch={str(report.unrecovered_mismatch).lower()} -> {out}")
    return EXIT_OK if ok else EXIT_INCOMPLETE


def cmd_eval(args, cfg: RunConfig) -> int:
    try:
        prompts = load_corpus(cfg.suite or None)
    except CorpusError as exc:
        raise CliError(str(exc), EXIT_CONFIG, "corpus") from None
    backend = _backend(cfg, lambda: corpus_mock_backend(prompts))
    out = _out_dir(cfg)
    results = run_constrained_suite(prompts, backend, cfg.trials, workers=cfg.workers,
                                    ledger=_fresh_ledger(out))
    paths = emit_report(results, out)
    for r in results:
        print(f"{r.prompt_id:24s} mean_iou={r.mean_iou:.3f} var={r.variance:.4f}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_matrix(args, cfg: RunConfig) -> int:
    world, pad_map = _world_and_pad(cfg)
    if cfg.backend != "mock":
        raise CliError("matrix runs need the mock planner (backend: mock)", EXIT_CONFIG, "config")
    backend = MockBackend()
    designs = [d.strip() for d in cfg.designs.split(",") if d.strip()] or list(backend.library)
    unknown = []
    for d in designs:
        try:
            backend.design_for(d)
        except KeyError:
            unknown.append(d)
    if unknown:
        raise CliError(f"unknown design(s) {unknown}; available: "
                       + ", ".join(sorted(backend.library)), EXIT_CONFIG, "config")
    seeds = derive_seeds(cfg.seed, cfg.seeds)
    try:
        rows = run_reprompt_matrix(designs, backend, _error_model(cfg), seeds, world=world,
                                   pad_map=pad_map, cfg=_build_config(cfg), workers=cfg.workers)
    except MatrixAborted as exc:
        raise CliError(str(exc), EXIT_BACKEND, "backend") from None
    out = _out_dir(cfg)
    paths = emit_matrix_report(rows, out)
    for d in designs:
        rs = [r for r in rows if r.design == d]
        on = sum(r.iou_reprompt == 1.0 for r in rs)
        off = sum(r.iou_no_reprompt == 1.0 for r in rs)
        print(f"{d:52s} success reprompt={on}/{len(rs)} no_reprompt={off}/{len(rs)}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    path = Path(args.trials_csv)
    if not path.is_file():
        raise CliError(f"trials CSV not found: {path}", EXIT_CONFIG, "input")
    try:
        results = load_results(path)
    except (KeyError, ValueError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_CONFIG, "input") from None
    paths = emit_report(results, _out_dir(cfg), name="report")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "eval": cmd_eval, "matrix": cmd_matrix, "report": cmd_report}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except CliError as exc:
        return _fail(exc.kind, str(exc), exc.code)
    except BackendError as exc:
        return _fail("backend", str(exc), EXIT_BACKEND)


if __name__ == "__main__":
    sys.exit(main())
