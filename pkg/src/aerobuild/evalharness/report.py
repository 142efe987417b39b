"""CSV / JSON / SVG report files for suites and paired matrices."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .metrics import mean_and_variance
from .plotting import iou_bar_chart, matrix_chart

TRIAL_COLUMNS = (
    "model", "prompt_id", "trial_id", "iou", "parse_ok", "error", "violations", "latency_ms",
    "cost_tokens", "prompt_mean_iou", "prompt_var_pop",
)
TABLE_COLUMNS = ("model", "avg_iou", "avg_var_pop", "inference_ms", "total_tokens", "prompts",
                 "trials")
MATRIX_COLUMNS = (
    "design", "seed", "iou_reprompt", "iou_no_reprompt", "target_iou_reprompt",
    "target_iou_no_reprompt", "prompts_reprompt", "prompts_no_reprompt", "reprompts",
    "misplacements", "events_match",
)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def _write_csv(path: Path, columns, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])
    return path


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def model_table(results) -> list[dict]:
    """One row per model: average IoU, average variance, mean latency, tokens."""
    rows = []
    for model in dict.fromkeys(r.model for r in results):
        rs = [r for r in results if r.model == model]
        lat = [t.latency_ms for r in rs for t in r.trials if t.latency_ms is not None]
        toks = [t.cost_tokens for r in rs for t in r.trials if t.cost_tokens is not None]
        rows.append({
            "model": model,
            "avg_iou": mean_and_variance(r.mean_iou for r in rs)[0],
            "avg_var_pop": mean_and_variance(r.variance for r in rs)[0],
            "inference_ms": mean_and_variance(lat)[0] if lat else None,
            "total_tokens": sum(toks) if toks else None,
            "prompts": len(rs),
            "trials": sum(len(r.trials) for r in rs),
        })
    return rows


def emit_report(results, out_dir: str | Path, name: str = "suite") -> dict[str, Path]:
    """Write ``<name>_trials.csv`` (one row per trial), ``<name>_table.csv`` (per model),
    ``<name>_summary.json`` and ``<name>_iou.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = list(results)
    trial_rows = []
    for r in results:
        for t in r.trials:
            trial_rows.append({
                "model": r.model, "prompt_id": r.prompt_id, "trial_id": t.trial_id,
                "iou": t.iou, "parse_ok": t.parse_ok, "error": t.error,
                "violations": t.violations, "latency_ms": t.latency_ms,
                "cost_tokens": t.cost_tokens, "prompt_mean_iou": r.mean_iou,
                "prompt_var_pop": r.variance,
            })
    table = model_table(results)
    summary = {
        "variance": "population (ddof=0) over the trials of each prompt",
        "models": table,
        "prompts": [{"model": r.model, "prompt_id": r.prompt_id, "mean_iou": r.mean_iou,
                     "variance": r.variance, "trials": len(r.trials),
                     "unparsed": sum(not t.parse_ok for t in r.trials)} for r in results],
    }
    return {
        "trials_csv": _write_csv(out / f"{name}_trials.csv", TRIAL_COLUMNS, trial_rows),
        "table_csv": _write_csv(out / f"{name}_table.csv", TABLE_COLUMNS, table),
        "summary_json": _write_json(out / f"{name}_summary.json", summary),
        "chart_svg": iou_bar_chart(results, out / f"{name}_iou.svg"),
    }


def matrix_summary(rows) -> dict:
    designs = {}
    for d in dict.fromkeys(r.design for r in rows):
        rs = [r for r in rows if r.design == d]
        designs[d] = {
            "runs": len(rs),
            "success_reprompt": sum(r.iou_reprompt == 1.0 for r in rs),
            "success_no_reprompt": sum(r.iou_no_reprompt == 1.0 for r in rs),
            "mean_iou_reprompt": mean_and_variance(r.iou_reprompt for r in rs)[0],
            "mean_iou_no_reprompt": mean_and_variance(r.iou_no_reprompt for r in rs)[0],
        }
    return {
        "runs": len(rows),
        "success_reprompt": sum(r.iou_reprompt == 1.0 for r in rows),
        "success_no_reprompt": sum(r.iou_no_reprompt == 1.0 for r in rows),
        "events_match": all(r.events_match for r in rows),
        "designs": designs,
    }


def emit_matrix_report(rows, out_dir: str | Path, name: str = "matrix") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    return {
        "pairs_csv": _write_csv(out / f"{name}_pairs.csv", MATRIX_COLUMNS,
                                [r.to_dict() for r in rows]),
        "summary_json": _write_json(out / f"{name}_summary.json", matrix_summary(rows)),
        "chart_svg": matrix_chart(rows, out / f"{name}_success.svg"),
    }


def load_results(path: str | Path):
    """Rebuild EvalResults from a ``*_trials.csv`` written by :func:`emit_report`."""
    from .suite import EvalResult, TrialResult

    groups: dict[tuple[str, str], list] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            num = lambda v, f: None if v == "" else f(v)  # noqa: E731
            t = TrialResult(row["prompt_id"], int(row["trial_id"]), None, float(row["iou"]),
                            num(row["latency_ms"], float), num(row["cost_tokens"], int),
                            row["parse_ok"] == "true", row["error"] or None,
                            int(row["violations"]))
            groups.setdefault((row["model"], row["prompt_id"]), []).append(t)
    return [EvalResult.from_trials(pid, trs, model) for (model, pid), trs in groups.items()]
