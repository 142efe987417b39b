"""Matplotlib figures written straight to SVG with reproducible bytes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "aerobuild",  # fixed ids for byte-identical output
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def _empty(path: Path, message: str) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 2))
        ax.axis("off")
        ax.text(0.5, 0.5, message, ha="center", va="center")
        return _save(fig, path)


def iou_bar_chart(results, path: str | Path) -> Path:
    """Mean IoU per prompt with population std-dev whiskers, one bar group per model."""
    path = Path(path)
    if not results:
        return _empty(path, "no results")
    prompts = list(dict.fromkeys(r.prompt_id for r in results))
    models = list(dict.fromkeys(r.model for r in results))
    width = 0.8 / len(models)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * len(prompts) + 2), 3.2))
        x = np.arange(len(prompts))
        for k, model in enumerate(models):
            by = {r.prompt_id: r for r in results if r.model == model}
            means = [by[p].mean_iou if p in by else 0.0 for p in prompts]
            sds = [np.sqrt(by[p].variance) if p in by else 0.0 for p in prompts]
            ax.bar(x + (k - (len(models) - 1) / 2) * width, means, width, yerr=sds,
                   capsize=2, label=model)
        ax.set_xticks(x)
        ax.set_xticklabels(prompts, rotation=60, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("mean IoU")
        if len(models) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def matrix_chart(rows, path: str | Path) -> Path:
    """Fraction of runs reaching IoU 1.0 per design, with and without re-planning."""
    path = Path(path)
    if not rows:
        return _empty(path, "no runs")
    designs = list(dict.fromkeys(r.design for r in rows))
    on, off = [], []
    for d in designs:
        rs = [r for r in rows if r.design == d]
        on.append(sum(r.iou_reprompt == 1.0 for r in rs) / len(rs))
        off.append(sum(r.iou_no_reprompt == 1.0 for r in rs) / len(rs))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(5.0, 0.9 * len(designs) + 2), 3.2))
        x = np.arange(len(designs))
        ax.bar(x - 0.2, on, 0.4, label="re-planning on")
        ax.bar(x + 0.2, off, 0.4, label="re-planning off")
        ax.set_xticks(x)
        ax.set_xticklabels(designs, rotation=30, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("runs with IoU = 1")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def pad_chart(report, path: str | Path) -> Path:
    """Final pad: committed design outlined, placed blocks filled (stacks darker)."""
    path = Path(path)
    n = report.final_state.pad_size
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 3.2))
        for c in report.committed_design:
            ax.add_patch(plt.Rectangle((c.x, c.y), 1, 1, fill=False, lw=1.5, ec="0.2", ls="--"))
        for p in report.final_state.placed:
            ok = p.cell in report.committed_design
            color = ("tab:green" if ok else "tab:purple")
            ax.add_patch(plt.Rectangle((p.cell.x + 0.1 + 0.1 * p.layer, p.cell.y + 0.1 + 0.1 * p.layer),
                                       0.8 - 0.2 * p.layer, 0.8 - 0.2 * p.layer,
                                       color=color, alpha=1.0 if p.layer == 0 else 0.6))
        ax.set_xlim(0, n)
        ax.set_ylim(0, n)
        ax.set_xticks(range(n + 1))
        ax.set_yticks(range(n + 1))
        ax.grid(True, lw=0.5)
        ax.set_aspect("equal")
        ax.set_title(f"{report.design_request}  IoU={report.final_iou:.3f}", fontsize=8)
        fig.tight_layout()
        return _save(fig, path)
