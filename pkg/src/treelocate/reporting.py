"""Result emission: delimited output plus rendered figures.

CSV and JSON bytes are a deterministic function of the report (header
row, '.' decimal, ',' separator; JSON pretty-printed with sorted keys;
floats written with shortest round-trip repr; no timestamps). Figures
are convenience renderings next to the delimited files and carry no
accuracy contract.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ConfusionResult, RiverResult, ScalingResult, SufficiencyResult, TriangleResult


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    return str(value)


def emit_results(rows: Sequence[dict], path, fmt: str = "csv", meta: dict | None = None) -> Path:
    """Write rows to ``path`` as csv or json; byte-identical per report."""
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to emit")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        header = list(rows[0].keys())
        lines = [",".join(header)]
        for row in rows:
            if list(row.keys()) != header:
                raise ValueError("rows have inconsistent columns")
            lines.append(",".join(_cell(row[k]) for k in header))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        payload = {"rows": rows}
        if meta:
            payload["meta"] = meta
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")
    return path


def slugify(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")


def _with_suffix(path: Path, tag: str | None, ext: str) -> Path:
    stem = path.stem + (f"__{tag}" if tag else "")
    return path.with_name(stem + ext)


# ------------------------------------------------------------- figures

def render_confusion_figure(result: ConfusionResult, label: str, matrix: np.ndarray, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    share = matrix / max(result.trials, 1)
    im = ax.imshow(share, cmap="Greys", vmin=0.0, vmax=1.0, origin="upper")
    ax.set_xticks(range(len(result.candidates)), [str(c) for c in result.candidates])
    ax.set_yticks(range(len(result.sources)), [str(s) for s in result.sources])
    ax.set_xlabel("estimated source")
    ax.set_ylabel("true source")
    ax.set_title(f"confusion, {label} ({result.trials} trials/source)")
    fig.colorbar(im, ax=ax, label="fraction of trials")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_scaling_figure(result: ScalingResult, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if result.vary == "check_vs_hat":
        xs = [row["nodes"] for row in result.rows]
        for prefix, color in (("hat", "tab:blue"), ("check", "tab:orange")):
            means = np.array([row[f"{prefix}_mean_error"] for row in result.rows])
            stds = np.array([row[f"{prefix}_std_error"] for row in result.rows])
            ax.plot(xs, means, "o-", color=color, label=prefix)
            ax.fill_between(xs, means - stds, means + stds, color=color, alpha=0.2)
        ax.set_xlabel("tree size (nodes)")
        ax.set_ylabel("edge-distance error")
    else:
        x_key = "observers" if result.vary == "observers" else "nodes"
        y_key = "mean_normalized_error" if result.vary == "normalized" else "mean_error"
        s_key = "std_normalized_error" if result.vary == "normalized" else "std_error"
        for label in sorted({row["delay"] for row in result.rows}):
            rows = [row for row in result.rows if row["delay"] == label]
            xs = [row[x_key] for row in rows]
            means = np.array([row[y_key] for row in rows])
            stds = np.array([row[s_key] for row in rows])
            ax.plot(xs, means, "o-", label=label)
            ax.fill_between(xs, means - stds, means + stds, alpha=0.2)
        ax.set_xlabel(x_key)
        ax.set_ylabel(y_key.replace("_", " "))
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_river_figure(result: RiverResult, path: Path, top: int = 25) -> Path:
    rows = result.rows()[:top]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    xs = np.arange(len(rows))
    freqs = [row["frequency"] for row in rows]
    dists = np.array([row["edge_distance_to_root"] for row in rows])
    colors = plt.cm.viridis(dists / max(dists.max(), 1))
    ax.bar(xs, freqs, color=colors)
    ax.set_xticks(xs, [row["label"] for row in rows], rotation=90, fontsize=7)
    ax.set_ylabel("selection frequency")
    ax.set_title(
        f"river source estimates over {result.trials} trials "
        f"(bar color: edge distance to the true root)"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_triangle_figure(result: TriangleResult, path: Path) -> Path:
    rows = [r for r in result.rows if "prob_mc" in r]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    labels = [f"{r['rates']} T{r['tree']}" for r in rows]
    xs = np.arange(len(rows))
    ax.bar(xs - 0.2, [r["prob_mc"] for r in rows], width=0.4, label="monte carlo")
    ax.bar(xs + 0.2, [r["prob_exact"] for r in rows], width=0.4, label="closed form")
    ax.set_xticks(xs, labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("transmission-tree probability")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sufficiency_figure(result: SufficiencyResult, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for sample, row in zip(result.samples, result.rows):
        ax.hist(sample, bins=80, density=True, alpha=0.5,
                label=f"source={row['source']} (mean {row['conditional_mean']:.3f})")
        ax.axvline(row["conditional_mean"], linestyle="--", linewidth=1)
    ax.set_xlabel("far observer infection time, center infected first")
    ax.set_ylabel("conditional density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


# ------------------------------------------------------ per-experiment

def emit_confusion(result: ConfusionResult, out: Path, fmt: str, figures: bool) -> list[Path]:
    written = []
    ext = f".{fmt}"
    if fmt == "json":
        rows = []
        for label, matrix in result.matrices:
            for row in result.rows_for(matrix):
                rows.append({"delay": label, **row})
        written.append(emit_results(rows, _with_suffix(out, None, ext), fmt,
                                    meta={"trials": result.trials}))
    else:
        for label, matrix in result.matrices:
            written.append(
                emit_results(result.rows_for(matrix), _with_suffix(out, slugify(label), ext), fmt)
            )
    if figures:
        for label, matrix in result.matrices:
            written.append(
                render_confusion_figure(result, label, matrix, _with_suffix(out, slugify(label), ".png"))
            )
    return written


def emit_scaling(result: ScalingResult, out: Path, fmt: str, figures: bool) -> list[Path]:
    written = [emit_results(result.rows, _with_suffix(out, None, f".{fmt}"), fmt)]
    if figures:
        written.append(render_scaling_figure(result, _with_suffix(out, None, ".png")))
    return written


def emit_river(result: RiverResult, out: Path, fmt: str, figures: bool) -> list[Path]:
    written = [emit_results(result.rows(), _with_suffix(out, None, f".{fmt}"), fmt,
                            meta=result.summary)]
    written.append(
        emit_results([result.summary], _with_suffix(out, "summary", ".json"), "json")
    )
    if figures:
        written.append(render_river_figure(result, _with_suffix(out, None, ".png")))
    return written


def emit_triangle(result: TriangleResult, out: Path, fmt: str, figures: bool) -> list[Path]:
    prob_rows = [r for r in result.rows if "prob_mc" in r]
    ks_rows = [r for r in result.rows if "ks_ok" in r]
    written = [emit_results(prob_rows, _with_suffix(out, None, f".{fmt}"), fmt)]
    written.append(emit_results(ks_rows, _with_suffix(out, "ks", f".{fmt}"), fmt))
    if figures:
        written.append(render_triangle_figure(result, _with_suffix(out, None, ".png")))
    return written


def emit_sufficiency(result: SufficiencyResult, out: Path, fmt: str, figures: bool) -> list[Path]:
    written = [emit_results(result.rows, _with_suffix(out, None, f".{fmt}"), fmt,
                            meta=result.summary)]
    written.append(emit_results([result.summary], _with_suffix(out, "summary", ".json"), "json"))
    if figures:
        written.append(render_sufficiency_figure(result, _with_suffix(out, None, ".png")))
    return written
