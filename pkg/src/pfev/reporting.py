"""Result persistence and figure rendering.

Every run directory receives line-delimited structured records, a flat CSV
summary, and plot-ready series; figures are rendered to PNG alongside the
delimited output. History files exclude wall-clock so identical seeded runs
are byte-identical; timings go to a sidecar file.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import IterationRecord, RunConfig, RunHistory, config_from_dict, config_to_dict

SCHEMA_VERSION = 1

HISTORY_FILE = "history.jsonl"
TIMINGS_FILE = "timings.jsonl"
SUMMARY_FILE = "summary.csv"
RHV_FIGURE = "rhv.png"


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def emit_history(history: RunHistory, out_dir: str | Path) -> dict[str, Path]:
    """Write history, timings, summary, and the RHV figure for one run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "history",
        "config": config_to_dict(history.config),
        "reference_point": history.reference_point,
        "reference_hypervolume": history.reference_hypervolume,
        "initial_inputs": history.initial_inputs,
        "initial_outputs": history.initial_outputs,
        "initial_hypervolume": history.initial_hypervolume,
        "initial_rhv": history.initial_rhv,
        "aborted": history.aborted,
        "error": history.error,
    }
    history_path = out / HISTORY_FILE
    with history_path.open("w") as fh:
        fh.write(_json_line(header) + "\n")
        for rec in history.records:
            fh.write(
                _json_line(
                    {
                        "iteration": rec.iteration,
                        "chosen_x": rec.chosen_x,
                        "observed_y": rec.observed_y,
                        "chosen_lambda": rec.chosen_lambda,
                        "acquisition_value": rec.acquisition_value,
                        "observed_hypervolume": rec.observed_hypervolume,
                        "rhv": rec.rhv,
                    }
                )
                + "\n"
            )

    timings_path = out / TIMINGS_FILE
    with timings_path.open("w") as fh:
        fh.write(
            _json_line({"schema_version": SCHEMA_VERSION, "kind": "timings"}) + "\n"
        )
        for rec in history.records:
            fh.write(
                _json_line({"iteration": rec.iteration, "timings": rec.timings})
                + "\n"
            )

    summary_path = out / SUMMARY_FILE
    with summary_path.open("w", newline="") as fh:
        fh.write(f"# pfev-schema v{SCHEMA_VERSION} kind=run-summary\n")
        writer = csv.writer(fh)
        writer.writerow(
            [
                "iteration",
                "rhv",
                "observed_hypervolume",
                "chosen_lambda",
                "acquisition_value",
            ]
        )
        for rec in history.records:
            writer.writerow(
                [
                    rec.iteration,
                    rec.rhv,
                    rec.observed_hypervolume,
                    rec.chosen_lambda[0] if rec.chosen_lambda else "",
                    rec.acquisition_value[0] if rec.acquisition_value else "",
                ]
            )

    fig_path = out / RHV_FIGURE
    _plot_single_run(history, fig_path)
    return {
        "history": history_path,
        "timings": timings_path,
        "summary": summary_path,
        "figure": fig_path,
    }


def parse_history(out_dir: str | Path) -> RunHistory:
    """Reconstruct a RunHistory from its emitted files (timings included)."""
    out = Path(out_dir)
    lines = (out / HISTORY_FILE).read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version: {header.get('schema_version')}")
    records = []
    for line in lines[1:]:
        payload = json.loads(line)
        records.append(
            IterationRecord(
                iteration=payload["iteration"],
                chosen_x=payload["chosen_x"],
                observed_y=payload["observed_y"],
                chosen_lambda=payload["chosen_lambda"],
                acquisition_value=payload["acquisition_value"],
                observed_hypervolume=payload["observed_hypervolume"],
                rhv=payload["rhv"],
            )
        )
    timings_file = out / TIMINGS_FILE
    if timings_file.exists():
        by_iteration = {}
        for line in timings_file.read_text().splitlines()[1:]:
            payload = json.loads(line)
            by_iteration[payload["iteration"]] = payload["timings"]
        for rec in records:
            rec.timings = by_iteration.get(rec.iteration, {})
    return RunHistory(
        config=config_from_dict(header["config"]),
        reference_point=header["reference_point"],
        reference_hypervolume=header["reference_hypervolume"],
        initial_inputs=header["initial_inputs"],
        initial_outputs=header["initial_outputs"],
        initial_hypervolume=header["initial_hypervolume"],
        initial_rhv=header["initial_rhv"],
        records=records,
        aborted=header.get("aborted", False),
        error=header.get("error"),
    )


def emit_table(rows: Sequence[dict], path: str | Path, kind: str) -> Path:
    """Write a list of homogeneous dict rows as CSV with a schema header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ValueError("no rows to write")
    columns = list(rows[0].keys())
    with path.open("w", newline="") as fh:
        fh.write(f"# pfev-schema v{SCHEMA_VERSION} kind={kind}\n")
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    return path


def read_table(path: str | Path) -> list[dict]:
    """Read a schema-headed CSV back into dict rows (numbers parsed)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# pfev-schema"):
        raise ValueError("missing schema header")
    reader = csv.DictReader(lines[1:])
    rows = []
    for raw in reader:
        row = {}
        for key, value in raw.items():
            try:
                row[key] = int(value)
            except (TypeError, ValueError):
                try:
                    row[key] = float(value)
                except (TypeError, ValueError):
                    row[key] = value
        rows.append(row)
    return rows


# ----------------------------------------------------------------------------
# aggregation and figures
# ----------------------------------------------------------------------------


def rhv_series(histories: Sequence[RunHistory]) -> list[dict]:
    """Across-seed RHV aggregation: one row per iteration with mean and sd."""
    if not histories:
        raise ValueError("no histories to aggregate")
    n_iter = min(len(h.records) for h in histories)
    rows = []
    for t in range(n_iter):
        values = np.array([h.records[t].rhv for h in histories])
        rows.append(
            {
                "iteration": t + 1,
                "rhv_mean": float(values.mean()),
                "rhv_sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
                "n_seeds": int(values.size),
            }
        )
    return rows


def _plot_single_run(history: RunHistory, path: Path) -> None:
    iterations = [r.iteration for r in history.records]
    rhvs = [r.rhv for r in history.records]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(iterations, rhvs, marker="o", ms=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative hypervolume")
    ax.set_title(f"{history.config.strategy} on {history.config.problem.kind}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rhv_bands(
    series_by_label: dict[str, Sequence[dict]], path: str | Path, title: str = ""
) -> Path:
    """Mean RHV with a +-1 sd band per label (strategy), one figure."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for label, rows in series_by_label.items():
        it = np.array([r["iteration"] for r in rows])
        mean = np.array([r["rhv_mean"] for r in rows])
        sd = np.array([r["rhv_sd"] for r in rows])
        (line,) = ax.plot(it, mean, label=label)
        ax.fill_between(it, mean - sd, mean + sd, alpha=0.2, color=line.get_color())
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative hypervolume")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_gap_study(rows: Sequence[dict], path: str | Path) -> Path:
    """Volume ratios versus frontier size, one panel per objective count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dims = sorted({r["n_objectives"] for r in rows})
    fig, axes = plt.subplots(1, len(dims), figsize=(4.5 * len(dims), 4), squeeze=False)
    for ax, n_obj in zip(axes[0], dims):
        sub = [r for r in rows if r["n_objectives"] == n_obj]
        sizes = sorted({r["frontier_size"] for r in sub})
        for key, label in (("over_ratio", "tight"), ("under_ratio", "conservative")):
            means = [
                np.mean([r[key] for r in sub if r["frontier_size"] == s])
                for s in sizes
            ]
            ax.plot(sizes, means, marker="o", label=label)
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_xscale("log")
        ax.set_xlabel("frontier size")
        ax.set_ylabel("volume ratio to exact")
        ax.set_title(f"L = {n_obj}")
        ax.legend()
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_estimator_study(rows: Sequence[dict], path: str | Path) -> Path:
    """MSE versus sample count per estimator, log-log."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label in sorted({r["estimator"] for r in rows}):
        sub = sorted((r for r in rows if r["estimator"] == label), key=lambda r: r["k"])
        ax.errorbar(
            [r["k"] for r in sub],
            [r["mse_mean"] for r in sub],
            yerr=[r["mse_se"] for r in sub],
            marker="o",
            label=label,
            capsize=3,
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("samples K")
    ax.set_ylabel("MSE vs pseudo ground truth")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
