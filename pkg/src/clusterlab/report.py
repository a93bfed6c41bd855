"""Delimited reports, JSON run detail, and figure rendering.

CSV output is UTF-8 with a header row and '.' as the decimal
separator; metric values print as %.12g and wall times at millisecond
resolution.  JSON detail files carry full-precision per-run values, so
every CSV aggregate is recomputable from them.  Figures render through
the Agg backend into files next to the delimited output; every writer
returns the path it wrote.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict

import numpy as np

from .metrics import METRIC_NAMES, StabilityRecord
from .pipeline import RunArtifact, SuiteResult, config_to_dict

WALL_TIME_DECIMALS = 3


def _cell(value) -> str:
    """One CSV cell: absent values print empty, floats as %.12g."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _wall_cell(seconds: float | None) -> str:
    if seconds is None:
        return ""
    return format(float(seconds), f".{WALL_TIME_DECIMALS}f")


def _write_rows(path, header: list[str], rows: list[list[str]]) -> str:
    path = str(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _write_json(path, payload) -> str:
    path = str(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# delimited reports


def suite_table(result: SuiteResult, include_timing: bool = True) -> tuple[list[str], list[list[str]]]:
    """Header and rows for the suite CSV: one row per pipeline."""
    header = ["dataset", "reduction", "algorithm", "params", "runs", "n_rows", "n_features"]
    for name in METRIC_NAMES:
        header += [f"{name}_mean", f"{name}_std"]
    header += ["n_noise_mean", "eps"]
    if include_timing:
        header.append("wall_time_mean_s")
    header += ["warnings", "error"]

    rows = []
    for entry in result.entries:
        cfg = entry.config
        clusterer = cfg.clusterer
        row = [
            cfg.dataset.label,
            cfg.reduction_label,
            clusterer.algorithm if clusterer is not None else "",
            clusterer.params_label if clusterer is not None else "",
            str(cfg.runs),
        ]
        a = entry.artifact
        if a is None:
            row += [""] * 2
            row += [""] * (2 * len(METRIC_NAMES))
            row += ["", ""]
            if include_timing:
                row.append("")
            row += ["", entry.error or ""]
        else:
            row += [str(a.n_rows), str(a.n_features_active)]
            for name in METRIC_NAMES:
                row += [_cell(a.report.mean(name)), _cell(a.report.std(name))]
            noise_mean = float(np.mean([r.n_noise for r in a.report.per_run]))
            row.append(_cell(noise_mean))
            row.append(_cell(a.resolved_params.get("eps")))
            if include_timing:
                walls = [r.wall_time_seconds for r in a.report.per_run]
                row.append(_wall_cell(float(np.mean(walls))))
            row += ["; ".join(a.warnings), ""]
        rows.append(row)
    return header, rows


def write_suite_csv(result: SuiteResult, path, include_timing: bool = True) -> str:
    header, rows = suite_table(result, include_timing=include_timing)
    return _write_rows(path, header, rows)


def _artifact_detail(a: RunArtifact) -> dict:
    aggregates = {
        name: {"mean": a.report.mean(name), "std": a.report.std(name)} for name in METRIC_NAMES
    }
    return {
        "dataset_name": a.dataset_name,
        "n_rows": a.n_rows,
        "n_features_in": a.n_features_in,
        "n_features_active": a.n_features_active,
        "resolved_params": dict(a.resolved_params),
        "warnings": list(a.warnings),
        "runs": [asdict(r) for r in a.report.per_run],
        "aggregates": aggregates,
    }


def write_suite_json(result: SuiteResult, path) -> str:
    """Full per-run detail for every suite entry."""
    entries = []
    for entry in result.entries:
        d: dict = {"config": config_to_dict(entry.config), "error": entry.error}
        if entry.artifact is not None:
            d.update(_artifact_detail(entry.artifact))
        entries.append(d)
    return _write_json(path, {"schema_version": 1, "entries": entries})


def write_run_csv(artifact: RunArtifact, path, include_timing: bool = True) -> str:
    """Per-run metric rows for a single executed pipeline."""
    header = ["run"] + list(METRIC_NAMES) + ["n_noise"]
    if include_timing:
        header.append("wall_time_s")
    rows = []
    for i, run in enumerate(artifact.report.per_run):
        row = [str(i)]
        row += [_cell(getattr(run, name)) for name in METRIC_NAMES]
        row.append(str(run.n_noise))
        if include_timing:
            row.append(_wall_cell(run.wall_time_seconds))
        rows.append(row)
    return _write_rows(path, header, rows)


def write_run_json(artifact: RunArtifact, path) -> str:
    payload = {"schema_version": 1, "config": config_to_dict(artifact.config)}
    payload.update(_artifact_detail(artifact))
    return _write_json(path, payload)


def write_embedding_csv(coords: np.ndarray, labels: np.ndarray, path) -> str:
    """One row per sample: coordinates (exact round-trip) plus label."""
    coords = np.asarray(coords, dtype=np.float64)
    header = [f"dim_{j}" for j in range(coords.shape[1])] + ["label"]
    rows = [
        [format(v, ".17g") for v in row] + [str(int(label))]
        for row, label in zip(coords, labels)
    ]
    return _write_rows(path, header, rows)


def write_stability_csv(values, path) -> str:
    """Per-run ARI dump backing stability distribution plots."""
    rows = [[str(i), _cell(v)] for i, v in enumerate(values)]
    return _write_rows(path, ["run", "ari"], rows)


def write_stability_json(record: StabilityRecord, config_dict: dict, path) -> str:
    payload = {
        "schema_version": 1,
        "config": config_dict,
        "ari_mean": record.ari_mean,
        "ari_std": record.ari_std,
        "stability_score": record.stability_score,
        "runs": record.runs,
    }
    return _write_json(path, payload)


def write_profile_csv(profile, path) -> str:
    """Descending k-distance profile, one row per rank."""
    rows = [[str(i), _cell(v)] for i, v in enumerate(np.asarray(profile, dtype=np.float64))]
    return _write_rows(path, ["rank", "k_distance"], rows)


# ---------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> str:
    path = str(path)
    fig.savefig(path, dpi=120)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def render_suite_figure(result: SuiteResult, path) -> str:
    """Horizontal ARI bars, one per successful suite row."""
    plt = _pyplot()
    labels, means, stds = [], [], []
    for entry in result.entries:
        if entry.artifact is None:
            continue
        mean = entry.artifact.report.mean("ari")
        if mean is None:
            continue
        cfg = entry.config
        clusterer = cfg.clusterer.algorithm if cfg.clusterer is not None else "?"
        labels.append(f"{cfg.dataset.label} | {cfg.reduction_label} | {clusterer}")
        means.append(mean)
        stds.append(entry.artifact.report.std("ari") or 0.0)

    height = max(2.5, 0.35 * len(labels) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    if labels:
        y = np.arange(len(labels))[::-1]
        ax.barh(y, means, xerr=stds, color="#4878b0", height=0.6, capsize=3)
        ax.set_yticks(y)
        ax.set_yticklabels(labels, fontsize=8)
        ax.set_xlim(min(0.0, min(means) - 0.05), 1.05)
    else:
        ax.text(0.5, 0.5, "no successful pipelines", ha="center", va="center")
    ax.set_xlabel("ARI mean (error bars: std over runs)")
    fig.tight_layout()
    return _save(fig, path)


def render_stability_figure(values, record: StabilityRecord, path) -> str:
    plt = _pyplot()
    values = np.asarray(list(values), dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    bins = min(20, max(5, int(math.sqrt(values.size))))
    ax.hist(values, bins=bins, color="#4878b0", edgecolor="white")
    ax.axvline(record.ari_mean, color="#c44e52", linestyle="--", label=f"mean {record.ari_mean:.3f}")
    score = "undefined" if record.stability_score is None else f"{record.stability_score:.3f}"
    ax.set_title(f"ARI over {record.runs} runs (stability {score})")
    ax.set_xlabel("ARI")
    ax.set_ylabel("runs")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def render_embedding_figure(coords: np.ndarray, labels: np.ndarray, path, title: str = "") -> str:
    """Scatter of the first two embedding axes, colored by label.

    Negative labels (noise) plot as gray crosses.
    """
    plt = _pyplot()
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    x = coords[:, 0]
    y = coords[:, 1] if coords.shape[1] > 1 else np.zeros_like(x)
    fig, ax = plt.subplots(figsize=(6, 5))
    noise = labels < 0
    if np.any(noise):
        ax.scatter(x[noise], y[noise], c="#999999", marker="x", s=12, linewidths=0.8, label="noise")
    keep = ~noise
    ax.scatter(x[keep], y[keep], c=labels[keep] % 10, cmap="tab10", s=8, vmin=0, vmax=9)
    if title:
        ax.set_title(title)
    ax.set_xlabel("dim 0")
    ax.set_ylabel("dim 1")
    if np.any(noise):
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_profile_figure(profile, eps: float, path) -> str:
    plt = _pyplot()
    profile = np.asarray(profile, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(profile, color="#4878b0")
    ax.axhline(eps, color="#c44e52", linestyle="--", label=f"estimated eps {eps:.4g}")
    ax.set_xlabel("points, by descending k-distance")
    ax.set_ylabel("k-distance")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def render_run_figure(artifact: RunArtifact, path) -> str:
    """Per-run ARI and NMI bars for one pipeline."""
    plt = _pyplot()
    runs = artifact.report.per_run
    x = np.arange(len(runs))
    ari_values = np.array([math.nan if r.ari is None else r.ari for r in runs])
    nmi_values = np.array([math.nan if r.nmi is None else r.nmi for r in runs])
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(runs) + 2), 4))
    width = 0.4
    ax.bar(x - width / 2, ari_values, width=width, label="ARI", color="#4878b0")
    ax.bar(x + width / 2, nmi_values, width=width, label="NMI", color="#e49444")
    cfg = artifact.config
    clusterer = cfg.clusterer.algorithm if cfg.clusterer is not None else "?"
    ax.set_title(f"{cfg.dataset.label} | {cfg.reduction_label} | {clusterer}", fontsize=9)
    ax.set_xlabel("run")
    ax.set_xticks(x)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
