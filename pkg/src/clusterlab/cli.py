"""Command-line benchmark harness.

Exit codes: 0 success, 1 pipeline failure or partial suite failure,
2 invalid configuration or arguments, 3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import report
from .dataio import load_har, load_idx, write_csv
from .errors import ClusterLabError, FormatError, InvalidInput
from .neighbors import estimate_eps, k_distance_profile
from .pipeline import (
    DBSCAN_DEFAULT_MIN_PTS,
    NOISE_MODES,
    DbscanConfig,
    config_to_dict,
    config_warnings,
    load_config,
    load_suite,
    prepare_inputs,
    run_pipeline,
    run_suite,
    stability_run,
)
from .synth import KINDS, SynthSpec, generate

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_CONFIG = 2
EXIT_IO = 3


def _add_config_options(p: argparse.ArgumentParser, figures: bool = True, timing: bool = False) -> None:
    p.add_argument("config", help="pipeline config file (JSON)")
    p.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
    p.add_argument("--seed", type=int, default=None, help="override the config's master_seed")
    p.add_argument("--subsample", type=int, default=None, help="override the config's subsample_n")
    p.add_argument(
        "--noise-mode", choices=list(NOISE_MODES), default=None, help="override the config's noise_mode"
    )
    if figures:
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    if timing:
        p.add_argument(
            "--omit-timing", action="store_true", help="drop wall-time columns for byte-stable output"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clusterlab",
        description="Clustering benchmark harness: seeded pipelines, CSV reports, figures.",
        epilog="exit codes: 0 ok, 1 run/suite failure, 2 invalid config, 3 I/O error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one pipeline config")
    _add_config_options(p, timing=True)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("suite", help="execute a suite of pipelines into one table")
    _add_config_options(p, timing=True)
    p.set_defaults(handler=_cmd_suite)

    p = sub.add_parser("stability", help="repeated-run ARI spread for one pipeline")
    _add_config_options(p)
    p.set_defaults(handler=_cmd_stability)

    p = sub.add_parser("synth", help="generate a synthetic dataset as CSV")
    p.add_argument("kind", choices=list(KINDS))
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--n-samples", type=int, default=600)
    p.add_argument("--n-clusters", type=int, default=None, help="default: 2 for moons, 3 otherwise")
    p.add_argument("--noise-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=None)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("embed", help="reduce a dataset and dump the embedding as CSV")
    _add_config_options(p)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.set_defaults(handler=_cmd_embed)

    p = sub.add_parser("eps-plot", help="k-distance profile and eps estimate for DBSCAN")
    _add_config_options(p)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.set_defaults(handler=_cmd_eps_plot)

    p = sub.add_parser("import-idx", help="validate an IDX image/label pair and convert to CSV")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--name", default="idx")
    p.set_defaults(handler=_cmd_import_idx)

    p = sub.add_parser("import-har", help="validate a features/labels text pair and convert to CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--name", default="har")
    p.set_defaults(handler=_cmd_import_har)

    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.subsample is not None:
        cfg = replace(cfg, subsample_n=args.subsample)
    if args.noise_mode is not None:
        cfg = replace(cfg, noise_mode=args.noise_mode)
    return cfg


def _out_dir(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _print_warnings(warnings) -> None:
    for note in warnings:
        print(f"warning: {note}", file=sys.stderr)


def _sibling_figure(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + ".png"


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    artifact = run_pipeline(cfg)
    _print_warnings(artifact.warnings)
    out = _out_dir(args)
    include_timing = not args.omit_timing
    written = [
        report.write_run_csv(artifact, os.path.join(out, "run_metrics.csv"), include_timing=include_timing),
        report.write_run_json(artifact, os.path.join(out, "run_detail.json")),
    ]
    if artifact.embedding is not None:
        written.append(
            report.write_embedding_csv(
                artifact.embedding.coords, artifact.truth, os.path.join(out, "embedding.csv")
            )
        )
        if not args.no_figures:
            written.append(
                report.render_embedding_figure(
                    artifact.embedding.coords,
                    artifact.truth,
                    os.path.join(out, "embedding.png"),
                    title=f"{artifact.dataset_name} | {cfg.reduction_label}",
                )
            )
    if not args.no_figures:
        written.append(report.render_run_figure(artifact, os.path.join(out, "run_metrics.png")))
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_suite(args) -> int:
    configs = [_apply_overrides(cfg, args) for cfg in load_suite(args.config)]
    result = run_suite(configs)
    for entry in result.entries:
        if entry.artifact is not None:
            _print_warnings(entry.artifact.warnings)
    out = _out_dir(args)
    written = [
        report.write_suite_csv(result, os.path.join(out, "suite.csv"), include_timing=not args.omit_timing),
        report.write_suite_json(result, os.path.join(out, "suite_detail.json")),
    ]
    if not args.no_figures:
        written.append(report.render_suite_figure(result, os.path.join(out, "suite_ari.png")))
    for path in written:
        print(path)
    for entry in result.entries:
        if entry.error is not None:
            cfg = entry.config
            clusterer = cfg.clusterer.algorithm if cfg.clusterer is not None else "?"
            print(
                f"failed: {cfg.dataset.label} | {cfg.reduction_label} | {clusterer}: {entry.error}",
                file=sys.stderr,
            )
    return EXIT_FAILURE if result.n_failed else EXIT_OK


def _cmd_stability(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    outcome = stability_run(cfg)
    _print_warnings(outcome.artifact.warnings)
    out = _out_dir(args)
    values = [run.ari for run in outcome.artifact.report.per_run]
    written = [
        report.write_stability_csv(values, os.path.join(out, "stability_runs.csv")),
        report.write_stability_json(
            outcome.record, config_to_dict(cfg), os.path.join(out, "stability_summary.json")
        ),
    ]
    if not args.no_figures:
        defined = [v for v in values if v is not None]
        written.append(
            report.render_stability_figure(defined, outcome.record, os.path.join(out, "stability_hist.png"))
        )
    for path in written:
        print(path)
    score = outcome.record.stability_score
    print(f"stability score: {'undefined' if score is None else format(score, '.3f')}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    n_clusters = args.n_clusters
    if n_clusters is None:
        n_clusters = 2 if args.kind == "moons" else 3
    spec = SynthSpec(
        kind=args.kind,
        n_samples=args.n_samples,
        n_clusters=n_clusters,
        noise_fraction=args.noise_fraction,
        seed=args.seed,
        dim=args.dim,
    )
    ds = generate(spec)
    write_csv(ds, args.output)
    print(args.output)
    print(f"{ds.n_rows} rows, {ds.n_cols} features, {ds.n_classes} label classes")
    return EXIT_OK


def _cmd_embed(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if cfg.reduction is None:
        raise InvalidInput("embed requires a reduction in the config")
    _print_warnings(config_warnings(cfg))
    prep = prepare_inputs(cfg)
    written = [report.write_embedding_csv(prep.embedding.coords, prep.truth, args.output)]
    if not args.no_figures:
        written.append(
            report.render_embedding_figure(
                prep.embedding.coords,
                prep.truth,
                _sibling_figure(args.output),
                title=f"{prep.dataset_name} | {cfg.reduction_label}",
            )
        )
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_eps_plot(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if cfg.clusterer is None:
        min_pts = DBSCAN_DEFAULT_MIN_PTS
    elif isinstance(cfg.clusterer, DbscanConfig):
        min_pts = cfg.clusterer.min_pts
    else:
        raise InvalidInput("eps-plot requires a dbscan clusterer (or none) in the config")
    prep = prepare_inputs(cfg)
    profile = k_distance_profile(prep.X, max(1, min_pts - 1))
    eps = estimate_eps(profile)
    written = [report.write_profile_csv(profile, args.output)]
    if not args.no_figures:
        written.append(report.render_profile_figure(profile, eps, _sibling_figure(args.output)))
    for path in written:
        print(path)
    print(f"estimated eps: {eps:.12g}")
    return EXIT_OK


def _cmd_import_idx(args) -> int:
    ds = load_idx(args.images, args.labels, name=args.name)
    write_csv(ds, args.output)
    print(args.output)
    print(f"{ds.n_rows} rows, {ds.n_cols} features, {ds.n_classes} label classes")
    return EXIT_OK


def _cmd_import_har(args) -> int:
    ds = load_har(args.features, args.labels, name=args.name)
    write_csv(ds, args.output)
    print(args.output)
    print(f"{ds.n_rows} rows, {ds.n_cols} features, {ds.n_classes} label classes")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ClusterLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
