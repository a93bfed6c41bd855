"""CSV/JSON report writers and figure rendering."""

import csv
import json
import math

import numpy as np
import pytest

from clusterlab import report
from clusterlab.metrics import METRIC_NAMES, StabilityRecord
from clusterlab.pipeline import (
    config_to_dict,
    parse_config,
    parse_suite,
    run_pipeline,
    run_suite,
)


def small_suite():
    good = {
        "dataset": {"kind": "synth", "spec": {"kind": "moons", "n_samples": 120, "n_clusters": 2, "seed": 2}},
        "clusterer": {"algorithm": "dbscan", "eps": "auto", "min_pts": 8},
        "runs": 2,
    }
    bad = {
        "dataset": {"kind": "csv", "path": "no/such/file.csv"},
        "clusterer": {"algorithm": "kmeans", "k": 2},
        "runs": 2,
    }
    return run_suite(parse_suite({"schema_version": 1, "pipelines": [good, bad]}))


@pytest.fixture(scope="module")
def suite_result():
    return small_suite()


@pytest.fixture(scope="module")
def run_artifact():
    cfg = parse_config({
        "schema_version": 1,
        "dataset": {"kind": "synth", "spec": {"kind": "well_separated_spherical", "n_samples": 120, "seed": 4}},
        "reduction": {"method": "pca", "target_dim": 2},
        "clusterer": {"algorithm": "kmeans", "k": 3},
        "runs": 3,
        "master_seed": 6,
    })
    return run_pipeline(cfg)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_full_kind_matrix_yields_18_rows(tmp_path):
    # six synthetic kinds crossed with the three clusterers
    pipelines = []
    for kind in ("well_separated_spherical", "overlapping_spherical", "moons",
                 "varied_density", "high_noise", "unbalanced"):
        k = 2 if kind == "moons" else 3
        spec = {"kind": kind, "n_samples": 120, "n_clusters": k, "seed": 5}
        if kind == "high_noise":
            spec["noise_fraction"] = 0.15
        for clusterer in (
            {"algorithm": "kmeans", "k": k},
            {"algorithm": "dbscan", "eps": "auto", "min_pts": 8},
            {"algorithm": "spectral", "k": k},
        ):
            pipelines.append({
                "dataset": {"kind": "synth", "spec": spec},
                "clusterer": clusterer,
                "runs": 1,
            })
    result = run_suite(parse_suite({"schema_version": 1, "pipelines": pipelines}))
    path = report.write_suite_csv(result, tmp_path / "matrix.csv")
    _, rows = read_csv(path)
    assert len(rows) == 18
    assert all(row[-1] == "" for row in rows)  # no pipeline failed


class TestCellFormatting:
    def test_cases(self):
        assert report._cell(None) == ""
        assert report._cell(0.1234567890123456) == "0.123456789012"
        assert report._cell(1.0) == "1"
        assert report._cell(7) == "7"
        assert report._cell(math.inf) == "inf"
        assert report._cell("text") == "text"
        assert report._wall_cell(0.0123456) == "0.012"
        assert report._wall_cell(None) == ""


class TestSuiteCsv:
    def test_layout_and_error_row(self, suite_result, tmp_path):
        path = report.write_suite_csv(suite_result, tmp_path / "suite.csv")
        header, rows = read_csv(path)
        assert header[:7] == ["dataset", "reduction", "algorithm", "params", "runs", "n_rows", "n_features"]
        for name in METRIC_NAMES:
            assert f"{name}_mean" in header and f"{name}_std" in header
        assert "wall_time_mean_s" in header
        assert header[-2:] == ["warnings", "error"]
        assert len(rows) == 2
        ok, failed = rows
        assert all(len(row) == len(header) for row in rows)
        assert ok[header.index("error")] == ""
        assert float(ok[header.index("ari_mean")]) > 0.8
        assert float(ok[header.index("eps")]) > 0.0
        assert "FileNotFoundError" in failed[header.index("error")]
        assert failed[header.index("ari_mean")] == ""

    def test_omit_timing_drops_the_column(self, suite_result, tmp_path):
        path = report.write_suite_csv(suite_result, tmp_path / "suite.csv", include_timing=False)
        header, rows = read_csv(path)
        assert "wall_time_mean_s" not in header
        assert all(len(row) == len(header) for row in rows)

    def test_byte_identical_across_executions(self, tmp_path):
        a = report.write_suite_csv(small_suite(), tmp_path / "a.csv", include_timing=False)
        b = report.write_suite_csv(small_suite(), tmp_path / "b.csv", include_timing=False)
        with open(a, "rb") as fh:
            first = fh.read()
        with open(b, "rb") as fh:
            second = fh.read()
        assert first == second

    def test_fields_with_commas_are_quoted(self, tmp_path):
        result = small_suite()
        path = report.write_suite_csv(result, tmp_path / "suite.csv")
        header, rows = read_csv(path)
        # the error message contains commas; csv round-trip must preserve it
        assert rows[1][header.index("error")] == result.entries[1].error


class TestSuiteJson:
    def test_aggregates_recompute_from_per_run_detail(self, suite_result, tmp_path):
        path = report.write_suite_json(suite_result, tmp_path / "detail.json")
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["schema_version"] == 1
        entry = payload["entries"][0]
        for name in METRIC_NAMES:
            values = [r[name] for r in entry["runs"] if r[name] is not None and math.isfinite(r[name])]
            agg = entry["aggregates"][name]
            if not values:
                assert agg["mean"] is None
                continue
            assert agg["mean"] == pytest.approx(float(np.mean(values)), abs=1e-12)
            assert agg["std"] == pytest.approx(float(np.std(values)), abs=1e-12)

    def test_error_entries_carry_config_and_tag(self, suite_result, tmp_path):
        path = report.write_suite_json(suite_result, tmp_path / "detail.json")
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        failed = payload["entries"][1]
        assert "FileNotFoundError" in failed["error"]
        assert failed["config"]["dataset"]["path"] == "no/such/file.csv"
        assert "runs" not in failed

    def test_config_echo_round_trips(self, suite_result, tmp_path):
        path = report.write_suite_json(suite_result, tmp_path / "detail.json")
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        echoed = payload["entries"][0]["config"]
        assert parse_config(echoed) == suite_result.entries[0].config


class TestRunReports:
    def test_run_csv_rows(self, run_artifact, tmp_path):
        path = report.write_run_csv(run_artifact, tmp_path / "runs.csv")
        header, rows = read_csv(path)
        assert header[0] == "run"
        assert len(rows) == 3
        assert [row[0] for row in rows] == ["0", "1", "2"]
        ari_col = header.index("ari")
        assert all(0.0 <= float(row[ari_col]) <= 1.0 for row in rows)

    def test_run_json_matches_artifact(self, run_artifact, tmp_path):
        path = report.write_run_json(run_artifact, tmp_path / "run.json")
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["config"] == config_to_dict(run_artifact.config)
        assert payload["n_features_active"] == 2
        assert len(payload["runs"]) == 3
        assert payload["aggregates"]["ari"]["mean"] == run_artifact.report.mean("ari")

    def test_embedding_csv_round_trip(self, run_artifact, tmp_path):
        coords = run_artifact.embedding.coords
        path = report.write_embedding_csv(coords, run_artifact.truth, tmp_path / "emb.csv")
        header, rows = read_csv(path)
        assert header == ["dim_0", "dim_1", "label"]
        assert len(rows) == coords.shape[0]
        back = np.array([[float(r[0]), float(r[1])] for r in rows])
        assert np.array_equal(back, coords)
        assert [int(r[2]) for r in rows] == run_artifact.truth.tolist()

    def test_stability_csv(self, tmp_path):
        path = report.write_stability_csv([0.5, 0.75, None], tmp_path / "stab.csv")
        header, rows = read_csv(path)
        assert header == ["run", "ari"]
        assert rows == [["0", "0.5"], ["1", "0.75"], ["2", ""]]

    def test_profile_csv(self, tmp_path):
        path = report.write_profile_csv([3.0, 2.0, 0.5], tmp_path / "prof.csv")
        header, rows = read_csv(path)
        assert header == ["rank", "k_distance"]
        assert rows == [["0", "3"], ["1", "2"], ["2", "0.5"]]


class TestFigures:
    def test_each_figure_renders_a_file(self, suite_result, run_artifact, tmp_path):
        record = StabilityRecord(ari_mean=0.8, ari_std=0.05, stability_score=0.9375, runs=20)
        values = np.linspace(0.7, 0.9, 20)
        paths = [
            report.render_suite_figure(suite_result, tmp_path / "suite.png"),
            report.render_stability_figure(values, record, tmp_path / "stab.png"),
            report.render_embedding_figure(
                run_artifact.embedding.coords, run_artifact.truth, tmp_path / "emb.png", title="t"
            ),
            report.render_profile_figure(np.sort(np.linspace(0.1, 2.0, 50))[::-1], 0.6, tmp_path / "prof.png"),
            report.render_run_figure(run_artifact, tmp_path / "runs.png"),
        ]
        for path in paths:
            with open(path, "rb") as fh:
                magic = fh.read(8)
            assert magic == b"\x89PNG\r\n\x1a\n"

    def test_embedding_figure_with_noise_labels(self, tmp_path):
        coords = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, 1.0]])
        labels = np.array([0, 1, -1, 0])
        path = report.render_embedding_figure(coords, labels, tmp_path / "noise.png")
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"

    def test_one_dimensional_embedding_figure(self, tmp_path):
        coords = np.array([[0.0], [1.0], [2.0]])
        labels = np.array([0, 1, 0])
        path = report.render_embedding_figure(coords, labels, tmp_path / "one.png")
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"

    def test_suite_figure_with_no_successes(self, tmp_path):
        bad = {
            "dataset": {"kind": "csv", "path": "still/missing.csv"},
            "clusterer": {"algorithm": "kmeans", "k": 2},
        }
        result = run_suite(parse_suite({"schema_version": 1, "pipelines": [bad]}))
        path = report.render_suite_figure(result, tmp_path / "empty.png")
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"
