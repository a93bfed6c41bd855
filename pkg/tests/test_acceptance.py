"""Acceptance criteria for the released package.

Seven end-to-end guarantees, one test per criterion, executed in file
order.  Each test prints a single verdict line (PASS, or SKIP for the
data-gated criterion; failures surface through the assertion itself),
visible with ``pytest -s`` or in the captured output of a failure.
Criteria 3 and 5 share one suite execution through a module fixture.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from clusterlab.clusterers import DbscanParams, dbscan, kmeans
from clusterlab.dataio import standardize
from clusterlab.dimred import _conditional_matrix
from clusterlab.linalg import sym_eig
from clusterlab.metrics import (
    ari,
    calinski_harabasz,
    davies_bouldin,
    nmi,
    silhouette,
    stability,
)
from clusterlab.neighbors import build_index, knn_all_points, knn_query, radius_query
from clusterlab.pipeline import parse_config, parse_suite, run_suite, stability_run
from clusterlab.report import write_suite_csv

from _references import (
    ari_reference,
    brute_knn,
    brute_radius,
    calinski_harabasz_reference,
    davies_bouldin_reference,
    naive_dbscan,
    nmi_reference,
    relabeled_to_match,
    silhouette_reference,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def _verdict(number: int, name: str, status: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\ncriterion {number} [{name}]: {status}{suffix}")


# ---------------------------------------------------------------------------
# criterion 1: oracle equivalence


def _blob_mix(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Gaussian blobs plus a sprinkle of uniform outliers."""
    k = int(rng.integers(2, 5))
    centers = rng.normal(0.0, 4.0, (k, dim))
    sizes = rng.multinomial(n, np.ones(k) / k)
    parts = [centers[i] + rng.normal(0.0, rng.uniform(0.5, 1.0), (sizes[i], dim)) for i in range(k)]
    X = np.vstack(parts)
    n_out = max(1, n // 10)
    X[:n_out] = rng.uniform(-8.0, 8.0, (n_out, dim))
    return X


def _labels_with_all_clusters(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    labels = rng.integers(0, k, n)
    labels[:k] = np.arange(k)  # every cluster non-empty
    return labels


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    instances = 0

    # density clustering against the quadratic reference partition
    for i in range(40):
        rng = np.random.default_rng(1000 + i)
        n = int(rng.integers(60, 240))
        dim = int(rng.integers(2, 7))
        X = _blob_mix(rng, n, dim)
        eps = float(rng.uniform(0.4, 1.2)) * math.sqrt(dim) * 0.7
        min_pts = int(rng.integers(3, 9))
        got = dbscan(X, DbscanParams(eps=eps, min_pts=min_pts)).assignments
        want = naive_dbscan(X, eps, min_pts)
        assert relabeled_to_match(got, want), f"dbscan partition mismatch on instance {i}"
        instances += 1

    # neighbor queries against brute force
    for i in range(35):
        rng = np.random.default_rng(2000 + i)
        n = int(rng.integers(20, 501))
        dim = int(rng.integers(2, 11))
        X = rng.normal(0.0, rng.uniform(0.5, 3.0), (n, dim))
        index = build_index(X)
        queries = [X[int(rng.integers(0, n))], rng.normal(0.0, 2.0, dim)]
        for q in queries:
            k = int(rng.integers(1, min(12, n) + 1))
            ids, ds = knn_query(index, q, k)
            ref_ids, ref_ds = brute_knn(X, q, k)
            assert ids.tolist() == ref_ids
            np.testing.assert_allclose(ds, ref_ds, atol=1e-12)
            all_ds = np.linalg.norm(X - q, axis=1)
            eps = float(np.quantile(all_ds, rng.uniform(0.05, 0.4)))
            assert set(radius_query(index, q, eps).tolist()) == brute_radius(X, q, eps)
        instances += 1

    # the five quality metrics against direct-definition references
    for i in range(30):
        rng = np.random.default_rng(3000 + i)
        n = int(rng.integers(30, 160))
        dim = int(rng.integers(2, 7))
        X = _blob_mix(rng, n, dim)
        truth = _labels_with_all_clusters(rng, n, int(rng.integers(2, 6)))
        pred = _labels_with_all_clusters(rng, n, int(rng.integers(2, 6)))
        assert ari(truth, pred) == pytest.approx(ari_reference(truth, pred), abs=1e-10)
        assert nmi(truth, pred) == pytest.approx(nmi_reference(truth, pred), abs=1e-10)
        assert silhouette(X, pred) == pytest.approx(silhouette_reference(X, pred), abs=1e-10)
        assert davies_bouldin(X, pred) == pytest.approx(
            davies_bouldin_reference(X, pred), abs=1e-10
        )
        assert calinski_harabasz(X, pred) == pytest.approx(
            calinski_harabasz_reference(X, pred), rel=1e-10
        )
        instances += 1

    elapsed = time.perf_counter() - t0
    assert instances >= 100
    assert elapsed < 120.0, f"oracle sweep took {elapsed:.1f}s, budget is 120s"
    _verdict(1, "oracle equivalence", "PASS", f"{instances} instances in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 2: stability formula consistency

STABILITY_TRIPLES = (
    (0.494, 0.017, 0.966),
    (0.721, 0.045, 0.938),
    (0.758, 0.028, 0.963),
    (0.319, 0.000, 1.000),
    (0.675, 0.000, 1.000),
    (0.671, 0.000, 1.000),
    (0.563, 0.021, 0.963),
    (0.763, 0.037, 0.952),
    (0.794, 0.024, 0.970),
)


def test_criterion_2_stability_formula_consistency():
    for mean, std, score in STABILITY_TRIPLES:
        # [mean - std, mean + std] has exactly that mean and population std
        record = stability([mean - std, mean + std])
        assert record.ari_mean == pytest.approx(mean, abs=1e-12)
        assert record.ari_std == pytest.approx(std, abs=1e-12)
        assert record.stability_score == pytest.approx(score, abs=1e-3), (
            f"mean={mean} std={std}: score {record.stability_score} != {score}"
        )
        if std == 0.0:
            assert record.ari_std == 0.0
            assert record.stability_score == 1.0
    _verdict(2, "stability formula consistency", "PASS", f"{len(STABILITY_TRIPLES)} triples")


# ---------------------------------------------------------------------------
# criteria 3 and 5: qualitative ordering and determinism

ORDERING_KINDS = (
    ("moons", 2, 0.0),
    ("well_separated_spherical", 3, 0.0),
    ("high_noise", 3, 0.15),
    ("unbalanced", 3, 0.0),
)
ORDERING_SEEDS = range(5)


def _ordering_suite_doc() -> dict:
    pipelines = []
    for kind, k, noise_fraction in ORDERING_KINDS:
        for seed in ORDERING_SEEDS:
            spec = {"kind": kind, "n_samples": 600, "n_clusters": k, "seed": seed}
            if noise_fraction:
                spec["noise_fraction"] = noise_fraction
            for clusterer in (
                {"algorithm": "kmeans", "k": k, "restarts": 10},
                {"algorithm": "dbscan", "eps": "auto", "min_pts": 10},
                {"algorithm": "spectral", "k": k, "n_neighbors": 10},
            ):
                pipelines.append(
                    {
                        "dataset": {"kind": "synth", "spec": spec},
                        "clusterer": clusterer,
                        "runs": 5,
                        "master_seed": seed,
                    }
                )
    return {"schema_version": 1, "pipelines": pipelines}


@pytest.fixture(scope="module")
def ordering_suite():
    configs = parse_suite(_ordering_suite_doc())
    t0 = time.perf_counter()
    result = run_suite(configs)
    elapsed = time.perf_counter() - t0
    return configs, result, elapsed


def _mean_ari_table(result) -> dict:
    table = {}
    for entry in result.entries:
        assert entry.error is None, f"suite pipeline failed: {entry.error}"
        cfg = entry.config
        key = (cfg.dataset.synth.kind, cfg.clusterer.algorithm, cfg.dataset.synth.seed)
        table[key] = entry.artifact.report.mean("ari")
    return table


def _majority(flags) -> bool:
    return sum(flags) > len(flags) // 2


def test_criterion_3_qualitative_ordering(ordering_suite):
    _, result, elapsed = ordering_suite
    m = _mean_ari_table(result)
    seeds = list(ORDERING_SEEDS)

    verdicts = {
        "moons: dbscan>=0.9, spectral>=0.9, kmeans<=0.65": [
            m[("moons", "dbscan", s)] >= 0.9
            and m[("moons", "spectral", s)] >= 0.9
            and m[("moons", "kmeans", s)] <= 0.65
            for s in seeds
        ],
        "well-separated: all three >= 0.9": [
            all(
                m[("well_separated_spherical", alg, s)] >= 0.9
                for alg in ("kmeans", "dbscan", "spectral")
            )
            for s in seeds
        ],
        "high-noise 15%: dbscan >= kmeans": [
            m[("high_noise", "dbscan", s)] >= m[("high_noise", "kmeans", s)] for s in seeds
        ],
        "unbalanced: kmeans >= dbscan": [
            m[("unbalanced", "kmeans", s)] >= m[("unbalanced", "dbscan", s)] for s in seeds
        ],
    }
    for name, flags in verdicts.items():
        assert _majority(flags), f"{name}: per-seed outcomes {flags}"
    assert elapsed < 600.0, f"ordering suite took {elapsed:.1f}s, budget is 600s"

    counts = ", ".join(f"{sum(flags)}/5" for flags in verdicts.values())
    _verdict(3, "qualitative ordering", "PASS", f"seed majorities {counts} in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 4: reduction-helps ordering (gated on local image data)

MNIST_IMAGES = DATA_DIR / "mnist" / "train-images-idx3-ubyte"
MNIST_LABELS = DATA_DIR / "mnist" / "train-labels-idx1-ubyte"


def _mnist_config(clusterer: dict, reduction: dict | None) -> dict:
    doc = {
        "schema_version": 1,
        "dataset": {"kind": "mnist", "images": str(MNIST_IMAGES), "labels": str(MNIST_LABELS)},
        "subsample_n": 3000,
        "clusterer": clusterer,
        "runs": 10,
        "master_seed": 0,
    }
    if reduction is not None:
        doc["reduction"] = reduction
    return doc


def test_criterion_4_reduction_helps_ordering():
    if not (MNIST_IMAGES.is_file() and MNIST_LABELS.is_file()):
        _verdict(
            4,
            "reduction-helps ordering",
            "SKIP",
            f"place IDX files under {DATA_DIR / 'mnist'} to enable",
        )
        pytest.skip("MNIST IDX files not present")

    t0 = time.perf_counter()
    kmeans_cl = {"algorithm": "kmeans", "k": 10, "restarts": 10}
    spectral_cl = {"algorithm": "spectral", "k": 10, "n_neighbors": 10}
    pca50 = {"method": "pca", "target_dim": 50}
    umap50 = {"method": "umap", "target_dim": 50}

    from clusterlab.pipeline import run_pipeline

    means = {}
    for label, clusterer, reduction in (
        ("kmeans_raw", kmeans_cl, None),
        ("kmeans_pca", kmeans_cl, pca50),
        ("spectral_raw", spectral_cl, None),
        ("spectral_pca", spectral_cl, pca50),
        ("spectral_umap", spectral_cl, umap50),
    ):
        artifact = run_pipeline(parse_config(_mnist_config(clusterer, reduction)))
        means[label] = artifact.report.mean("ari")

    elapsed = time.perf_counter() - t0
    assert means["kmeans_pca"] > means["kmeans_raw"]
    assert means["spectral_umap"] > means["spectral_pca"] > means["spectral_raw"]
    assert elapsed < 1800.0, f"reduction sweep took {elapsed:.1f}s, budget is 1800s"
    summary = ", ".join(f"{k}={v:.3f}" for k, v in means.items())
    _verdict(4, "reduction-helps ordering", "PASS", f"{summary} in {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# criterion 5: determinism


def test_criterion_5_determinism(ordering_suite, tmp_path):
    configs, first, _ = ordering_suite
    second = run_suite(configs)
    path_a = tmp_path / "first.csv"
    path_b = tmp_path / "second.csv"
    write_suite_csv(first, path_a, include_timing=False)
    write_suite_csv(second, path_b, include_timing=False)
    assert path_a.read_bytes() == path_b.read_bytes(), "repeated suite CSVs differ"

    outcome = stability_run(
        parse_config(
            {
                "schema_version": 1,
                "dataset": {
                    "kind": "synth",
                    "spec": {"kind": "moons", "n_samples": 600, "n_clusters": 2, "seed": 0},
                },
                "clusterer": {"algorithm": "dbscan", "eps": "auto", "min_pts": 10},
                "runs": 100,
                "master_seed": 0,
            }
        )
    )
    assert outcome.record.runs == 100
    assert outcome.record.ari_std == 0.0, "density clustering must repeat identically"
    assert outcome.record.stability_score == 1.0
    _verdict(5, "determinism", "PASS", "byte-identical suite CSV; 100-run ARI std exactly 0")


# ---------------------------------------------------------------------------
# criterion 6: numerical invariants


def test_criterion_6_numerical_invariants():
    # eigendecomposition reconstructs the input
    rng = np.random.default_rng(60)
    worst = 0.0
    for i in range(1000):
        size = int(rng.integers(2, 51))
        scale = 10.0 ** rng.uniform(-2.0, 2.0)
        B = rng.normal(0.0, scale, (size, size))
        A = (B + B.T) / 2.0
        res = sym_eig(A)
        rebuilt = (res.eigenvectors * res.eigenvalues) @ res.eigenvectors.T
        rel = np.linalg.norm(rebuilt - A) / max(np.linalg.norm(A), 1e-300)
        worst = max(worst, rel)
    assert worst < 1e-8, f"worst eigendecomposition reconstruction error {worst:.2e}"

    # the clustering objective never increases within a run
    for i in range(25):
        rng = np.random.default_rng(6100 + i)
        X = _blob_mix(rng, int(rng.integers(60, 300)), int(rng.integers(2, 6)))
        result = kmeans(X, int(rng.integers(2, 7)), restarts=int(rng.integers(1, 4)), seed=i)
        history = result.inertia_history
        assert len(history) >= 1
        for earlier, later in zip(history, history[1:]):
            assert later <= earlier * (1.0 + 1e-9) + 1e-12

    # affinity rows hit the requested perplexity
    rng = np.random.default_rng(62)
    X = rng.normal(0.0, 1.0, (100, 6))
    for perplexity in (5.0, 15.0, 30.0):
        conditional = _conditional_matrix(X, perplexity)
        for row in conditional:
            p = row[row > 0.0]
            entropy = float(-(p * np.log(p)).sum())
            assert abs(math.exp(entropy) - perplexity) <= 1e-5

    # standardized columns are centered with unit spread
    for i in range(20):
        rng = np.random.default_rng(6300 + i)
        n = int(rng.integers(5, 200))
        d = int(rng.integers(1, 30))
        # offset-to-scale ratios up to 1e6; beyond ~1e7 the centered values
        # no longer carry 1e-9 of precision in 64-bit floats
        offsets = 10.0 ** rng.uniform(0.0, 5.0, d) * rng.choice([-1.0, 1.0], d)
        scales = 10.0 ** rng.uniform(-1.0, 3.0, d)
        X = rng.normal(0.0, 1.0, (n, d)) * scales + offsets
        Z, _ = standardize(X)
        assert float(np.abs(Z.mean(axis=0)).max()) < 1e-9
        assert float(np.abs(Z.std(axis=0) - 1.0).max()) < 1e-9

    _verdict(6, "numerical invariants", "PASS", f"worst eig reconstruction {worst:.1e}")


# ---------------------------------------------------------------------------
# criterion 7: neighbor-graph scaling


def test_criterion_7_scaling_smoke():
    rng = np.random.default_rng(7)
    scales = np.array([1.0] * 5 + [0.2] * 5)
    centers = rng.normal(0.0, 5.0, (5, 10))
    parts = [centers[i] + rng.normal(0.0, 1.0, (10000, 10)) * scales for i in range(5)]
    X = np.vstack(parts)[rng.permutation(50000)]

    # warm the compiled kernels outside the timed region
    knn_all_points(build_index(X[:1500]), 10)

    timings = {}
    for n in (12500, 25000, 50000):
        t0 = time.perf_counter()
        index = build_index(X[:n])
        knn_all_points(index, 10)
        timings[n] = time.perf_counter() - t0

    ratio_a = timings[25000] / timings[12500]
    ratio_b = timings[50000] / timings[25000]
    assert timings[50000] < 60.0, f"50000-point graph took {timings[50000]:.1f}s"
    assert ratio_a < 3.5, f"12500->25000 scaling ratio {ratio_a:.2f}x"
    assert ratio_b < 3.5, f"25000->50000 scaling ratio {ratio_b:.2f}x"
    _verdict(
        7,
        "neighbor-graph scaling",
        "PASS",
        f"50000 pts in {timings[50000]:.2f}s, doubling ratios {ratio_a:.2f}x / {ratio_b:.2f}x",
    )
