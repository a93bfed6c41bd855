"""Clustering evaluation metrics and the run-stability score.

External metrics (ari, nmi) compare two labelings and treat every
distinct label value as its own cluster, so passing raw density-based
output scores NOISE as one extra cluster.  Use `apply_noise_mode` to
switch to the exclude semantics.  Internal metrics (silhouette,
davies_bouldin, calinski_harabasz) always drop NOISE points and raise
UndefinedMetric when fewer than 2 clusters remain; callers report the
value as absent, never as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clusterers import NOISE
from .errors import InvalidInput, NumericalFailure, UndefinedMetric
from .linalg import as_data_matrix

def _as_labeling(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise InvalidInput(f"{name} must be a 1-D integer vector")
    if arr.size == 0:
        raise InvalidInput(f"{name} must be non-empty")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if not np.array_equal(cast, arr):
            raise InvalidInput(f"{name} must contain integers")
        arr = cast
    return arr.astype(np.int64)


def _label_pair(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    t = _as_labeling(truth, "truth")
    p = _as_labeling(pred, "pred")
    if t.shape[0] != p.shape[0]:
        raise InvalidInput(f"labelings differ in length: {t.shape[0]} vs {p.shape[0]}")
    return t, p


def _contingency(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    rows = int(ti.max()) + 1
    cols = int(pi.max()) + 1
    table = np.bincount(ti * cols + pi, minlength=rows * cols)
    return table.reshape(rows, cols)


def _comb2(counts: np.ndarray) -> np.ndarray:
    return counts * (counts - 1) / 2.0


def apply_noise_mode(truth, pred, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Prepare labelings for external scoring.

    as_cluster: keep NOISE as one more cluster id (arrays unchanged).
    exclude: drop points the prediction marks as NOISE.
    """
    t, p = _label_pair(truth, pred)
    if mode == "as_cluster":
        return t, p
    if mode == "exclude":
        keep = p != NOISE
        if not np.any(keep):
            raise UndefinedMetric("every point is noise; nothing to score")
        return t[keep], p[keep]
    raise InvalidInput(f"unknown noise mode {mode!r}, expected as_cluster or exclude")


def ari(truth, pred) -> float:
    """Adjusted Rand index from the contingency table."""
    t, p = _label_pair(truth, pred)
    table = _contingency(t, p)
    n = t.shape[0]
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = _comb2(np.array([n]))[0]
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def nmi(truth, pred) -> float:
    """Mutual information normalized by the arithmetic mean of entropies."""
    t, p = _label_pair(truth, pred)
    table = _contingency(t, p).astype(np.float64)
    n = float(t.shape[0])
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    h_a = float(-(pa * np.log(pa)).sum())
    h_b = float(-(pb * np.log(pb)).sum())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    joint = table / n
    nz = joint > 0.0
    outer = pa[:, None] * pb[None, :]
    mutual = float((joint[nz] * np.log(joint[nz] / outer[nz])).sum())
    return mutual / (0.5 * (h_a + h_b))


def _non_noise_groups(pred: np.ndarray):
    keep = pred != NOISE
    labels = np.unique(pred[keep])
    return keep, labels


def silhouette(X, pred) -> float:
    """Mean of (b - a)/max(a, b) over non-noise points.

    Singleton clusters contribute 0; coincident-point degeneracies
    (a = b = 0) also score 0.
    """
    X = as_data_matrix(X, name="X")
    pred = _as_labeling(pred, "pred")
    if pred.shape[0] != X.shape[0]:
        raise InvalidInput("pred length must match X rows")
    keep, labels = _non_noise_groups(pred)
    if labels.size < 2:
        raise UndefinedMetric(f"silhouette needs >= 2 clusters, got {labels.size}")
    pts = X[keep]
    lab = pred[keep]
    m = pts.shape[0]
    masks = np.stack([lab == c for c in labels], axis=1)
    sizes = masks.sum(axis=0)
    own = np.argmax(masks, axis=1)

    # direct (x - y)^2 distances: the expansion formula's cancellation
    # error is too large for the 1e-10 oracle agreement bound; block to
    # keep the (block, m, d) difference tensor near 128 MB
    block = min(m, max(1, 2**24 // (m * pts.shape[1])))
    scores = np.empty(m)
    for start in range(0, m, block):
        stop = min(start + block, m)
        diff = pts[start:stop, None, :] - pts[None, :, :]
        D = np.sqrt((diff * diff).sum(axis=2))
        cluster_sums = D @ masks  # (block, k) total distance to each cluster
        rows = np.arange(stop - start)
        own_blk = own[start:stop]
        own_size = sizes[own_blk]
        a = np.where(own_size > 1, cluster_sums[rows, own_blk] / np.maximum(own_size - 1, 1), 0.0)
        mean_to = cluster_sums / sizes[None, :]
        mean_to[rows, own_blk] = np.inf
        b = mean_to.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0.0, (b - a) / np.where(denom > 0.0, denom, 1.0), 0.0)
        s = np.where(own_size > 1, s, 0.0)
        scores[start:stop] = s
    return float(scores.mean())


def _cluster_stats(X: np.ndarray, pred: np.ndarray):
    keep, labels = _non_noise_groups(pred)
    if labels.size == 0:
        raise UndefinedMetric("every point is noise; no clusters to score")
    pts = X[keep]
    lab = pred[keep]
    centroids = np.stack([pts[lab == c].mean(axis=0) for c in labels])
    return pts, lab, labels, centroids


def davies_bouldin(X, pred) -> float:
    """Average over clusters of the worst (S_i + S_j) / M_ij ratio."""
    X = as_data_matrix(X, name="X")
    pred = _as_labeling(pred, "pred")
    if pred.shape[0] != X.shape[0]:
        raise InvalidInput("pred length must match X rows")
    pts, lab, labels, centroids = _cluster_stats(X, pred)
    k = labels.size
    if k < 2:
        raise UndefinedMetric(f"davies_bouldin needs >= 2 clusters, got {k}")
    spreads = np.array([
        float(np.sqrt(((pts[lab == c] - centroids[i]) ** 2).sum(axis=1)).mean())
        for i, c in enumerate(labels)
    ])
    cdiff = centroids[:, None, :] - centroids[None, :, :]
    gaps = np.sqrt((cdiff * cdiff).sum(axis=2))
    total = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i == j:
                continue
            if gaps[i, j] == 0.0:
                raise NumericalFailure(
                    f"clusters {int(labels[i])} and {int(labels[j])} have coincident centroids"
                )
            worst = max(worst, (spreads[i] + spreads[j]) / gaps[i, j])
        total += worst
    return total / k


def calinski_harabasz(X, pred) -> float:
    """Between/within dispersion ratio; +inf when within-dispersion is 0."""
    X = as_data_matrix(X, name="X")
    pred = _as_labeling(pred, "pred")
    if pred.shape[0] != X.shape[0]:
        raise InvalidInput("pred length must match X rows")
    pts, lab, labels, centroids = _cluster_stats(X, pred)
    k = labels.size
    n = pts.shape[0]
    if k < 2:
        raise UndefinedMetric(f"calinski_harabasz needs >= 2 clusters, got {k}")
    overall = pts.mean(axis=0)
    sizes = np.array([(lab == c).sum() for c in labels])
    between = float((sizes * ((centroids - overall) ** 2).sum(axis=1)).sum())
    within = 0.0
    for i, c in enumerate(labels):
        within += float(((pts[lab == c] - centroids[i]) ** 2).sum())
    if within == 0.0:
        return math.inf
    return (between / (k - 1)) / (within / (n - k))


@dataclass(frozen=True)
class StabilityRecord:
    """Spread of a metric across repeated runs, summarized as 1 - cv."""

    ari_mean: float
    ari_std: float
    stability_score: float | None
    runs: int


def stability(ari_values) -> StabilityRecord:
    """1 - std/mean of per-run ARI, clamped to [0, 1]; absent for mean <= 0."""
    values = np.asarray(ari_values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 2:
        raise InvalidInput("stability needs at least 2 per-run values")
    if not np.all(np.isfinite(values)):
        raise InvalidInput("per-run values must be finite")
    if np.all(values == values[0]):
        # a constant vector has exactly zero spread; np.mean's summation
        # rounding must not leak in (identical runs score 1.000 exactly)
        mean = float(values[0])
        std = 0.0
    else:
        mean = float(values.mean())
        std = float(values.std())
    if mean > 0.0:
        score = min(1.0, max(0.0, 1.0 - std / mean))
    else:
        score = None
    return StabilityRecord(ari_mean=mean, ari_std=std, stability_score=score, runs=values.shape[0])


@dataclass(frozen=True)
class RunMetrics:
    """All metric values for a single clustering run.

    None marks a metric that is undefined for the run's labeling.
    """

    ari: float | None
    nmi: float | None
    silhouette: float | None
    davies_bouldin: float | None
    calinski_harabasz: float | None
    wall_time_seconds: float
    n_noise: int


METRIC_NAMES = ("ari", "nmi", "silhouette", "davies_bouldin", "calinski_harabasz")


@dataclass(frozen=True)
class MetricReport:
    """Per-run metric values plus mean/std aggregates."""

    per_run: tuple[RunMetrics, ...]

    def values(self, name: str) -> list[float]:
        """Defined (non-absent, finite) per-run values for one metric."""
        out = []
        for run in self.per_run:
            v = getattr(run, name)
            if v is not None and math.isfinite(v):
                out.append(float(v))
        return out

    def mean(self, name: str) -> float | None:
        vals = self.values(name)
        return float(np.mean(vals)) if vals else None

    def std(self, name: str) -> float | None:
        vals = self.values(name)
        if not vals:
            return None
        if all(v == vals[0] for v in vals):
            # identical runs must aggregate to std exactly 0
            return 0.0
        return float(np.std(vals))
