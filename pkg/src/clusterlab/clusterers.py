"""K-means, DBSCAN, and spectral clustering with deterministic seeding.

All three produce a :class:`Labeling`; k-means additionally reports its
centroids and objective.  Randomized fits derive every stream from the
caller's seed, so reruns are bit-identical; DBSCAN takes no seed at all.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .linalg import as_data_matrix, pairwise_sq_dists, sym_eig
from .neighbors import build_index, knn_all_points, radius_query
from .rng import Rng, split

NOISE = -1

_MAX_LLOYD_ITERATIONS = 300
_LLOYD_REL_TOL = 1e-9


@dataclass(frozen=True)
class Labeling:
    """Cluster assignments for one dataset.

    One integer id per row; ``NOISE`` (-1) marks unclustered points and
    appears only in density-based output.  Non-noise ids are contiguous
    from zero.
    """

    assignments: np.ndarray
    n_clusters: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.assignments)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidInput("assignments must be a non-empty 1-D array")
        if not np.issubdtype(arr.dtype, np.integer):
            raise InvalidInput("assignments must be integers")
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        if arr.min() < NOISE:
            raise InvalidInput("assignment ids must be >= -1")
        ids = np.unique(arr)
        ids = ids[ids != NOISE]
        contiguous = ids.size == self.n_clusters and (
            ids.size == 0 or (ids[0] == 0 and ids[-1] == self.n_clusters - 1)
        )
        if not contiguous:
            raise InvalidInput(
                f"non-noise ids must be exactly 0..{self.n_clusters - 1}"
            )
        object.__setattr__(self, "assignments", arr)

    @property
    def n_points(self) -> int:
        return int(self.assignments.size)

    @property
    def n_noise(self) -> int:
        return int(np.count_nonzero(self.assignments == NOISE))


@dataclass(frozen=True)
class KMeansResult:
    """Converged output of the best k-means restart.

    ``inertia_history`` records the objective after every Lloyd
    iteration of the winning restart; it is non-increasing.
    """

    labeling: Labeling
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: tuple[float, ...]


@dataclass(frozen=True)
class DbscanParams:
    """Density parameters: neighborhood radius and core-point threshold."""

    eps: float
    min_pts: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise InvalidInput(f"eps must be positive and finite, got {self.eps!r}")
        if self.min_pts < 1:
            raise InvalidInput(f"min_pts must be at least 1, got {self.min_pts!r}")


def _plusplus_centers(X: np.ndarray, k: int, rng: Rng) -> np.ndarray:
    """k-means++ seeding.

    First center uniform; each next center sampled with probability
    proportional to the squared distance to the nearest chosen center.
    """
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.randint(n)]
    nearest_sq = pairwise_sq_dists(X, centers[0:1])[:, 0]
    for j in range(1, k):
        if nearest_sq.sum() > 0.0:
            pick = rng.choice_weighted(nearest_sq)
        else:
            # every point coincides with a chosen center; any point works
            pick = rng.randint(n)
        centers[j] = X[pick]
        nearest_sq = np.minimum(nearest_sq, pairwise_sq_dists(X, centers[j : j + 1])[:, 0])
    return centers


def _cluster_means(X: np.ndarray, assign: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(assign, minlength=k).astype(np.float64)
    sums = np.empty((k, X.shape[1]))
    for col in range(X.shape[1]):
        sums[:, col] = np.bincount(assign, weights=X[:, col], minlength=k)
    return sums / counts[:, None]


def _repair_empty_clusters(assign: np.ndarray, own_sq: np.ndarray, k: int) -> None:
    """Move the farthest point (from its own centroid) into each empty cluster.

    Only points whose current cluster keeps another member are eligible,
    so the repair never creates a new empty cluster.  Mutates in place.
    """
    while True:
        counts = np.bincount(assign, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return
        movable = counts[assign] > 1
        donor = int(np.where(movable, own_sq, -np.inf).argmax())
        assign[donor] = empties[0]
        own_sq[donor] = 0.0


def _lloyd_restart(X: np.ndarray, k: int, rng: Rng) -> KMeansResult:
    """One k-means++ seeding followed by Lloyd iterations to convergence."""
    n = X.shape[0]
    centers = _plusplus_centers(X, k, rng)
    assign = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    prev_inertia = math.inf
    iterations = 0
    for _ in range(_MAX_LLOYD_ITERATIONS):
        sq = pairwise_sq_dists(X, centers)
        new_assign = sq.argmin(axis=1).astype(np.int64)
        _repair_empty_clusters(new_assign, sq[np.arange(n), new_assign], k)
        fixpoint = np.array_equal(new_assign, assign)
        assign = new_assign
        centers = _cluster_means(X, assign, k)
        inertia = float(((X - centers[assign]) ** 2).sum())
        history.append(inertia)
        iterations += 1
        if fixpoint:
            break
        if prev_inertia - inertia < _LLOYD_REL_TOL * max(prev_inertia, 1e-300):
            break
        prev_inertia = inertia
    return KMeansResult(
        labeling=Labeling(assignments=assign, n_clusters=k),
        centroids=centers,
        inertia=history[-1],
        iterations_run=iterations,
        inertia_history=tuple(history),
    )


def kmeans(X, k: int, restarts: int = 10, seed: int = 0) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeding, best of ``restarts`` runs.

    Each restart draws from its own stream split off ``seed``; the
    winner is the minimum-inertia restart, ties broken by restart
    index.  A cluster left empty by an assignment step is re-seeded at
    the point farthest from its assigned centroid.
    """
    X = as_data_matrix(X, "X")
    n = X.shape[0]
    if k < 1:
        raise InvalidInput(f"k must be at least 1, got {k}")
    if k > n:
        raise InvalidInput(f"k={k} exceeds the number of points n={n}")
    if restarts < 1:
        raise InvalidInput(f"restarts must be at least 1, got {restarts}")
    best: KMeansResult | None = None
    for r in range(restarts):
        candidate = _lloyd_restart(X, int(k), Rng(split(seed, r)))
        if best is None or candidate.inertia < best.inertia:
            best = candidate
    assert best is not None
    return best


def _eps_neighborhoods(X: np.ndarray, eps: float) -> list[np.ndarray]:
    index = build_index(X)
    return [radius_query(index, X[i], eps) for i in range(X.shape[0])]


def _dbscan_parts(X: np.ndarray, eps: float, min_pts: int) -> tuple[np.ndarray, np.ndarray]:
    """Labels plus the core-point mask, both in row order."""
    n = X.shape[0]
    neighborhoods = _eps_neighborhoods(X, eps)
    core = np.array([nb.size >= min_pts for nb in neighborhoods], dtype=bool)
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if not core[i] or labels[i] != NOISE:
            continue
        labels[i] = cluster
        frontier = deque([i])
        while frontier:
            p = frontier.popleft()
            for q in neighborhoods[p]:
                if core[q] and labels[q] == NOISE:
                    labels[q] = cluster
                    frontier.append(q)
        cluster += 1
    for i in range(n):
        if core[i]:
            continue
        # neighborhoods are ascending, so the first core hit is the
        # lowest-indexed core that reaches this border point
        for q in neighborhoods[i]:
            if core[q]:
                labels[i] = labels[q]
                break
    return labels, core


def dbscan(X, params: DbscanParams) -> Labeling:
    """Density-based clustering; fully deterministic, no seed.

    A core point has at least ``min_pts`` neighbors within ``eps``,
    itself included.  Clusters are the connected components of core
    points under eps-reachability, numbered in ascending order of their
    lowest-indexed core.  A border point joins the cluster of the
    lowest-indexed core that reaches it; everything else is ``NOISE``.
    """
    X = as_data_matrix(X, "X")
    labels, _ = _dbscan_parts(X, float(params.eps), int(params.min_pts))
    n_clusters = int(labels.max()) + 1
    return Labeling(assignments=labels, n_clusters=n_clusters)


def _knn_affinity(X: np.ndarray, n_neighbors: int) -> np.ndarray:
    """Binary kNN graph, symmetrized by union, zero diagonal."""
    n = X.shape[0]
    index = build_index(X)
    idx, _ = knn_all_points(index, n_neighbors + 1)
    W = np.zeros((n, n))
    for i in range(n):
        neigh = idx[i][idx[i] != i]
        # with n_neighbors+1 duplicates closer than self, self is absent
        # and the row is already full; drop the farthest instead
        neigh = neigh[:n_neighbors]
        W[i, neigh] = 1.0
        W[neigh, i] = 1.0
    return W


def _normalized_affinity(W: np.ndarray) -> np.ndarray:
    """D^(-1/2) W D^(-1/2) with degree-0 rows left as zero."""
    deg = W.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    positive = deg > 0.0
    inv_sqrt[positive] = 1.0 / np.sqrt(deg[positive])
    return W * (inv_sqrt[:, None] * inv_sqrt[None, :])


def _spectral_embedding(X: np.ndarray, k: int, n_neighbors: int) -> np.ndarray:
    """Rows of the top-k eigenvectors of the normalized affinity, unit length.

    Equivalent to the k smallest eigenvectors of the normalized
    Laplacian I - D^(-1/2) W D^(-1/2).  Zero rows stay zero.
    """
    M = _normalized_affinity(_knn_affinity(X, n_neighbors))
    U = sym_eig(M).eigenvectors[:, -k:].copy()
    norms = np.sqrt((U * U).sum(axis=1))
    positive = norms > 0.0
    U[positive] /= norms[positive, None]
    return U


def spectral(X, k: int, n_neighbors: int = 10, seed: int = 0) -> Labeling:
    """Normalized-cuts clustering on a union-symmetrized binary kNN graph.

    The spectral embedding's rows are clustered with
    ``kmeans(k, restarts=10, seed=seed)``.
    """
    X = as_data_matrix(X, "X")
    n = X.shape[0]
    if k < 1:
        raise InvalidInput(f"k must be at least 1, got {k}")
    if k > n:
        raise InvalidInput(f"k={k} exceeds the number of points n={n}")
    if not 1 <= n_neighbors < n:
        raise InvalidInput(f"n_neighbors must be in [1, n), got {n_neighbors}")
    embedding = _spectral_embedding(X, int(k), int(n_neighbors))
    return kmeans(embedding, int(k), restarts=10, seed=seed).labeling
