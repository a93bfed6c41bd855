"""Dimensionality reduction: PCA, exact t-SNE, and a lightweight UMAP.

PCA is the linear route and also seeds the two nonlinear methods, so
every reducer here is deterministic end to end.  t-SNE is the exact
O(n^2) formulation, capped at 10 000 points.  The UMAP variant keeps
the fuzzy-graph construction and the negative-sampling layout but skips
local-connectivity refinements, hence "lite".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import sparse
from scipy.optimize import curve_fit

from .errors import DegenerateInput, InvalidInput, NumericalFailure
from .linalg import as_data_matrix, pairwise_sq_dists, sym_eig
from .neighbors import build_index, knn_all_points

METHODS = ("pca", "tsne", "umap")

TSNE_DEFAULT_PERPLEXITY = 30.0
TSNE_ITERATIONS = 1000
TSNE_LEARNING_RATE = 200.0
TSNE_EXAGGERATION = 12.0
TSNE_EXAGGERATION_ITERATIONS = 250
TSNE_INITIAL_MOMENTUM = 0.5
TSNE_FINAL_MOMENTUM = 0.8
TSNE_INIT_STD = 1e-4
TSNE_MAX_POINTS = 10_000
TSNE_MAX_TARGET_DIM = 50

UMAP_DEFAULT_NEIGHBORS = 15
UMAP_DEFAULT_MIN_DIST = 0.1
UMAP_SPREAD = 1.0
UMAP_EPOCHS = 500
UMAP_LEARNING_RATE = 1.0
UMAP_NEGATIVE_SAMPLES = 5
UMAP_INIT_MAX_ABS = 10.0


@dataclass(frozen=True)
class ReductionSpec:
    """Which reducer to run and with what parameters.

    ``perplexity`` applies to t-SNE only; ``n_neighbors`` and
    ``min_dist`` to UMAP only.  ``target_dim`` must stay below the
    input dimension, checked at fit time.
    """

    method: str
    target_dim: int
    perplexity: float = TSNE_DEFAULT_PERPLEXITY
    n_neighbors: int = UMAP_DEFAULT_NEIGHBORS
    min_dist: float = UMAP_DEFAULT_MIN_DIST
    seed: int = 0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidInput(
                f"unknown reduction method {self.method!r}, expected one of {METHODS}"
            )
        if self.target_dim < 1:
            raise InvalidInput(f"target_dim must be at least 1, got {self.target_dim}")
        if not (math.isfinite(self.perplexity) and self.perplexity > 0):
            raise InvalidInput(f"perplexity must be positive, got {self.perplexity!r}")
        if self.n_neighbors < 2:
            raise InvalidInput(f"n_neighbors must be at least 2, got {self.n_neighbors}")
        if not (math.isfinite(self.min_dist) and self.min_dist >= 0):
            raise InvalidInput(f"min_dist must be non-negative, got {self.min_dist!r}")


@dataclass(frozen=True)
class Embedding:
    """Reduced coordinates plus method provenance.

    ``explained_variance`` is present for PCA only: per-component
    fractions of total variance, non-increasing, summing to at most 1.
    """

    coords: np.ndarray
    method: str
    explained_variance: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords)
        if coords.ndim != 2:
            raise InvalidInput("coords must be a 2-D array")
        if not np.isfinite(coords).all():
            raise InvalidInput("coords must be finite")
        if self.method not in METHODS:
            raise InvalidInput(f"unknown method {self.method!r}")
        ev = self.explained_variance
        if ev is not None:
            if any(later > earlier + 1e-12 for earlier, later in zip(ev, ev[1:])):
                raise InvalidInput("explained_variance must be non-increasing")
            if sum(ev) > 1.0 + 1e-9:
                raise InvalidInput("explained_variance must sum to at most 1")


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each component's largest-magnitude entry is positive."""
    for j in range(V.shape[1]):
        pivot = int(np.argmax(np.abs(V[:, j])))
        if V[pivot, j] < 0:
            V[:, j] = -V[:, j]
    return V


def _pca_components(X: np.ndarray, target_dim: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Top eigenvalues, sign-fixed eigenvector columns, and total variance.

    Covariance route for d <= n; Gram route otherwise, which recovers
    covariance eigenvectors as X^T u / sqrt(n lambda) and therefore
    cannot produce null-space components.
    """
    n, d = X.shape
    centered = X - X.mean(axis=0)
    total = float((centered * centered).sum()) / n
    if d <= n:
        covariance = (centered.T @ centered) / n
        result = sym_eig(covariance)
        values = result.eigenvalues[::-1][:target_dim].copy()
        V = result.eigenvectors[:, ::-1][:, :target_dim].copy()
    else:
        gram = (centered @ centered.T) / n
        result = sym_eig(gram)
        values = result.eigenvalues[::-1][:target_dim].copy()
        cutoff = max(result.eigenvalues[-1], 0.0) * 1e-12
        if values[-1] <= cutoff:
            raise DegenerateInput(
                f"target_dim={target_dim} exceeds the data's effective rank"
            )
        U = result.eigenvectors[:, ::-1][:, :target_dim]
        V = (centered.T @ U) / np.sqrt(values * n)[None, :]
    return values, _fix_signs(V), total


def pca(X, target_dim: int) -> Embedding:
    """Project onto the top eigenvectors of the covariance matrix.

    Components are ordered by descending eigenvalue with each
    component's largest-magnitude entry positive, so results carry no
    sign ambiguity.  The input is centered internally.
    """
    X = as_data_matrix(X, "X")
    n, d = X.shape
    if not 1 <= target_dim <= min(n - 1, d):
        raise InvalidInput(
            f"target_dim must be in [1, min(n-1, d)] = [1, {min(n - 1, d)}], got {target_dim}"
        )
    values, V, total = _pca_components(X, target_dim)
    coords = (X - X.mean(axis=0)) @ V
    if total > 0.0:
        fractions = tuple(float(v) for v in np.maximum(values, 0.0) / total)
    else:
        fractions = tuple(0.0 for _ in range(target_dim))
    return Embedding(coords=coords, method="pca", explained_variance=fractions)


def _scaled_pca_init(X: np.ndarray, target_dim: int, column_std: float) -> np.ndarray:
    """PCA initialization rescaled so the first component has the given std."""
    coords = pca(X, target_dim).coords.copy()
    spread = float(coords[:, 0].std())
    if spread > 0.0:
        coords *= column_std / spread
    return coords


def _entropy_and_row(shifted_sq: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and the conditional row for one precision."""
    weights = np.exp(-beta * shifted_sq)
    total = float(weights.sum())
    entropy = math.log(total) + beta * float((shifted_sq * weights).sum()) / total
    return entropy, weights / total


def _conditional_matrix(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-stochastic conditional affinities with per-row bandwidth search.

    Each row's precision is bisected until its entropy is within 1e-7
    nats of log(perplexity), well inside the 1e-5 contract.
    """
    n = X.shape[0]
    squared = pairwise_sq_dists(X)
    target = math.log(perplexity)
    P = np.zeros((n, n))
    others = np.arange(n)
    for i in range(n):
        mask = others != i
        row_sq = squared[i, mask]
        row_sq = row_sq - row_sq.min()  # shift keeps exp() in range; entropy unchanged
        beta, lo, hi = 1.0, 0.0, math.inf
        for _ in range(300):
            entropy, row = _entropy_and_row(row_sq, beta)
            if abs(entropy - target) <= 1e-7:
                break
            if entropy > target:
                lo = beta
                beta = beta * 2.0 if math.isinf(hi) else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else 0.5 * (beta + lo)
        else:
            raise NumericalFailure(
                f"perplexity search did not converge for row {i}; "
                "the row's distances may be degenerate"
            )
        P[i, mask] = row
    return P


def _tsne_affinities(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Joint t-SNE affinities: symmetrized conditionals, summing to 1."""
    conditional = _conditional_matrix(X, perplexity)
    return (conditional + conditional.T) / (2.0 * X.shape[0])


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0.0
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))


def _tsne_fit(P: np.ndarray, Y0: np.ndarray) -> tuple[np.ndarray, list[float]]:
    """Gradient descent on KL(P || Q); returns coords and the last-100 KL trace."""
    n = P.shape[0]
    Y = Y0.copy()
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    P_effective = P * TSNE_EXAGGERATION
    kl_tail: list[float] = []
    for iteration in range(TSNE_ITERATIONS):
        if iteration == TSNE_EXAGGERATION_ITERATIONS:
            P_effective = P
        momentum = (
            TSNE_INITIAL_MOMENTUM
            if iteration < TSNE_EXAGGERATION_ITERATIONS
            else TSNE_FINAL_MOMENTUM
        )
        W = 1.0 / (1.0 + pairwise_sq_dists(Y))
        np.fill_diagonal(W, 0.0)
        Q = W / W.sum()
        M = (P_effective - Q) * W
        # the KL gradient's constant factor 4 is folded into the learning
        # rate, matching the reference formulation; keeping it explicit
        # makes the 200 rate unstable below a few hundred points
        gradient = M.sum(axis=1)[:, None] * Y - M @ Y
        oscillating = (gradient > 0.0) != (velocity > 0.0)
        gains = np.where(oscillating, gains + 0.2, gains * 0.8)
        np.clip(gains, 0.01, None, out=gains)
        velocity = momentum * velocity - TSNE_LEARNING_RATE * (gains * gradient)
        Y += velocity
        Y -= Y.mean(axis=0)
        if iteration >= TSNE_ITERATIONS - 100:
            kl_tail.append(_kl_divergence(P, Q))
    return Y, kl_tail


def tsne(X, target_dim: int = 2, perplexity: float = TSNE_DEFAULT_PERPLEXITY, seed: int = 0) -> Embedding:
    """Exact t-SNE with PCA initialization.

    Early exaggeration x12 for the first 250 of 1000 iterations,
    learning rate 200, momentum 0.5 then 0.8.  The optimizer draws no
    random numbers (the initialization is PCA), so the result does not
    depend on ``seed``; the parameter is kept for a uniform reducer
    interface.
    """
    X = as_data_matrix(X, "X")
    n, d = X.shape
    if n > TSNE_MAX_POINTS:
        raise InvalidInput(f"exact t-SNE is capped at {TSNE_MAX_POINTS} points, got {n}")
    if not 2 <= target_dim <= TSNE_MAX_TARGET_DIM:
        raise InvalidInput(
            f"target_dim must be in [2, {TSNE_MAX_TARGET_DIM}], got {target_dim}"
        )
    if target_dim > min(n - 1, d):
        raise InvalidInput(
            f"target_dim={target_dim} exceeds min(n-1, d)={min(n - 1, d)}"
        )
    if not (math.isfinite(perplexity) and perplexity > 0):
        raise InvalidInput(f"perplexity must be positive, got {perplexity!r}")
    if perplexity >= (n - 1) / 3:
        raise InvalidInput(
            f"perplexity must be below (n-1)/3 = {(n - 1) / 3:.2f}, got {perplexity}"
        )
    P = _tsne_affinities(X, perplexity)
    Y0 = _scaled_pca_init(X, target_dim, TSNE_INIT_STD)
    coords, _ = _tsne_fit(P, Y0)
    return Embedding(coords=coords, method="tsne")


@lru_cache(maxsize=None)
def _fitted_curve(min_dist: float, spread: float) -> tuple[float, float]:
    """Least-squares (a, b) making 1/(1+a r^(2b)) match the min_dist falloff.

    The target is 1 for r <= min_dist and exp(-(r-min_dist)/spread)
    beyond, sampled on 300 points over (0, 3*spread].
    """
    radii = np.arange(1, 301) / 300.0 * 3.0 * spread
    targets = np.where(
        radii <= min_dist, 1.0, np.exp(-(radii - min_dist) / spread)
    )

    def kernel(r: np.ndarray, a: float, b: float) -> np.ndarray:
        return 1.0 / (1.0 + a * r ** (2.0 * b))

    (a, b), _ = curve_fit(kernel, radii, targets, p0=(1.0, 1.0), maxfev=10_000)
    return float(a), float(b)


def _solve_sigma(neighbor_dists: np.ndarray, rho: float, target: float) -> float:
    """Bandwidth with sum_j exp(-max(0, d_j - rho)/sigma) = target.

    The sum increases with sigma; bisection after bracketing.  Rows
    where even sigma -> 0 overshoots the target (many ties at rho)
    converge to the limiting tiny bandwidth instead.
    """
    shifted = np.maximum(0.0, neighbor_dists - rho)
    sigma, lo, hi = 1.0, 0.0, math.inf
    for _ in range(200):
        value = float(np.exp(-shifted / sigma).sum())
        if abs(value - target) <= 1e-5:
            break
        if value > target:
            hi = sigma
            sigma = 0.5 * (sigma + lo)
        else:
            lo = sigma
            sigma = sigma * 2.0 if math.isinf(hi) else 0.5 * (sigma + hi)
    return max(sigma, 1e-300)


def _umap_directed(X: np.ndarray, n_neighbors: int) -> sparse.csr_matrix:
    """Directed fuzzy kNN weights: w_ij = exp(-max(0, d_ij - rho_i)/sigma_i)."""
    n = X.shape[0]
    index = build_index(X)
    idx, dist = knn_all_points(index, n_neighbors + 1)
    target = math.log2(n_neighbors)
    rows = np.empty(n * n_neighbors, dtype=np.int64)
    cols = np.empty(n * n_neighbors, dtype=np.int64)
    vals = np.empty(n * n_neighbors, dtype=np.float64)
    for i in range(n):
        keep = idx[i] != i
        # with n_neighbors+1 duplicates closer than self, self is absent
        # and the row is already full; drop the farthest instead
        neighbors = idx[i][keep][:n_neighbors]
        dists = dist[i][keep][:n_neighbors]
        rho = float(dists[0])
        sigma = _solve_sigma(dists, rho, target)
        lo = i * n_neighbors
        rows[lo : lo + n_neighbors] = i
        cols[lo : lo + n_neighbors] = neighbors
        vals[lo : lo + n_neighbors] = np.exp(-np.maximum(0.0, dists - rho) / sigma)
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _umap_graph(X: np.ndarray, n_neighbors: int) -> sparse.coo_matrix:
    """Union-symmetrized fuzzy graph: a + b - a*b per ordered pair."""
    A = _umap_directed(X, n_neighbors)
    AT = A.T.tocsr()
    S = A + AT - A.multiply(AT)
    S = sparse.coo_matrix(S)
    S.eliminate_zeros()
    return S


@njit(cache=True)
def _mix64_u64(z):
    # uint64 mirror of rng.mix64 for in-kernel draws
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _umap_sgd(Y, head, tail, epochs_per_sample, a, b, n_epochs, initial_lr, negative_rate, seed):
    """Negative-sampling layout loop, single-threaded for determinism.

    Attractive moves shift both edge endpoints; repulsive moves shift
    only the head.  Gradient components are clipped to +-4.  Negative
    sample indices come from a counter-based stream, so the whole loop
    is a pure function of its inputs.
    """
    n = Y.shape[0]
    dim = Y.shape[1]
    n_edges = head.shape[0]
    epoch_of_next_sample = epochs_per_sample.copy()
    eps_negative = epochs_per_sample / negative_rate
    epoch_of_next_negative = eps_negative.copy()
    golden = np.uint64(0x9E3779B97F4A7C15)
    state = np.uint64(seed)
    counter = np.uint64(0)
    for epoch in range(n_epochs):
        alpha = initial_lr * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if epoch_of_next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]
            r2 = 0.0
            for c in range(dim):
                diff = Y[i, c] - Y[j, c]
                r2 += diff * diff
            if r2 > 0.0:
                coeff = (-2.0 * a * b * r2 ** (b - 1.0)) / (a * r2**b + 1.0)
                for c in range(dim):
                    g = coeff * (Y[i, c] - Y[j, c])
                    if g > 4.0:
                        g = 4.0
                    elif g < -4.0:
                        g = -4.0
                    Y[i, c] += alpha * g
                    Y[j, c] -= alpha * g
            epoch_of_next_sample[e] += epochs_per_sample[e]
            n_negative = int((epoch - epoch_of_next_negative[e]) / eps_negative[e])
            for _ in range(n_negative):
                counter += np.uint64(1)
                # modulo bias is ~n/2^64, irrelevant for layout sampling
                t = int(_mix64_u64(state + counter * golden) % np.uint64(n))
                if t == i:
                    continue
                r2 = 0.0
                for c in range(dim):
                    diff = Y[i, c] - Y[t, c]
                    r2 += diff * diff
                if r2 > 0.0:
                    coeff = (2.0 * b) / ((0.001 + r2) * (a * r2**b + 1.0))
                    for c in range(dim):
                        g = coeff * (Y[i, c] - Y[t, c])
                        if g > 4.0:
                            g = 4.0
                        elif g < -4.0:
                            g = -4.0
                        Y[i, c] += alpha * g
                else:
                    # coincident with the negative sample: push hard to break the tie
                    for c in range(dim):
                        Y[i, c] += alpha * 4.0
            epoch_of_next_negative[e] += n_negative * eps_negative[e]


def umap_lite(
    X,
    target_dim: int = 2,
    n_neighbors: int = UMAP_DEFAULT_NEIGHBORS,
    min_dist: float = UMAP_DEFAULT_MIN_DIST,
    seed: int = 0,
) -> Embedding:
    """Fuzzy-graph embedding with negative-sampling layout.

    Exact kNN, per-point (rho, sigma) calibration to log2(n_neighbors),
    probabilistic-union symmetrization, then 500 SGD epochs at linearly
    decaying learning rate with 5 negative samples per positive.
    Initialization is PCA scaled into [-10, 10]; no local-connectivity
    refinements or set-operation mixing (hence "lite").
    """
    X = as_data_matrix(X, "X")
    n, d = X.shape
    if not 2 <= n_neighbors < n:
        raise InvalidInput(f"n_neighbors must be in [2, n), got {n_neighbors}")
    if not (math.isfinite(min_dist) and min_dist >= 0):
        raise InvalidInput(f"min_dist must be non-negative, got {min_dist!r}")
    if not 1 <= target_dim <= min(n - 1, d):
        raise InvalidInput(
            f"target_dim must be in [1, min(n-1, d)] = [1, {min(n - 1, d)}], got {target_dim}"
        )
    graph = _umap_graph(X, n_neighbors)
    a, b = _fitted_curve(float(min_dist), UMAP_SPREAD)
    coords = pca(X, target_dim).coords.copy()
    peak = float(np.abs(coords).max())
    if peak > 0.0:
        coords *= UMAP_INIT_MAX_ABS / peak
    weights = graph.data
    epochs_per_sample = weights.max() / weights
    _umap_sgd(
        coords,
        graph.row.astype(np.int64),
        graph.col.astype(np.int64),
        epochs_per_sample,
        float(a),
        float(b),
        UMAP_EPOCHS,
        UMAP_LEARNING_RATE,
        float(UMAP_NEGATIVE_SAMPLES),
        np.uint64(seed % (1 << 64)),
    )
    return Embedding(coords=coords, method="umap")


def reduce_data(X, spec: ReductionSpec) -> Embedding:
    """Run the reducer named by ``spec`` on X.

    ``target_dim`` must be strictly below the input dimension here;
    the per-method entry points allow target_dim == d where that makes
    sense (PCA as a rotation).
    """
    X = as_data_matrix(X, "X")
    if spec.target_dim >= X.shape[1]:
        raise InvalidInput(
            f"target_dim={spec.target_dim} must be below the input dimension {X.shape[1]}"
        )
    if spec.method == "pca":
        return pca(X, spec.target_dim)
    if spec.method == "tsne":
        return tsne(X, spec.target_dim, perplexity=spec.perplexity, seed=spec.seed)
    return umap_lite(
        X,
        spec.target_dim,
        n_neighbors=spec.n_neighbors,
        min_dist=spec.min_dist,
        seed=spec.seed,
    )
