"""Exact nearest-neighbor search over a vantage-point tree.

The tree partitions row indices around a vantage point by median
distance.  Each internal node stores the exact max distance of its
inside half and min distance of its outside half, so triangle-inequality
pruning never discards a feasible candidate regardless of ties.  All
distances, in build and in queries, come from one sequential-summation
kernel; results are therefore bit-identical to a naive loop.

Queries break distance ties by lower row index everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateInput, InvalidInput
from .linalg import as_data_matrix

_LEAF_SIZE = 16
_STACK_CAP = 128


@njit(cache=True)
def _dists_from(X, rows, vp_row):
    out = np.empty(rows.shape[0])
    for t in range(rows.shape[0]):
        s = 0.0
        for j in range(X.shape[1]):
            diff = X[rows[t], j] - X[vp_row, j]
            s += diff * diff
        out[t] = math.sqrt(s)
    return out


@njit(cache=True)
def _point_dist(X, row, q):
    s = 0.0
    for j in range(q.shape[0]):
        diff = X[row, j] - q[j]
        s += diff * diff
    return math.sqrt(s)


@dataclass(frozen=True)
class NeighborIndex:
    """Immutable exact spatial index over the rows of a data matrix."""

    points: np.ndarray      # rows copied into tree order (cache-friendly scans)
    order: np.ndarray       # original row index at each tree position
    node_lo: np.ndarray     # segment bounds into `order`/`points`
    node_hi: np.ndarray
    node_left: np.ndarray   # child node ids, -1 at leaves
    node_right: np.ndarray
    node_in_max: np.ndarray   # max vantage distance of the inside half
    node_out_min: np.ndarray  # min vantage distance of the outside half
    pos_prime: np.ndarray   # per tree position: leaf to prescan when the
                            # query is that indexed point (primes the
                            # pruning radius; skipped during traversal)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def build_index(X, leaf_size: int = _LEAF_SIZE) -> NeighborIndex:
    """Build the vantage-point tree; deterministic for a given X."""
    X = as_data_matrix(X, name="X")
    if leaf_size < 1:
        raise InvalidInput(f"leaf_size must be >= 1, got {leaf_size}")
    n = X.shape[0]
    order = np.arange(n, dtype=np.int64)

    node_lo: list[int] = []
    node_hi: list[int] = []
    node_left: list[int] = []
    node_right: list[int] = []
    node_in_max: list[float] = []
    node_out_min: list[float] = []

    # stack entries: (segment_lo, segment_hi, parent_id, side); side
    # 0 = root, 1 = parent's inside child, 2 = parent's outside child
    stack = [(0, n, -1, 0)]
    while stack:
        lo, hi, parent, side = stack.pop()
        node_id = len(node_lo)
        if side == 1:
            node_left[parent] = node_id
        elif side == 2:
            node_right[parent] = node_id
        node_lo.append(lo)
        node_hi.append(hi)
        node_left.append(-1)
        node_right.append(-1)
        node_in_max.append(0.0)
        node_out_min.append(math.inf)
        count = hi - lo
        if count <= leaf_size:
            continue
        vp = order[lo]
        rest = order[lo + 1 : hi]
        dists = _dists_from(X, rest, vp)
        ranking = np.lexsort((rest, dists))
        order[lo + 1 : hi] = rest[ranking]
        sorted_d = dists[ranking]
        m_in = count // 2  # inside half gets the extra element
        node_in_max[node_id] = float(sorted_d[m_in - 1])
        split_at = lo + 1 + m_in
        # push outside first so the inside child is built next (stable ids)
        if split_at < hi:
            node_out_min[node_id] = float(sorted_d[m_in])
            stack.append((split_at, hi, node_id, 2))
        stack.append((lo + 1, split_at, node_id, 1))

    lo_arr = np.asarray(node_lo, dtype=np.int64)
    hi_arr = np.asarray(node_hi, dtype=np.int64)
    left_arr = np.asarray(node_left, dtype=np.int64)
    right_arr = np.asarray(node_right, dtype=np.int64)

    # home leaf per tree position: for leaf members, the leaf itself;
    # for an internal vantage, the leaf reached by inside-child descent
    pos_prime = np.empty(n, dtype=np.int64)
    for node_id in range(len(node_lo)):
        if left_arr[node_id] >= 0:
            descend = node_id
            while left_arr[descend] >= 0:
                descend = left_arr[descend]
            pos_prime[lo_arr[node_id]] = descend
        else:
            pos_prime[lo_arr[node_id] : hi_arr[node_id]] = node_id

    return NeighborIndex(
        points=np.ascontiguousarray(X[order]),
        order=order,
        node_lo=lo_arr,
        node_hi=hi_arr,
        node_left=left_arr,
        node_right=right_arr,
        node_in_max=np.asarray(node_in_max, dtype=np.float64),
        node_out_min=np.asarray(node_out_min, dtype=np.float64),
        pos_prime=pos_prime,
    )


@njit(cache=True)
def _heap_swap_down(heap_d, heap_i, size):
    # restore max-heap order (lexicographic on (d, i)) from the root
    pos = 0
    while True:
        left = 2 * pos + 1
        right = left + 1
        largest = pos
        if left < size and (
            heap_d[left] > heap_d[largest]
            or (heap_d[left] == heap_d[largest] and heap_i[left] > heap_i[largest])
        ):
            largest = left
        if right < size and (
            heap_d[right] > heap_d[largest]
            or (heap_d[right] == heap_d[largest] and heap_i[right] > heap_i[largest])
        ):
            largest = right
        if largest == pos:
            return
        heap_d[pos], heap_d[largest] = heap_d[largest], heap_d[pos]
        heap_i[pos], heap_i[largest] = heap_i[largest], heap_i[pos]
        pos = largest


@njit(cache=True)
def _heap_push(heap_d, heap_i, size, d, i):
    pos = size
    heap_d[pos] = d
    heap_i[pos] = i
    while pos > 0:
        parent = (pos - 1) // 2
        if heap_d[parent] > heap_d[pos] or (
            heap_d[parent] == heap_d[pos] and heap_i[parent] > heap_i[pos]
        ):
            return
        heap_d[parent], heap_d[pos] = heap_d[pos], heap_d[parent]
        heap_i[parent], heap_i[pos] = heap_i[pos], heap_i[parent]
        pos = parent


@njit(cache=True)
def _scan_leaf(X, order, lo, hi, q, k, heap_d, heap_i, heap_size):
    for t in range(lo, hi):
        row = order[t]
        d = _point_dist(X, t, q)
        if heap_size < k:
            _heap_push(heap_d, heap_i, heap_size, d, row)
            heap_size += 1
        elif d < heap_d[0] or (d == heap_d[0] and row < heap_i[0]):
            heap_d[0] = d
            heap_i[0] = row
            _heap_swap_down(heap_d, heap_i, heap_size)
    return heap_size


@njit(cache=True)
def _knn_into(
    X, order, node_lo, node_hi, node_left, node_right, node_in_max, node_out_min,
    q, k, prime, out_idx, out_dist,
):
    heap_d = np.empty(k)
    heap_i = np.empty(k, dtype=np.int64)
    heap_size = 0
    if prime >= 0:
        heap_size = _scan_leaf(
            X, order, node_lo[prime], node_hi[prime], q, k, heap_d, heap_i, heap_size
        )

    stack_node = np.empty(_STACK_CAP, dtype=np.int64)
    stack_bound = np.empty(_STACK_CAP)
    top = 0
    stack_node[0] = 0
    stack_bound[0] = 0.0
    top = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        bound = stack_bound[top]
        if node == prime:
            continue
        if heap_size == k and bound > heap_d[0]:
            continue
        lo = node_lo[node]
        hi = node_hi[node]
        left = node_left[node]
        if left < 0:
            heap_size = _scan_leaf(X, order, lo, hi, q, k, heap_d, heap_i, heap_size)
            continue
        vp = order[lo]
        d_vp = _point_dist(X, lo, q)
        if heap_size < k:
            _heap_push(heap_d, heap_i, heap_size, d_vp, vp)
            heap_size += 1
        elif d_vp < heap_d[0] or (d_vp == heap_d[0] and vp < heap_i[0]):
            heap_d[0] = d_vp
            heap_i[0] = vp
            _heap_swap_down(heap_d, heap_i, heap_size)
        in_bound = d_vp - node_in_max[node]
        out_bound = node_out_min[node] - d_vp
        right = node_right[node]
        # push the farther side first so the nearer side is explored next
        if d_vp <= 0.5 * (node_in_max[node] + node_out_min[node]):
            if right >= 0:
                stack_node[top] = right
                stack_bound[top] = out_bound
                top += 1
            stack_node[top] = left
            stack_bound[top] = in_bound
            top += 1
        else:
            stack_node[top] = left
            stack_bound[top] = in_bound
            top += 1
            if right >= 0:
                stack_node[top] = right
                stack_bound[top] = out_bound
                top += 1

    # drain the max-heap into ascending (distance, index) order
    for pos in range(heap_size - 1, -1, -1):
        out_dist[pos] = heap_d[0]
        out_idx[pos] = heap_i[0]
        heap_size -= 1
        heap_d[0] = heap_d[heap_size]
        heap_i[0] = heap_i[heap_size]
        _heap_swap_down(heap_d, heap_i, heap_size)


@njit(cache=True)
def _knn_batch(
    X, order, node_lo, node_hi, node_left, node_right, node_in_max, node_out_min,
    Q, k,
):
    nq = Q.shape[0]
    out_idx = np.empty((nq, k), dtype=np.int64)
    out_dist = np.empty((nq, k))
    for qi in range(nq):
        _knn_into(
            X, order, node_lo, node_hi, node_left, node_right,
            node_in_max, node_out_min, Q[qi], k, -1, out_idx[qi], out_dist[qi],
        )
    return out_idx, out_dist


@njit(cache=True)
def _knn_all(
    X, order, node_lo, node_hi, node_left, node_right, node_in_max, node_out_min,
    pos_prime, k,
):
    # all-points queries walk tree positions, not row order: successive
    # queries stay spatially close, and each primes from its home leaf
    n = X.shape[0]
    out_idx = np.empty((n, k), dtype=np.int64)
    out_dist = np.empty((n, k))
    for t in range(n):
        row = order[t]
        _knn_into(
            X, order, node_lo, node_hi, node_left, node_right,
            node_in_max, node_out_min, X[t], k, pos_prime[t],
            out_idx[row], out_dist[row],
        )
    return out_idx, out_dist


@njit(cache=True)
def _radius_into(
    X, order, node_lo, node_hi, node_left, node_right, node_in_max, node_out_min,
    q, eps, found,
):
    count = 0
    stack_node = np.empty(_STACK_CAP, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = node_lo[node]
        hi = node_hi[node]
        left = node_left[node]
        if left < 0:
            for t in range(lo, hi):
                if _point_dist(X, t, q) <= eps:
                    found[count] = order[t]
                    count += 1
            continue
        vp = order[lo]
        d_vp = _point_dist(X, lo, q)
        if d_vp <= eps:
            found[count] = vp
            count += 1
        if d_vp - node_in_max[node] <= eps:
            stack_node[top] = left
            top += 1
        right = node_right[node]
        if right >= 0 and node_out_min[node] - d_vp <= eps:
            stack_node[top] = right
            top += 1
    return count


def _as_point(q, dim: int) -> np.ndarray:
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != dim:
        raise InvalidInput(f"query point must be a vector of length {dim}")
    if not np.all(np.isfinite(q)):
        raise InvalidInput("query point contains NaN or Inf")
    return q


def knn_query(index: NeighborIndex, q, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest rows, ascending by (distance, row index)."""
    if not 1 <= k <= index.size:
        raise InvalidInput(f"k must be in [1, {index.size}], got {k}")
    q = _as_point(q, index.dim)
    out_idx = np.empty(k, dtype=np.int64)
    out_dist = np.empty(k)
    _knn_into(
        index.points, index.order, index.node_lo, index.node_hi, index.node_left,
        index.node_right, index.node_in_max, index.node_out_min,
        q, k, -1, out_idx, out_dist,
    )
    return out_idx, out_dist


def knn_query_batch(index: NeighborIndex, Q, k: int) -> tuple[np.ndarray, np.ndarray]:
    """knn_query for every row of Q; returns (nq, k) index/distance arrays."""
    if not 1 <= k <= index.size:
        raise InvalidInput(f"k must be in [1, {index.size}], got {k}")
    Q = as_data_matrix(Q, name="Q")
    if Q.shape[1] != index.dim:
        raise InvalidInput(f"query dimension {Q.shape[1]} != index dimension {index.dim}")
    return _knn_batch(
        index.points, index.order, index.node_lo, index.node_hi, index.node_left,
        index.node_right, index.node_in_max, index.node_out_min, Q, k,
    )


def knn_all_points(index: NeighborIndex, k: int) -> tuple[np.ndarray, np.ndarray]:
    """knn_query of every indexed point against its own index.

    Row i of the output is the query result for original row i.  Same
    results as knn_query_batch(index, X, k), reached faster: queries
    run in tree order and prune with a radius primed from the query's
    home leaf.
    """
    if not 1 <= k <= index.size:
        raise InvalidInput(f"k must be in [1, {index.size}], got {k}")
    return _knn_all(
        index.points, index.order, index.node_lo, index.node_hi, index.node_left,
        index.node_right, index.node_in_max, index.node_out_min, index.pos_prime, k,
    )


def radius_query(index: NeighborIndex, q, eps: float) -> np.ndarray:
    """All row indices within distance <= eps, ascending by row index."""
    if not eps >= 0.0:
        raise InvalidInput(f"eps must be >= 0, got {eps}")
    q = _as_point(q, index.dim)
    found = np.empty(index.size, dtype=np.int64)
    count = _radius_into(
        index.points, index.order, index.node_lo, index.node_hi, index.node_left,
        index.node_right, index.node_in_max, index.node_out_min,
        q, eps, found,
    )
    out = found[:count]
    out.sort()
    return out


def k_distance_profile(X, k: int) -> np.ndarray:
    """Each point's distance to its k-th nearest other point, descending."""
    X = as_data_matrix(X, name="X")
    n = X.shape[0]
    if not 1 <= k < n:
        raise InvalidInput(f"k must be in [1, {n - 1}], got {k}")
    index = build_index(X)
    # query k+1 per point: the point itself arrives at distance 0
    _, dists = knn_all_points(index, k + 1)
    profile = dists[:, k]
    return np.sort(profile)[::-1].copy()


def estimate_eps(profile) -> float:
    """Knee of a descending k-distance profile by max distance to chord.

    Falls back to the middle profile value when the profile is a
    straight line (chord distance ~0 everywhere).  Never returns 0
    while any profile entry is positive.
    """
    profile = np.ascontiguousarray(profile, dtype=np.float64)
    if profile.ndim != 1 or profile.shape[0] < 3:
        raise InvalidInput("profile must be a vector of length >= 3")
    if np.any(np.diff(profile) > 0):
        raise InvalidInput("profile must be sorted descending")
    if not np.all(np.isfinite(profile)) or profile[-1] < 0.0:
        raise InvalidInput("profile entries must be finite and >= 0")
    if np.all(profile == 0.0):
        raise DegenerateInput("all k-distances are zero (fully duplicated data)")
    n = profile.shape[0]
    x0, y0 = 0.0, profile[0]
    x1, y1 = float(n - 1), profile[-1]
    dx, dy = x1 - x0, y1 - y0
    norm = math.hypot(dx, dy)
    xs = np.arange(n, dtype=np.float64)
    perp = np.abs(dy * (xs - x0) - dx * (profile - y0)) / norm
    scale = max(1.0, float(profile[0]))
    if perp.max() <= 1e-12 * scale:
        eps = float(profile[(n - 1) // 2])
    else:
        eps = float(profile[int(np.argmax(perp))])
    if eps <= 0.0:
        positive = profile[profile > 0.0]
        eps = float(positive[-1])
    return eps
