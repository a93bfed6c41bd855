"""Synthetic dataset generators with ground-truth labels.

Six data characteristics, each deterministic given a seed: cluster
separability (well_separated_spherical / overlapping_spherical),
non-spherical shape (moons), density contrast (varied_density),
background noise (high_noise), and size imbalance (unbalanced).

Cluster points are isotropic Gaussians of unit base sigma; the module
constants below fix center spacing in sigma units and the other shape
parameters.  They are artifact constants: chosen so the six kinds show
their intended qualitative behavior at benchmark scale, and documented
in the README constants table.

Blob centers are laid out equi-spaced and then rotated by a seeded
orthogonal matrix, so every output axis carries between-cluster signal.
Without the rotation, axis-aligned centers leave the remaining axes as
pure noise and per-column standardization crushes the separation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataio import LabeledDataset
from .errors import InvalidInput
from .rng import Rng, split

KINDS = (
    "well_separated_spherical",
    "overlapping_spherical",
    "moons",
    "varied_density",
    "high_noise",
    "unbalanced",
)

WELL_SEPARATED_SPACING = 10.0   # center spacing, in units of cluster sigma
OVERLAPPING_SPACING = 2.5
HIGH_NOISE_SPACING = 10.0       # clean blobs, so the background is the only stressor
VARIED_DENSITY_SPACING = 6.0    # in units of the wide-cluster sigma
VARIED_DENSITY_RATIO = 4.0      # wide sigma : narrow sigma
UNBALANCED_SPACING = 10.0
UNBALANCED_MAJOR_FRACTION = 0.8  # 8:1:1 at three clusters
MOONS_JITTER = 0.06             # Gaussian jitter on the unit half-circles
DEFAULT_DIM = 10


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic dataset."""

    kind: str
    n_samples: int
    n_clusters: int = 3
    noise_fraction: float = 0.0
    seed: int = 0
    dim: int | None = None  # resolved to 2 for moons, 10 otherwise

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown synth kind {self.kind!r}, expected one of {KINDS}")
        if self.kind == "moons":
            if self.n_clusters != 2:
                raise InvalidInput("moons is defined for exactly 2 clusters")
            if self.dim not in (None, 2):
                raise InvalidInput("moons output is 2-D; dim must be 2 or omitted")
        if self.n_clusters < 1:
            raise InvalidInput(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.kind == "unbalanced" and self.n_clusters < 2:
            raise InvalidInput("unbalanced needs at least 2 clusters")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise InvalidInput(f"noise_fraction must be in [0, 1), got {self.noise_fraction}")
        if self.noise_fraction > 0.0 and self.kind != "high_noise":
            raise InvalidInput("noise_fraction > 0 is only valid for kind high_noise")
        if self.n_samples < 10 * self.n_clusters:
            raise InvalidInput(
                f"n_samples must be >= 10 * n_clusters ({10 * self.n_clusters}), got {self.n_samples}"
            )
        if self.dim is not None and self.dim < 1:
            raise InvalidInput(f"dim must be >= 1, got {self.dim}")

    @property
    def resolved_dim(self) -> int:
        if self.kind == "moons":
            return 2
        return DEFAULT_DIM if self.dim is None else self.dim


def _split_sizes(total: int, weights: np.ndarray) -> np.ndarray:
    """Integer sizes proportional to weights, largest remainder, sum exact."""
    quotas = total * weights / weights.sum()
    sizes = np.floor(quotas).astype(np.int64)
    leftover = total - int(sizes.sum())
    order = np.lexsort((np.arange(len(weights)), -(quotas - sizes)))
    sizes[order[:leftover]] += 1
    return sizes


_ROTATION_STREAM = 1 << 32  # above any per-cluster stream index


def _rotation(dim: int, seed: int) -> np.ndarray:
    """Seeded orthogonal matrix (QR of a Gaussian draw, signs fixed)."""
    g = Rng(split(seed, _ROTATION_STREAM)).normals(dim * dim).reshape(dim, dim)
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def _centers(k: int, dim: int, spacing: float, seed: int) -> np.ndarray:
    """Deterministic equi-spaced center layout in seeded orientation.

    k <= dim: scaled basis vectors, every pair exactly `spacing` apart.
    dim == 2: regular k-gon with adjacent vertices `spacing` apart.
    """
    if k <= dim:
        centers = np.eye(k, dim) * (spacing / math.sqrt(2.0))
    elif dim == 2:
        radius = spacing / (2.0 * math.sin(math.pi / k))
        angles = 2.0 * math.pi * np.arange(k) / k
        centers = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        raise InvalidInput(f"cannot place {k} equi-spaced centers in {dim} dimensions")
    return centers @ _rotation(dim, seed).T


def _gaussian_blobs(spec: SynthSpec, spacing: float, sigmas: np.ndarray, n_points: int):
    k = spec.n_clusters
    dim = spec.resolved_dim
    centers = _centers(k, dim, spacing, spec.seed)
    sizes = _split_sizes(n_points, np.ones(k))
    return _sample_blobs(spec.seed, centers, sigmas, sizes)


def _sample_blobs(seed: int, centers: np.ndarray, sigmas: np.ndarray, sizes: np.ndarray):
    dim = centers.shape[1]
    parts = []
    labels = []
    for i, size in enumerate(sizes):
        rng = Rng(split(seed, i))
        pts = rng.normals(size * dim).reshape(size, dim) * sigmas[i] + centers[i]
        parts.append(pts)
        labels.append(np.full(size, i, dtype=np.int64))
    return np.vstack(parts), np.concatenate(labels)


def _moons(spec: SynthSpec):
    n = spec.n_samples
    n_upper = n - n // 2
    n_lower = n // 2
    t_upper = np.linspace(0.0, math.pi, n_upper)
    t_lower = np.linspace(0.0, math.pi, n_lower)
    upper = np.stack([np.cos(t_upper), np.sin(t_upper)], axis=1)
    lower = np.stack([1.0 - np.cos(t_lower), 0.5 - np.sin(t_lower)], axis=1)
    X = np.vstack([upper, lower])
    X += Rng(split(spec.seed, 0)).normals(2 * n).reshape(n, 2) * MOONS_JITTER
    labels = np.concatenate([np.zeros(n_upper, dtype=np.int64), np.ones(n_lower, dtype=np.int64)])
    return X, labels


def generate(spec: SynthSpec) -> LabeledDataset:
    """Build the dataset described by spec; bit-identical for equal specs.

    Labels are generation truth: cluster ids 0..n_clusters-1, and for
    high_noise the background points carry the extra label n_clusters.
    """
    k = spec.n_clusters
    n = spec.n_samples
    kind = spec.kind

    if kind == "moons":
        X, labels = _moons(spec)
    elif kind == "well_separated_spherical":
        X, labels = _gaussian_blobs(spec, WELL_SEPARATED_SPACING, np.ones(k), n)
    elif kind == "overlapping_spherical":
        X, labels = _gaussian_blobs(spec, OVERLAPPING_SPACING, np.ones(k), n)
    elif kind == "varied_density":
        sigmas = np.where(np.arange(k) % 2 == 0, 1.0, 1.0 / VARIED_DENSITY_RATIO)
        X, labels = _gaussian_blobs(spec, VARIED_DENSITY_SPACING, sigmas, n)
    elif kind == "unbalanced":
        weights = np.full(k, (1.0 - UNBALANCED_MAJOR_FRACTION) / (k - 1))
        weights[0] = UNBALANCED_MAJOR_FRACTION
        centers = _centers(k, spec.resolved_dim, UNBALANCED_SPACING, spec.seed)
        sizes = _split_sizes(n, weights)
        X, labels = _sample_blobs(spec.seed, centers, np.ones(k), sizes)
    elif kind == "high_noise":
        n_noise = int(round(spec.noise_fraction * n))
        X, labels = _gaussian_blobs(spec, HIGH_NOISE_SPACING, np.ones(k), n - n_noise)
        if n_noise:
            lo = X.min(axis=0)
            hi = X.max(axis=0)
            rng = Rng(split(spec.seed, k))
            u = rng.uniforms(n_noise * X.shape[1]).reshape(n_noise, X.shape[1])
            noise = lo + u * (hi - lo)
            X = np.vstack([X, noise])
            labels = np.concatenate([labels, np.full(n_noise, k, dtype=np.int64)])
    else:  # unreachable: SynthSpec validated kind
        raise InvalidInput(f"unknown synth kind {kind!r}")

    return LabeledDataset(data=X, labels=labels, name=f"synth-{kind}")
