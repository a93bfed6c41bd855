"""Configuration-driven benchmark pipelines.

A pipeline executes load -> standardize -> subsample -> reduce ->
cluster (`runs` times) -> metrics -> aggregate.  Configs arrive as
versioned JSON with unknown keys rejected, so a config file pins the
whole experiment.  Every random draw derives from the config's
master_seed: run i clusters with seed split(master_seed, i), while
pipeline-level draws (subsampling, reduction) use stream indices at
2**32 and above so they never collide with run streams.

Suites execute their pipelines in config order; a failing pipeline
becomes an error tag on its row and the suite continues.  Execution is
sequential, which trivially satisfies the requirement that output not
depend on scheduling.
"""

from __future__ import annotations

import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Any, ClassVar, Union

import numpy as np

from .clusterers import NOISE, DbscanParams, dbscan, kmeans, spectral
from .dataio import LabeledDataset, load_csv, load_har, load_idx, standardize, subsample
from .dimred import METHODS, Embedding, ReductionSpec, reduce_data
from .errors import ClusterLabError, InvalidInput, NumericalFailure, UndefinedMetric
from .metrics import (
    MetricReport,
    RunMetrics,
    StabilityRecord,
    apply_noise_mode,
    ari,
    calinski_harabasz,
    davies_bouldin,
    nmi,
    silhouette,
    stability,
)
from .neighbors import estimate_eps, k_distance_profile
from .rng import split
from .synth import SynthSpec, generate

SCHEMA_VERSION = 1
NOISE_MODES = ("as_cluster", "exclude")
DATASET_KINDS = ("mnist", "fashion_mnist", "har", "synth", "csv")

DEFAULT_RUNS = 10
KMEANS_DEFAULT_RESTARTS = 10
DBSCAN_DEFAULT_MIN_PTS = 5
SPECTRAL_DEFAULT_NEIGHBORS = 10

# run i draws from stream i; pipeline-level draws start at 2**32
SUBSAMPLE_STREAM = 1 << 32
REDUCTION_STREAM = (1 << 32) + 1


@dataclass(frozen=True)
class DatasetConfig:
    """Where a pipeline's data comes from.

    Exactly the fields for the chosen kind may be set: synth carries a
    generation spec, csv a file path, mnist/fashion_mnist an IDX
    image/label path pair, har a features/labels text path pair.
    """

    kind: str
    synth: SynthSpec | None = None
    path: str | None = None
    images: str | None = None
    labels: str | None = None
    features: str | None = None

    _REQUIRED: ClassVar[dict[str, tuple[str, ...]]] = {
        "synth": ("synth",),
        "csv": ("path",),
        "mnist": ("images", "labels"),
        "fashion_mnist": ("images", "labels"),
        "har": ("features", "labels"),
    }

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise InvalidInput(f"unknown dataset kind {self.kind!r}, expected one of {DATASET_KINDS}")
        required = self._REQUIRED[self.kind]
        for name in ("synth", "path", "images", "labels", "features"):
            value = getattr(self, name)
            if name in required and value is None:
                raise InvalidInput(f"dataset kind {self.kind!r} requires {name!r}")
            if name not in required and value is not None:
                raise InvalidInput(f"dataset kind {self.kind!r} does not take {name!r}")

    @property
    def label(self) -> str:
        """Short row identity for tables; distinct across suite variants."""
        if self.kind == "synth":
            s = self.synth
            return f"synth:{s.kind}:n{s.n_samples}:seed{s.seed}"
        if self.kind == "csv":
            return os.path.splitext(os.path.basename(self.path))[0]
        return self.kind


@dataclass(frozen=True)
class KmeansConfig:
    k: int
    restarts: int = KMEANS_DEFAULT_RESTARTS

    algorithm: ClassVar[str] = "kmeans"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput(f"kmeans k must be >= 1, got {self.k}")
        if self.restarts < 1:
            raise InvalidInput(f"kmeans restarts must be >= 1, got {self.restarts}")

    @property
    def params_label(self) -> str:
        return f"k={self.k};restarts={self.restarts}"


@dataclass(frozen=True)
class DbscanConfig:
    """eps None means: estimate from the k-distance profile knee."""

    eps: float | None = None
    min_pts: int = DBSCAN_DEFAULT_MIN_PTS

    algorithm: ClassVar[str] = "dbscan"

    def __post_init__(self):
        if self.eps is not None:
            eps = float(self.eps)
            if not np.isfinite(eps) or eps <= 0.0:
                raise InvalidInput(f"dbscan eps must be positive and finite, got {self.eps}")
            object.__setattr__(self, "eps", eps)
        if self.min_pts < 1:
            raise InvalidInput(f"dbscan min_pts must be >= 1, got {self.min_pts}")

    @property
    def params_label(self) -> str:
        eps = "auto" if self.eps is None else format(self.eps, ".12g")
        return f"eps={eps};min_pts={self.min_pts}"


@dataclass(frozen=True)
class SpectralConfig:
    k: int
    n_neighbors: int = SPECTRAL_DEFAULT_NEIGHBORS

    algorithm: ClassVar[str] = "spectral"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput(f"spectral k must be >= 1, got {self.k}")
        if self.n_neighbors < 1:
            raise InvalidInput(f"spectral n_neighbors must be >= 1, got {self.n_neighbors}")

    @property
    def params_label(self) -> str:
        return f"k={self.k};n_neighbors={self.n_neighbors}"


ClustererConfig = Union[KmeansConfig, DbscanConfig, SpectralConfig]


@dataclass(frozen=True)
class PipelineConfig:
    """One experiment: data source, optional reduction, clusterer, runs."""

    dataset: DatasetConfig
    clusterer: ClustererConfig | None = None
    reduction: ReductionSpec | None = None
    subsample_n: int | None = None
    runs: int = DEFAULT_RUNS
    master_seed: int = 0
    noise_mode: str = "as_cluster"

    def __post_init__(self):
        if self.runs < 1:
            raise InvalidInput(f"runs must be >= 1, got {self.runs}")
        if self.subsample_n is not None and self.subsample_n < 1:
            raise InvalidInput(f"subsample_n must be >= 1, got {self.subsample_n}")
        if self.master_seed < 0:
            raise InvalidInput(f"master_seed must be >= 0, got {self.master_seed}")
        if self.noise_mode not in NOISE_MODES:
            raise InvalidInput(f"unknown noise_mode {self.noise_mode!r}, expected one of {NOISE_MODES}")

    @property
    def reduction_label(self) -> str:
        if self.reduction is None:
            return "raw"
        return f"{self.reduction.method}{self.reduction.target_dim}"


def config_warnings(cfg: PipelineConfig) -> tuple[str, ...]:
    """Nonstandard-but-allowed settings, surfaced in every report."""
    notes = []
    r = cfg.reduction
    if r is not None and r.method == "tsne" and r.target_dim > 3:
        notes.append(f"tsne target_dim {r.target_dim} is nonstandard; typical targets are 2 or 3")
    return tuple(notes)


# ---------------------------------------------------------------------------
# config parsing

_MISSING = object()


def _mapping(obj: Any, where: str) -> dict:
    if not isinstance(obj, dict):
        raise InvalidInput(f"{where} must be a JSON object")
    return dict(obj)


def _no_extras(d: dict, where: str) -> None:
    if d:
        raise InvalidInput(f"{where}: unknown keys {sorted(d)}")


def _pop(d: dict, key: str, where: str, default: Any = _MISSING) -> Any:
    if key in d:
        return d.pop(key)
    if default is _MISSING:
        raise InvalidInput(f"{where}: missing required key {key!r}")
    return default


def _int_value(v: Any, where: str, minimum: int | None = None) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInput(f"{where} must be an integer")
    if minimum is not None and v < minimum:
        raise InvalidInput(f"{where} must be >= {minimum}, got {v}")
    return v


def _float_value(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInput(f"{where} must be a number")
    return float(v)


def _str_value(v: Any, where: str) -> str:
    if not isinstance(v, str):
        raise InvalidInput(f"{where} must be a string")
    return v


def _parse_dataset(obj: Any) -> DatasetConfig:
    d = _mapping(obj, "dataset")
    kind = _str_value(_pop(d, "kind", "dataset"), "dataset.kind")
    if kind not in DATASET_KINDS:
        raise InvalidInput(f"dataset.kind {kind!r} not one of {DATASET_KINDS}")
    if kind == "synth":
        s = _mapping(_pop(d, "spec", "dataset"), "dataset.spec")
        spec = SynthSpec(
            kind=_str_value(_pop(s, "kind", "dataset.spec"), "dataset.spec.kind"),
            n_samples=_int_value(_pop(s, "n_samples", "dataset.spec"), "dataset.spec.n_samples", minimum=1),
            n_clusters=_int_value(_pop(s, "n_clusters", "dataset.spec", 3), "dataset.spec.n_clusters"),
            noise_fraction=_float_value(_pop(s, "noise_fraction", "dataset.spec", 0.0), "dataset.spec.noise_fraction"),
            seed=_int_value(_pop(s, "seed", "dataset.spec", 0), "dataset.spec.seed", minimum=0),
            dim=(lambda v: None if v is None else _int_value(v, "dataset.spec.dim"))(
                _pop(s, "dim", "dataset.spec", None)
            ),
        )
        _no_extras(s, "dataset.spec")
        cfg = DatasetConfig(kind=kind, synth=spec)
    elif kind == "csv":
        cfg = DatasetConfig(kind=kind, path=_str_value(_pop(d, "path", "dataset"), "dataset.path"))
    elif kind == "har":
        cfg = DatasetConfig(
            kind=kind,
            features=_str_value(_pop(d, "features", "dataset"), "dataset.features"),
            labels=_str_value(_pop(d, "labels", "dataset"), "dataset.labels"),
        )
    else:
        cfg = DatasetConfig(
            kind=kind,
            images=_str_value(_pop(d, "images", "dataset"), "dataset.images"),
            labels=_str_value(_pop(d, "labels", "dataset"), "dataset.labels"),
        )
    _no_extras(d, "dataset")
    return cfg


def _parse_reduction(obj: Any) -> ReductionSpec:
    d = _mapping(obj, "reduction")
    method = _str_value(_pop(d, "method", "reduction"), "reduction.method")
    if method not in METHODS:
        raise InvalidInput(f"reduction.method {method!r} not one of {METHODS}")
    target_dim = _int_value(_pop(d, "target_dim", "reduction"), "reduction.target_dim", minimum=1)
    kwargs: dict[str, Any] = {}
    if method == "tsne":
        perplexity = _pop(d, "perplexity", "reduction", None)
        if perplexity is not None:
            kwargs["perplexity"] = _float_value(perplexity, "reduction.perplexity")
    elif method == "umap":
        n_neighbors = _pop(d, "n_neighbors", "reduction", None)
        if n_neighbors is not None:
            kwargs["n_neighbors"] = _int_value(n_neighbors, "reduction.n_neighbors")
        min_dist = _pop(d, "min_dist", "reduction", None)
        if min_dist is not None:
            kwargs["min_dist"] = _float_value(min_dist, "reduction.min_dist")
    _no_extras(d, "reduction")
    return ReductionSpec(method=method, target_dim=target_dim, **kwargs)


def _parse_clusterer(obj: Any) -> ClustererConfig:
    d = _mapping(obj, "clusterer")
    algorithm = _str_value(_pop(d, "algorithm", "clusterer"), "clusterer.algorithm")
    if algorithm == "kmeans":
        cfg: ClustererConfig = KmeansConfig(
            k=_int_value(_pop(d, "k", "clusterer"), "clusterer.k"),
            restarts=_int_value(
                _pop(d, "restarts", "clusterer", KMEANS_DEFAULT_RESTARTS), "clusterer.restarts"
            ),
        )
    elif algorithm == "dbscan":
        eps = _pop(d, "eps", "clusterer")
        if eps == "auto":
            eps_value = None
        else:
            eps_value = _float_value(eps, "clusterer.eps")
        cfg = DbscanConfig(
            eps=eps_value,
            min_pts=_int_value(
                _pop(d, "min_pts", "clusterer", DBSCAN_DEFAULT_MIN_PTS), "clusterer.min_pts"
            ),
        )
    elif algorithm == "spectral":
        cfg = SpectralConfig(
            k=_int_value(_pop(d, "k", "clusterer"), "clusterer.k"),
            n_neighbors=_int_value(
                _pop(d, "n_neighbors", "clusterer", SPECTRAL_DEFAULT_NEIGHBORS),
                "clusterer.n_neighbors",
            ),
        )
    else:
        raise InvalidInput(f"clusterer.algorithm {algorithm!r} not one of ('kmeans', 'dbscan', 'spectral')")
    _no_extras(d, "clusterer")
    return cfg


def parse_config(obj: Any, require_version: bool = True) -> PipelineConfig:
    """Validate a JSON-shaped pipeline config; unknown keys are errors."""
    d = _mapping(obj, "config")
    if require_version:
        version = _int_value(_pop(d, "schema_version", "config"), "config.schema_version")
        if version != SCHEMA_VERSION:
            raise InvalidInput(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    dataset = _parse_dataset(_pop(d, "dataset", "config"))
    clusterer_obj = _pop(d, "clusterer", "config", None)
    clusterer = None if clusterer_obj is None else _parse_clusterer(clusterer_obj)
    reduction_obj = _pop(d, "reduction", "config", None)
    reduction = None if reduction_obj is None else _parse_reduction(reduction_obj)
    subsample_obj = _pop(d, "subsample_n", "config", None)
    subsample_n = None if subsample_obj is None else _int_value(subsample_obj, "config.subsample_n")
    runs = _int_value(_pop(d, "runs", "config", DEFAULT_RUNS), "config.runs")
    master_seed = _int_value(_pop(d, "master_seed", "config", 0), "config.master_seed")
    noise_mode = _str_value(_pop(d, "noise_mode", "config", "as_cluster"), "config.noise_mode")
    _no_extras(d, "config")
    return PipelineConfig(
        dataset=dataset,
        clusterer=clusterer,
        reduction=reduction,
        subsample_n=subsample_n,
        runs=runs,
        master_seed=master_seed,
        noise_mode=noise_mode,
    )


def parse_suite(obj: Any) -> tuple[PipelineConfig, ...]:
    """Validate a suite config: schema_version plus a pipelines array."""
    d = _mapping(obj, "suite")
    version = _int_value(_pop(d, "schema_version", "suite"), "suite.schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInput(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    entries = _pop(d, "pipelines", "suite")
    _no_extras(d, "suite")
    if not isinstance(entries, list) or not entries:
        raise InvalidInput("suite.pipelines must be a non-empty array")
    configs = []
    for i, entry in enumerate(entries):
        try:
            configs.append(parse_config(entry, require_version=False))
        except InvalidInput as exc:
            raise InvalidInput(f"pipelines[{i}]: {exc}") from None
    return tuple(configs)


def _load_json(path) -> Any:
    with open(str(path), "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: invalid JSON ({exc})") from exc


def load_config(path) -> PipelineConfig:
    return parse_config(_load_json(path))


def load_suite(path) -> tuple[PipelineConfig, ...]:
    return parse_suite(_load_json(path))


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Canonical JSON form; parse_config(config_to_dict(cfg)) == cfg."""
    ds = cfg.dataset
    if ds.kind == "synth":
        s = ds.synth
        dataset: dict[str, Any] = {
            "kind": "synth",
            "spec": {
                "kind": s.kind,
                "n_samples": s.n_samples,
                "n_clusters": s.n_clusters,
                "noise_fraction": s.noise_fraction,
                "seed": s.seed,
                "dim": s.dim,
            },
        }
    elif ds.kind == "csv":
        dataset = {"kind": "csv", "path": ds.path}
    elif ds.kind == "har":
        dataset = {"kind": "har", "features": ds.features, "labels": ds.labels}
    else:
        dataset = {"kind": ds.kind, "images": ds.images, "labels": ds.labels}

    c = cfg.clusterer
    if c is None:
        clusterer = None
    elif isinstance(c, KmeansConfig):
        clusterer = {"algorithm": "kmeans", "k": c.k, "restarts": c.restarts}
    elif isinstance(c, DbscanConfig):
        clusterer = {
            "algorithm": "dbscan",
            "eps": "auto" if c.eps is None else c.eps,
            "min_pts": c.min_pts,
        }
    else:
        clusterer = {"algorithm": "spectral", "k": c.k, "n_neighbors": c.n_neighbors}

    r = cfg.reduction
    if r is None:
        reduction = None
    else:
        reduction = {"method": r.method, "target_dim": r.target_dim}
        if r.method == "tsne":
            reduction["perplexity"] = r.perplexity
        elif r.method == "umap":
            reduction["n_neighbors"] = r.n_neighbors
            reduction["min_dist"] = r.min_dist

    return {
        "schema_version": SCHEMA_VERSION,
        "dataset": dataset,
        "clusterer": clusterer,
        "reduction": reduction,
        "subsample_n": cfg.subsample_n,
        "runs": cfg.runs,
        "master_seed": cfg.master_seed,
        "noise_mode": cfg.noise_mode,
    }


# ---------------------------------------------------------------------------
# execution


@contextmanager
def _stage(name: str):
    """Prefix module and file errors with the failing pipeline stage.

    Re-raises the same exception type so exit-code mapping still sees
    OSError vs InvalidInput; OSError formats from errno attributes, so
    mutating args alone would not surface the stage name.
    """
    try:
        yield
    except (ClusterLabError, OSError) as exc:
        raise type(exc)(f"[stage {name}] {exc}") from exc


@dataclass(frozen=True)
class PreparedData:
    """A pipeline's inputs after load/standardize/subsample/reduce."""

    X: np.ndarray
    truth: np.ndarray
    dataset_name: str
    n_features_in: int
    embedding: Embedding | None


def _load_dataset(dc: DatasetConfig) -> LabeledDataset:
    if dc.kind == "synth":
        return generate(dc.synth)
    if dc.kind == "csv":
        return load_csv(dc.path)
    if dc.kind == "har":
        return load_har(dc.features, dc.labels)
    return load_idx(dc.images, dc.labels, name=dc.kind)


def prepare_inputs(cfg: PipelineConfig) -> PreparedData:
    """Everything before clustering; shared by run, embed, and eps paths."""
    with _stage("load"):
        ds = _load_dataset(cfg.dataset)
    with _stage("standardize"):
        Z, _ = standardize(ds.data)
        ds = LabeledDataset(data=Z, labels=ds.labels, name=ds.name)
    if cfg.subsample_n is not None:
        with _stage("subsample"):
            ds = subsample(ds, cfg.subsample_n, split(cfg.master_seed, SUBSAMPLE_STREAM))
    X = ds.data
    n_features_in = X.shape[1]
    embedding = None
    if cfg.reduction is not None:
        spec = replace(cfg.reduction, seed=split(cfg.master_seed, REDUCTION_STREAM))
        with _stage("reduce"):
            embedding = reduce_data(X, spec)
        X = embedding.coords
    return PreparedData(
        X=X,
        truth=ds.labels,
        dataset_name=ds.name,
        n_features_in=n_features_in,
        embedding=embedding,
    )


def _maybe(metric, *args):
    try:
        return metric(*args)
    except UndefinedMetric:
        return None


def _evaluate_run(
    X: np.ndarray, truth: np.ndarray, pred: np.ndarray, noise_mode: str, wall: float
) -> RunMetrics:
    try:
        t, p = apply_noise_mode(truth, pred, noise_mode)
        ari_value: float | None = ari(t, p)
        nmi_value: float | None = nmi(t, p)
    except UndefinedMetric:
        ari_value = None
        nmi_value = None
    return RunMetrics(
        ari=ari_value,
        nmi=nmi_value,
        silhouette=_maybe(silhouette, X, pred),
        davies_bouldin=_maybe(davies_bouldin, X, pred),
        calinski_harabasz=_maybe(calinski_harabasz, X, pred),
        wall_time_seconds=wall,
        n_noise=int(np.count_nonzero(pred == NOISE)),
    )


@dataclass(frozen=True)
class RunArtifact:
    """One executed pipeline: config echo, per-run metrics, aggregates.

    Aggregates are recomputed from per_run values by MetricReport, so
    they can always be reproduced from the serialized per-run detail.
    """

    config: PipelineConfig
    report: MetricReport
    resolved_params: dict
    dataset_name: str
    n_rows: int
    n_features_in: int
    n_features_active: int
    embedding: Embedding | None
    truth: np.ndarray
    assignments: tuple[np.ndarray, ...]
    warnings: tuple[str, ...]


def run_pipeline(cfg: PipelineConfig) -> RunArtifact:
    """Execute one pipeline config end to end.

    Run i clusters with seed split(master_seed, i).  DBSCAN takes no
    seed, so its runs are identical by construction; that identity is
    checked after the loop.  Auto eps resolves once per pipeline, on
    the matrix the clusterer will see (after any reduction), from the
    knee of the (min_pts - 1)-distance profile.
    """
    if cfg.clusterer is None:
        raise InvalidInput("pipeline config has no clusterer")
    prep = prepare_inputs(cfg)
    X, truth = prep.X, prep.truth
    c = cfg.clusterer

    resolved_params: dict[str, float] = {}
    dbscan_params = None
    if isinstance(c, DbscanConfig):
        eps = c.eps
        if eps is None:
            with _stage("estimate-eps"):
                profile = k_distance_profile(X, max(1, c.min_pts - 1))
                eps = estimate_eps(profile)
        resolved_params["eps"] = float(eps)
        dbscan_params = DbscanParams(eps=float(eps), min_pts=c.min_pts)

    per_run: list[RunMetrics] = []
    assignments: list[np.ndarray] = []
    for i in range(cfg.runs):
        seed = split(cfg.master_seed, i)
        started = time.perf_counter()
        with _stage("cluster"):
            if isinstance(c, KmeansConfig):
                pred = kmeans(X, c.k, restarts=c.restarts, seed=seed).labeling.assignments
            elif isinstance(c, SpectralConfig):
                pred = spectral(X, c.k, n_neighbors=c.n_neighbors, seed=seed).assignments
            else:
                pred = dbscan(X, dbscan_params).assignments
        wall = time.perf_counter() - started
        with _stage("metrics"):
            per_run.append(_evaluate_run(X, truth, pred, cfg.noise_mode, wall))
        assignments.append(pred)

    if isinstance(c, DbscanConfig):
        for pred in assignments[1:]:
            if not np.array_equal(pred, assignments[0]):
                raise NumericalFailure("dbscan produced differing partitions across identical runs")

    return RunArtifact(
        config=cfg,
        report=MetricReport(per_run=tuple(per_run)),
        resolved_params=resolved_params,
        dataset_name=prep.dataset_name,
        n_rows=X.shape[0],
        n_features_in=prep.n_features_in,
        n_features_active=X.shape[1],
        embedding=prep.embedding,
        truth=truth,
        assignments=tuple(assignments),
        warnings=config_warnings(cfg),
    )


@dataclass(frozen=True)
class SuiteEntry:
    """One suite row: the config plus either its artifact or an error tag."""

    config: PipelineConfig
    artifact: RunArtifact | None
    error: str | None


@dataclass(frozen=True)
class SuiteResult:
    entries: tuple[SuiteEntry, ...]

    @property
    def n_failed(self) -> int:
        return sum(1 for e in self.entries if e.error is not None)


def run_suite(configs) -> SuiteResult:
    """Execute pipelines in order; a failure becomes its row's error tag."""
    configs = tuple(configs)
    if not configs:
        raise InvalidInput("suite needs at least one pipeline config")
    entries = []
    for cfg in configs:
        try:
            artifact = run_pipeline(cfg)
        except (ClusterLabError, OSError) as exc:
            entries.append(SuiteEntry(config=cfg, artifact=None, error=f"{type(exc).__name__}: {exc}"))
        else:
            entries.append(SuiteEntry(config=cfg, artifact=artifact, error=None))
    return SuiteResult(entries=tuple(entries))


@dataclass(frozen=True)
class StabilityOutcome:
    record: StabilityRecord
    artifact: RunArtifact


def stability_run(cfg: PipelineConfig) -> StabilityOutcome:
    """Run the pipeline and summarize per-run ARI spread as 1 - std/mean."""
    if cfg.runs < 2:
        raise InvalidInput(f"stability needs runs >= 2, got {cfg.runs}")
    artifact = run_pipeline(cfg)
    values = artifact.report.values("ari")
    if len(values) < 2:
        raise UndefinedMetric("fewer than 2 runs produced a defined ARI")
    return StabilityOutcome(record=stability(values), artifact=artifact)
