"""clusterlab: a reproducible clustering benchmark laboratory.

Deterministic synthetic data generation, exact neighbor search,
dimensionality reduction, clustering, and evaluation metrics, wired
together by a seeded benchmark pipeline and CLI.
"""

from .clusterers import (
    NOISE,
    DbscanParams,
    KMeansResult,
    Labeling,
    dbscan,
    kmeans,
    spectral,
)
from .dataio import (
    LabeledDataset,
    StandardizationParams,
    load_csv,
    load_har,
    load_idx,
    standardize,
    subsample,
    write_csv,
)
from .dimred import (
    Embedding,
    ReductionSpec,
    pca,
    reduce_data,
    tsne,
    umap_lite,
)
from .errors import (
    ClusterLabError,
    DegenerateInput,
    FormatError,
    InvalidInput,
    NumericalFailure,
    UndefinedMetric,
)
from .metrics import (
    METRIC_NAMES,
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
from .neighbors import (
    NeighborIndex,
    build_index,
    estimate_eps,
    k_distance_profile,
    knn_all_points,
    knn_query,
    knn_query_batch,
    radius_query,
)
from .pipeline import (
    DatasetConfig,
    DbscanConfig,
    KmeansConfig,
    PipelineConfig,
    PreparedData,
    RunArtifact,
    SpectralConfig,
    StabilityOutcome,
    SuiteEntry,
    SuiteResult,
    config_to_dict,
    load_config,
    load_suite,
    parse_config,
    parse_suite,
    prepare_inputs,
    run_pipeline,
    run_suite,
    stability_run,
)
from .rng import Rng, split
from .synth import KINDS, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "NOISE",
    "DbscanParams",
    "KMeansResult",
    "Labeling",
    "dbscan",
    "kmeans",
    "spectral",
    "LabeledDataset",
    "StandardizationParams",
    "load_csv",
    "load_har",
    "load_idx",
    "standardize",
    "subsample",
    "write_csv",
    "Embedding",
    "ReductionSpec",
    "pca",
    "reduce_data",
    "tsne",
    "umap_lite",
    "ClusterLabError",
    "DegenerateInput",
    "FormatError",
    "InvalidInput",
    "NumericalFailure",
    "UndefinedMetric",
    "METRIC_NAMES",
    "MetricReport",
    "RunMetrics",
    "StabilityRecord",
    "apply_noise_mode",
    "ari",
    "calinski_harabasz",
    "davies_bouldin",
    "nmi",
    "silhouette",
    "stability",
    "NeighborIndex",
    "build_index",
    "estimate_eps",
    "k_distance_profile",
    "knn_all_points",
    "knn_query",
    "knn_query_batch",
    "radius_query",
    "DatasetConfig",
    "DbscanConfig",
    "KmeansConfig",
    "PipelineConfig",
    "PreparedData",
    "RunArtifact",
    "SpectralConfig",
    "StabilityOutcome",
    "SuiteEntry",
    "SuiteResult",
    "config_to_dict",
    "load_config",
    "load_suite",
    "parse_config",
    "parse_suite",
    "prepare_inputs",
    "run_pipeline",
    "run_suite",
    "stability_run",
    "Rng",
    "split",
    "KINDS",
    "SynthSpec",
    "generate",
    "__version__",
]
