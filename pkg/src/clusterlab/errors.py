"""Exception types shared across the package."""


class ClusterLabError(Exception):
    """Base class for all clusterlab errors."""


class InvalidInput(ClusterLabError):
    """An argument violates an operation's precondition."""


class FormatError(ClusterLabError):
    """A file does not follow its declared on-disk format."""


class NumericalFailure(ClusterLabError):
    """A numerical routine could not produce a trustworthy result."""


class DegenerateInput(ClusterLabError):
    """Input is structurally valid but carries no usable information."""


class UndefinedMetric(ClusterLabError):
    """The requested metric is undefined for this labeling (reported as absent)."""
