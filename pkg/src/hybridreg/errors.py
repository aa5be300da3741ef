"""Exception hierarchy. The CLI maps these onto exit codes."""


class HybridRegError(Exception):
    """Base class for all package errors."""


class DataError(HybridRegError, ValueError):
    """Bad input data: missing file or column, unparseable value, empty set."""


class SchemaError(DataError):
    """CSV header does not provide the required columns."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"missing column(s): {', '.join(self.missing)}")


class NumericError(HybridRegError, ArithmeticError):
    """A numerical procedure failed (degenerate input, divergence, non-convergence)."""


class ClusteringError(NumericError):
    """A clustering run could not produce exactly k non-empty clusters."""


class ClusterTooSmallError(NumericError):
    """A cluster has fewer samples than cross-validation folds."""

    def __init__(self, cluster, size, folds):
        self.cluster = cluster
        self.size = size
        self.folds = folds
        super().__init__(
            f"cluster {cluster} has {size} sample(s), fewer than the {folds} CV folds"
        )
