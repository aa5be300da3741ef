"""Clustering-driven hybrid MLP regression.

Cluster a tabular sensor dataset, score the clusterings with Silhouette,
Calinski-Harabasz and Davies-Bouldin, train one MLP per cluster with
grid-search cross-validation and report per-cluster and size-weighted errors.
"""

from .clustering import (ClusterAssignment, ClusterModel, agglomerative, build_similarity_graph,
                         gaussian_mixture, kmeans, route, spectral)
from .dataset import (Dataset, ScalerParams, SplitSpec, apply_scaler, fit_scaler, ingest_csv,
                      split, synthesize)
from .hybrid import HybridModel, compare_methods, error_report, predict, train_hybrid
from .lda import LdaProjection, fit_lda, project
from .metrics import ErrorReport, regression_errors
from .mlp import GridSpec, MlpModel, forward, gradient, grid_search, train
from .quality import QualityReport, calinski_harabasz, davies_bouldin, scan_k, silhouette

__version__ = "0.1.0"
