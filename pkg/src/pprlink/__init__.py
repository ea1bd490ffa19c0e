"""Drug pair link prediction from pruned personalized-PageRank profiles.

Pipeline: ingest a typed drug/gene graph, propagate truncated personalized
PageRank from every drug, prune each profile to its top-k entries, factorize
the pruned matrix into non-negative drug embeddings, combine embedding rows
into pair features, and train/evaluate supervised classifiers.
"""

__version__ = "0.1.0"

from . import errors
from .graph import (
    HeteroGraph,
    NodeKind,
    NodeRef,
    NormalizedAdjacency,
    PairTable,
    ingest_edges,
    read_edge_csv,
    read_target_csv,
    validate_targets,
)
from .ppr import (
    PprConfig,
    PprMatrix,
    PrunedPprMatrix,
    compute_ppr,
    ppr_row_query,
    prune,
    read_scores_csv,
    write_scores_csv,
)
from .embedding import (
    DimensionTooLargeWarning,
    Embedding,
    NmfConfig,
    drug_vectors,
    fit_nmf,
    read_embedding_csv,
    write_embedding_csv,
)
from .pairs import (
    PairFeatureTable,
    PairOperator,
    apply_operator,
    pair_features,
    read_feature_csv,
    write_feature_csv,
)
from .learn import (
    GbmConfig,
    GbmModel,
    LogRegConfig,
    LogRegModel,
    SplitConfig,
    fit_gbm,
    fit_logreg,
    load_model,
    logreg_loss_and_grad,
    predict_proba,
    save_model,
    train_test_split,
)
from .metrics import MetricsReport, aupr, auroc, evaluate_scores, f1
from .synth import SynthConfig, generate_synthetic, write_synthetic
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    run_dimension_sweep,
    run_pipeline,
    run_ratio_sweep,
)

__all__ = [
    "__version__",
    "errors",
    "HeteroGraph",
    "NodeKind",
    "NodeRef",
    "NormalizedAdjacency",
    "PairTable",
    "ingest_edges",
    "read_edge_csv",
    "read_target_csv",
    "validate_targets",
    "PprConfig",
    "PprMatrix",
    "PrunedPprMatrix",
    "compute_ppr",
    "ppr_row_query",
    "prune",
    "read_scores_csv",
    "write_scores_csv",
    "DimensionTooLargeWarning",
    "Embedding",
    "NmfConfig",
    "drug_vectors",
    "fit_nmf",
    "read_embedding_csv",
    "write_embedding_csv",
    "PairFeatureTable",
    "PairOperator",
    "apply_operator",
    "pair_features",
    "read_feature_csv",
    "write_feature_csv",
    "GbmConfig",
    "GbmModel",
    "LogRegConfig",
    "LogRegModel",
    "SplitConfig",
    "fit_gbm",
    "fit_logreg",
    "load_model",
    "logreg_loss_and_grad",
    "predict_proba",
    "save_model",
    "train_test_split",
    "MetricsReport",
    "aupr",
    "auroc",
    "evaluate_scores",
    "f1",
    "SynthConfig",
    "generate_synthetic",
    "write_synthetic",
    "PipelineConfig",
    "PipelineResult",
    "run_dimension_sweep",
    "run_pipeline",
    "run_ratio_sweep",
]
