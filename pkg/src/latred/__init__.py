"""latred: latent-factor dimension reduction and class prediction.

Reduce a samples x genes expression matrix to a handful of latent factors,
either by per-partition Rasch models on binarized values or by principal
components, then classify samples with linear discriminant analysis. A
re-randomization harness measures test error and ROC performance over
repeated learning/test splits, with the factor count chosen per trial by
leave-one-out cross-validation.
"""

__version__ = "0.1.0"

from .cluster import GenePartition, kmeans_genes
from .data import (
    BinaryMatrix,
    ClassLabels,
    ExpressionMatrix,
    FactorMatrix,
    IngestError,
    Split,
    emit_csv,
    ingest_csv,
    make_splits,
    read_matrix_csv,
)
from .evaluate import (
    EvalConfig,
    EvalReport,
    MethodSummary,
    TrialOutcome,
    mer,
    roc_auc,
    roc_curve,
    run_evaluation,
    write_report_csv,
    write_roc_csv,
)
from .features import SelectionConfig, welch_t, select_random, select_supervised
from .lda import LDAModel, fit_lda, posterior_lda, predict_lda, score_class1
from .model_select import SelectKResult, select_k
from .modelio import (
    FitConfig,
    FittedModel,
    PredictionResult,
    fit_model,
    load_model,
    predict_model,
    save_model,
)
from .pca import PCAReducer, pca_fit, pca_transform
from .pipeline import METHODS, PipelineSettings, fit_reducer, transform
from .preprocess import PreprocessConfig, preprocess
from .rasch import (
    BinarizationRule,
    RaschPartitionModel,
    RaschReducer,
    binarize,
    eap_score,
    eap_scores,
    fit_rasch,
    gauss_hermite_normal,
    learn_binarization,
    rasch_prob,
    rasch_reduce_fit,
    rasch_transform,
)
from .synth import SynthSpec, gen_rasch_responses, gen_two_class

__all__ = [
    "__version__",
    "BinaryMatrix", "ClassLabels", "ExpressionMatrix", "FactorMatrix",
    "IngestError", "Split", "GenePartition",
    "emit_csv", "ingest_csv", "read_matrix_csv", "make_splits",
    "PreprocessConfig", "preprocess",
    "SelectionConfig", "welch_t", "select_random", "select_supervised",
    "kmeans_genes",
    "BinarizationRule", "RaschPartitionModel", "RaschReducer",
    "binarize", "learn_binarization", "rasch_prob", "gauss_hermite_normal",
    "fit_rasch", "eap_score", "eap_scores", "rasch_reduce_fit", "rasch_transform",
    "PCAReducer", "pca_fit", "pca_transform",
    "LDAModel", "fit_lda", "predict_lda", "posterior_lda", "score_class1",
    "METHODS", "PipelineSettings", "fit_reducer", "transform",
    "SelectKResult", "select_k",
    "EvalConfig", "EvalReport", "MethodSummary", "TrialOutcome",
    "mer", "roc_curve", "roc_auc", "run_evaluation",
    "write_report_csv", "write_roc_csv",
    "SynthSpec", "gen_two_class", "gen_rasch_responses",
    "FitConfig", "FittedModel", "PredictionResult",
    "fit_model", "predict_model", "save_model", "load_model",
]
