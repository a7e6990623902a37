"""Fit a reduce-then-classify model once, persist it, predict later.

The JSON payload carries everything prediction needs: the preprocessing
replay (clip bounds, log base, per-gene affine), the selected gene ids,
the reducer parameters, and the classifier. Files are written with sorted
keys and no timestamps, so identical fits produce identical bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cluster import GenePartition
from .data import ClassLabels, ExpressionMatrix
from .features import SELECTION_MODES, SelectionConfig, select_random, select_supervised
from .lda import LDAModel, fit_lda, posterior_lda, predict_lda
from .model_select import DEFAULT_K_GRID, SelectKResult, select_k
from .pipeline import DEFAULT_SETTINGS, METHODS, PipelineSettings, fit_reducer, transform
from .preprocess import (
    PreprocessConfig,
    filter_genes,
    log_columns,
    standardize_columns,
    threshold,
)
from .rasch import BinarizationRule, RaschPartitionModel, RaschReducer, gauss_hermite_normal
from .pca import PCAReducer
from .rng import ROLE_KMEANS_CV, ROLE_KMEANS_FINAL, ROLE_SELECT, derive_seed

MODEL_FORMAT = "latred-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class FitConfig:
    """How to build a single model from one labelled matrix."""

    method: str = "RM"
    select: str = "none"          # "none" keeps every gene
    p_star: Optional[int] = None  # required unless select == "none"
    k: Optional[int] = None       # fixed factor count; None selects by LOOCV
    k_grid: tuple = DEFAULT_K_GRID
    seed: int = 0
    preprocess_enabled: bool = True
    preprocess_cfg: PreprocessConfig = field(default_factory=PreprocessConfig)
    settings: PipelineSettings = field(default_factory=PipelineSettings)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.select not in ("none",) + SELECTION_MODES:
            raise ValueError(f"select must be 'none' or one of {SELECTION_MODES}")
        if self.select != "none" and (self.p_star is None or self.p_star < 1):
            raise ValueError("p_star must be a positive integer when selecting genes")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A trained pipeline plus the preprocessing replay for new samples."""

    method: str
    class_names: tuple
    k_star: int
    seed: int
    preprocess_enabled: bool
    preprocess_cfg: PreprocessConfig
    selected_genes: tuple         # gene ids, in model column order
    log_mean: object              # per selected gene (None if preprocessing off)
    log_sd: object
    reducer: object
    lda: LDAModel
    settings: PipelineSettings
    cv: Optional[SelectKResult]


@dataclass(frozen=True, eq=False)
class PredictionResult:
    sample_ids: tuple
    class_index: np.ndarray
    class_names: tuple
    scores: object                # class-1 posterior, or None when G > 2

    def predicted_names(self) -> tuple:
        return tuple(self.class_names[i] for i in self.class_index)


def fit_model(m: ExpressionMatrix, labels: ClassLabels, cfg: FitConfig) -> FittedModel:
    """Train on every provided sample (the whole matrix is the learning set)."""
    if labels.labels.size != m.n_samples:
        raise ValueError("labels do not match the matrix")

    if cfg.preprocess_enabled:
        trimmed = filter_genes(threshold(m, cfg.preprocess_cfg), cfg.preprocess_cfg)
        logged = log_columns(trimmed.values, cfg.preprocess_cfg.log_base)
        std = standardize_columns(logged)
        work = ExpressionMatrix(std, trimmed.sample_ids, trimmed.gene_ids)
        mean_all = logged.mean(axis=0)
        sd_all = logged.std(axis=0, ddof=1)
    else:
        work = m
        mean_all = sd_all = None

    if cfg.select == "none":
        genes = np.arange(work.n_genes)
        p_key = 0
    else:
        scfg = SelectionConfig(cfg.select, cfg.p_star,
                               derive_seed(cfg.seed, ROLE_SELECT, 0, cfg.p_star))
        genes = (select_supervised(work, labels, scfg) if cfg.select == "welch"
                 else select_random(work, scfg))
        p_key = cfg.p_star
    m_sel = work.take_genes(genes)

    mi = METHODS.index(cfg.method)
    cv = None
    if cfg.k is None:
        cv = select_k(cfg.method, m_sel, labels, cfg.k_grid,
                      derive_seed(cfg.seed, ROLE_KMEANS_CV, 0, p_key, mi),
                      cfg.settings)
        k_star = cv.k_star
    else:
        k_star = cfg.k

    reducer = fit_reducer(cfg.method, m_sel, k_star,
                          derive_seed(cfg.seed, ROLE_KMEANS_FINAL, 0, p_key, mi),
                          cfg.settings)
    lda = fit_lda(transform(reducer, m_sel), labels,
                  priors=cfg.settings.lda_priors,
                  ridge_eps=cfg.settings.lda_ridge_eps)

    return FittedModel(
        method=cfg.method,
        class_names=labels.class_names,
        k_star=k_star,
        seed=cfg.seed,
        preprocess_enabled=cfg.preprocess_enabled,
        preprocess_cfg=cfg.preprocess_cfg,
        selected_genes=m_sel.gene_ids,
        log_mean=None if mean_all is None else mean_all[genes],
        log_sd=None if sd_all is None else sd_all[genes],
        reducer=reducer,
        lda=lda,
        settings=cfg.settings,
        cv=cv,
    )


def predict_model(model: FittedModel, m: ExpressionMatrix) -> PredictionResult:
    """Classify new samples, replaying the stored preprocessing.

    The input matrix must contain every gene the model was fitted on
    (matched by id; extra genes are ignored, order is irrelevant).
    """
    pos = {gid: i for i, gid in enumerate(m.gene_ids)}
    missing = [g for g in model.selected_genes if g not in pos]
    if missing:
        raise ValueError(f"input matrix is missing required gene {missing[0]!r}")
    cols = [pos[g] for g in model.selected_genes]

    if model.preprocess_enabled:
        cfg = model.preprocess_cfg
        x = np.clip(m.values[:, cols], cfg.floor, cfg.ceiling)
        x = np.log(x) / np.log(cfg.log_base)
        x = (x - model.log_mean) / model.log_sd
    else:
        x = m.values[:, cols]
    m_sel = ExpressionMatrix(x, m.sample_ids, model.selected_genes)

    f = transform(model.reducer, m_sel)
    idx = predict_lda(model.lda, f)
    scores = posterior_lda(model.lda, f)[:, 1] if len(model.class_names) == 2 else None
    return PredictionResult(m.sample_ids, idx, model.class_names, scores)


def write_predictions_csv(result: PredictionResult, path) -> None:
    """Rows of sample_id,class,score (score blank for multi-class models)."""
    lines = ["sample_id,class,score"]
    for i, sid in enumerate(result.sample_ids):
        score = "" if result.scores is None else format(result.scores[i], ".6g")
        lines.append(f"{sid},{result.class_names[result.class_index[i]]},{score}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _reducer_payload(reducer) -> dict:
    if isinstance(reducer, RaschReducer):
        return {
            "type": "RM",
            "scope": reducer.rule.scope,
            "cutoffs": (reducer.rule.cutoffs if isinstance(reducer.rule.cutoffs, float)
                        else np.asarray(reducer.rule.cutoffs).tolist()),
            "assignments": reducer.partition.assignments.tolist(),
            "centroids": reducer.partition.centroids.tolist(),
            "inertia": reducer.partition.inertia,
            "models": [
                {
                    "beta": pm.beta.tolist(),
                    "nodes": int(pm.quad_nodes.size),
                    "log_likelihood": pm.log_likelihood,
                    "iterations": pm.iterations,
                }
                for pm in reducer.models
            ],
        }
    if isinstance(reducer, PCAReducer):
        return {
            "type": "PCA",
            "center": reducer.center.tolist(),
            "loadings": reducer.loadings.tolist(),
            "eigenvalues": reducer.eigenvalues.tolist(),
        }
    raise TypeError(f"not a fitted reducer: {type(reducer).__name__}")


def _reducer_from_payload(payload: dict, gene_ids: tuple):
    if payload["type"] == "PCA":
        return PCAReducer(
            center=np.asarray(payload["center"], dtype=np.float64),
            loadings=np.asarray(payload["loadings"], dtype=np.float64),
            eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
        )
    cut = payload["cutoffs"]
    rule = BinarizationRule(payload["scope"],
                            cut if isinstance(cut, float) else np.asarray(cut))
    partition = GenePartition(
        assignments=np.asarray(payload["assignments"], dtype=np.int64),
        centroids=np.asarray(payload["centroids"], dtype=np.float64),
        inertia=float(payload["inertia"]),
    )
    models = []
    for pm in payload["models"]:
        eta, w = gauss_hermite_normal(int(pm["nodes"]))
        loglik = float(pm["log_likelihood"])
        models.append(RaschPartitionModel(
            beta=np.asarray(pm["beta"], dtype=np.float64),
            quad_nodes=eta.copy(),
            quad_weights=w.copy(),
            log_likelihood=loglik,
            iterations=int(pm["iterations"]),
            loglik_trace=(loglik,),  # full trace is a fitting diagnostic only
        ))
    return RaschReducer(partition, rule, tuple(models), gene_ids)


def save_model(model: FittedModel, path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "method": model.method,
        "class_names": list(model.class_names),
        "k_star": model.k_star,
        "seed": model.seed,
        "preprocess": {
            "enabled": model.preprocess_enabled,
            "floor": model.preprocess_cfg.floor,
            "ceiling": model.preprocess_cfg.ceiling,
            "min_fold": model.preprocess_cfg.min_fold,
            "min_range": model.preprocess_cfg.min_range,
            "log_base": model.preprocess_cfg.log_base,
            "mean": None if model.log_mean is None else np.asarray(model.log_mean).tolist(),
            "sd": None if model.log_sd is None else np.asarray(model.log_sd).tolist(),
        },
        "selected_genes": list(model.selected_genes),
        "reducer": _reducer_payload(model.reducer),
        "lda": {
            "means": model.lda.means.tolist(),
            "cov": model.lda.cov.tolist(),
            "priors": model.lda.priors.tolist(),
            "ridge": model.lda.ridge,
        },
        "settings": {
            "scope": model.settings.scope,
            "restarts": model.settings.restarts,
            "kmeans_max_iter": model.settings.kmeans_max_iter,
            "nodes": model.settings.nodes,
            "beta_clip": model.settings.beta_clip,
            "em_tol": model.settings.em_tol,
            "em_max_iter": model.settings.em_max_iter,
        },
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> FittedModel:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model file: {path}")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')!r}")

    pp = payload["preprocess"]
    pcfg = PreprocessConfig(floor=pp["floor"], ceiling=pp["ceiling"],
                            min_fold=pp["min_fold"], min_range=pp["min_range"],
                            log_base=pp["log_base"])
    st = payload["settings"]
    settings = PipelineSettings(scope=st["scope"], restarts=st["restarts"],
                                kmeans_max_iter=st["kmeans_max_iter"],
                                nodes=st["nodes"], beta_clip=st["beta_clip"],
                                em_tol=st["em_tol"], em_max_iter=st["em_max_iter"])
    gene_ids = tuple(payload["selected_genes"])
    lda_p = payload["lda"]
    cov = np.asarray(lda_p["cov"], dtype=np.float64)
    lda = LDAModel(
        means=np.asarray(lda_p["means"], dtype=np.float64),
        cov=cov,
        precision=np.linalg.inv(cov),
        priors=np.asarray(lda_p["priors"], dtype=np.float64),
        ridge=float(lda_p["ridge"]),
    )
    return FittedModel(
        method=payload["method"],
        class_names=tuple(payload["class_names"]),
        k_star=int(payload["k_star"]),
        seed=int(payload["seed"]),
        preprocess_enabled=bool(pp["enabled"]),
        preprocess_cfg=pcfg,
        selected_genes=gene_ids,
        log_mean=None if pp["mean"] is None else np.asarray(pp["mean"], dtype=np.float64),
        log_sd=None if pp["sd"] is None else np.asarray(pp["sd"], dtype=np.float64),
        reducer=_reducer_from_payload(payload["reducer"], gene_ids),
        lda=lda,
        settings=settings,
        cv=None,  # cross-validation detail is not persisted
    )
