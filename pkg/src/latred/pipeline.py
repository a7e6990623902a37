"""Shared fit/transform surface over the two reduction methods.

Everything downstream (cross-validation, evaluation, persistence) talks to
reducers through this module so the Rasch and PCA paths stay structurally
interchangeable: fit on a learning matrix, transform any matrix with
matching genes.
"""
from __future__ import annotations

from dataclasses import dataclass

from .data import ExpressionMatrix, FactorMatrix
from .lda import RIDGE_EPS
from .pca import PCAReducer, pca_fit, pca_transform
from .rasch import (
    BETA_CLIP,
    EM_MAX_ITER,
    EM_TOL,
    QUADRATURE_NODES,
    RaschReducer,
    rasch_reduce_fit,
    rasch_transform,
)

METHODS = ("RM", "PCA")


@dataclass(frozen=True)
class PipelineSettings:
    """Knobs for reducer and classifier fitting; defaults match the
    reported runs."""

    scope: str = "global_median"
    restarts: int = 10
    kmeans_max_iter: int = 300
    nodes: int = QUADRATURE_NODES
    beta_clip: float = BETA_CLIP
    em_tol: float = EM_TOL
    em_max_iter: int = EM_MAX_ITER
    lda_priors: str = "empirical"
    lda_ridge_eps: float = RIDGE_EPS


DEFAULT_SETTINGS = PipelineSettings()


def fit_reducer(method: str, m_learn: ExpressionMatrix, k: int, seed: int,
                settings: PipelineSettings = DEFAULT_SETTINGS):
    """Fit a k-factor reducer of the given method on learning data only.

    The seed drives gene partitioning for "RM"; "PCA" is deterministic and
    ignores it.
    """
    if method == "RM":
        return rasch_reduce_fit(
            m_learn, k, seed,
            scope=settings.scope,
            restarts=settings.restarts,
            kmeans_max_iter=settings.kmeans_max_iter,
            nodes=settings.nodes,
            beta_clip=settings.beta_clip,
            tol=settings.em_tol,
            max_iter=settings.em_max_iter,
        )
    if method == "PCA":
        return pca_fit(m_learn, k)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def transform(reducer, m: ExpressionMatrix) -> FactorMatrix:
    """Map an expression matrix to factor scores under a fitted reducer."""
    if isinstance(reducer, RaschReducer):
        return rasch_transform(reducer, m)
    if isinstance(reducer, PCAReducer):
        return pca_transform(reducer, m)
    raise TypeError(f"not a fitted reducer: {type(reducer).__name__}")


def reducer_method(reducer) -> str:
    if isinstance(reducer, RaschReducer):
        return "RM"
    if isinstance(reducer, PCAReducer):
        return "PCA"
    raise TypeError(f"not a fitted reducer: {type(reducer).__name__}")
