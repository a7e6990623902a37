"""Factor-count selection by leave-one-out cross-validation.

For every candidate K the reducer and classifier are refit with each
learning sample held out in turn; the K with the smallest LOOCV
misclassification rate wins, smallest K on ties. Gene selection happens
upstream of this module and is deliberately not repeated inside folds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ClassLabels, ExpressionMatrix
from .lda import fit_lda, predict_lda
from .pipeline import DEFAULT_SETTINGS, PipelineSettings, fit_reducer, transform
from .rng import derive_seed

DEFAULT_K_GRID = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class SelectKResult:
    """LOOCV outcome: chosen K, per-K error curve, and fit accounting."""

    k_star: int
    k_grid: tuple
    cv_errors: tuple       # misclassification rate per k_grid entry
    n_fits: int            # reducer fits actually performed
    fallback_folds: int    # fold predictions made by majority vote

    def error_by_k(self) -> dict:
        return dict(zip(self.k_grid, self.cv_errors))


def _check_grid(k_grid, method: str, n_learn: int, p: int):
    grid = tuple(int(k) for k in k_grid)
    if not grid:
        raise ValueError("k_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValueError("k_grid must be strictly increasing positive integers")
    # fold learning sets have n_learn - 1 rows; PCA rank caps K there
    cap = p if method == "RM" else min(n_learn - 2, p)
    if grid[-1] > cap:
        raise ValueError(
            f"k_grid max {grid[-1]} infeasible for {method} with "
            f"{n_learn} learning samples and {p} genes (cap {cap})"
        )
    return grid


def select_k(method: str, m_learn: ExpressionMatrix, labels_learn: ClassLabels,
             k_grid=DEFAULT_K_GRID, seed: int = 0,
             settings: PipelineSettings = DEFAULT_SETTINGS) -> SelectKResult:
    """Pick the factor count minimizing leave-one-out error on learning data.

    Every fold refits the reducer (including gene partitioning for "RM")
    and the classifier from scratch on the remaining n-1 samples. A fold
    whose remaining samples leave some class with fewer than two members
    skips fitting and predicts the fold-set majority class instead; such
    folds are counted in ``fallback_folds``.

    Partition seeding is a pure function of (seed, k, fold), so results do
    not depend on evaluation order. The error curve uses every fold; ties
    across K resolve to the smallest K.
    """
    n = m_learn.n_samples
    if labels_learn.labels.size != n:
        raise ValueError("labels do not match the learning matrix")
    if n < 3:
        raise ValueError("leave-one-out selection needs at least 3 samples")
    grid = _check_grid(k_grid, method, n, m_learn.n_genes)

    y = labels_learn.labels
    g = labels_learn.n_classes
    all_idx = np.arange(n)
    errors = []
    n_fits = 0
    fallbacks = 0
    for k in grid:
        wrong = 0
        for fold in range(n):
            keep = np.delete(all_idx, fold)
            y_keep = y[keep]
            counts = np.bincount(y_keep, minlength=g)
            if counts.min() < 2:
                pred = int(np.argmax(counts))
                fallbacks += 1
            else:
                m_fold = m_learn.take_samples(keep)
                red = fit_reducer(method, m_fold, k,
                                  derive_seed(seed, k, fold), settings)
                n_fits += 1
                model = fit_lda(transform(red, m_fold),
                                ClassLabels(y_keep, labels_learn.class_names),
                                priors=settings.lda_priors,
                                ridge_eps=settings.lda_ridge_eps)
                held = transform(red, m_learn.take_samples((fold,)))
                pred = int(predict_lda(model, held)[0])
            wrong += int(pred != y[fold])
        errors.append(wrong / n)

    best = int(np.argmin(errors))  # first minimum, so smallest K
    return SelectKResult(
        k_star=grid[best],
        k_grid=grid,
        cv_errors=tuple(errors),
        n_fits=n_fits,
        fallback_folds=fallbacks,
    )
