"""Principal-component benchmark reducer.

Factors are projections onto the leading eigenvectors of the learning-set
covariance matrix. Kept deliberately spare; it exists as the comparison
method for the Rasch reducer under the same evaluation harness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ExpressionMatrix, FactorMatrix


@dataclass(frozen=True, eq=False)
class PCAReducer:
    """Learning-set center, leading loadings, and the full spectrum.

    ``loadings`` has one unit-norm column per kept component;
    ``eigenvalues`` holds all p covariance eigenvalues, descending and
    clamped at zero, so explained-variance checks see the whole spectrum.
    """

    center: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


def pca_fit(m_learn: ExpressionMatrix, k: int) -> PCAReducer:
    """Eigendecomposition of the learning covariance (divisor n - 1).

    k is capped by rank: it must not exceed min(n_learn - 1, p). Each kept
    eigenvector is oriented so its largest-magnitude entry is positive
    (first such entry on ties).
    """
    x = m_learn.values
    n, p = x.shape
    if n < 2:
        raise ValueError("need at least 2 learning samples")
    max_k = min(n - 1, p)
    if not 1 <= k <= max_k:
        raise ValueError(f"k must be in [1, {max_k}], got {k}")

    center = x.mean(axis=0)
    xc = x - center
    cov = (xc.T @ xc) / (n - 1)
    evals, evecs = np.linalg.eigh(cov)  # ascending
    order = np.argsort(evals)[::-1]
    evals = np.maximum(evals[order], 0.0)
    vecs = evecs[:, order[:k]].copy()
    for col in range(k):
        pivot = np.argmax(np.abs(vecs[:, col]))
        if vecs[pivot, col] < 0:
            vecs[:, col] = -vecs[:, col]
    return PCAReducer(center=center, loadings=vecs, eigenvalues=evals)


def pca_transform(red: PCAReducer, m: ExpressionMatrix) -> FactorMatrix:
    """Project rows onto the kept components after centering."""
    if m.n_genes != red.center.size:
        raise ValueError("gene count does not match the fitted reducer")
    return FactorMatrix((m.values - red.center) @ red.loadings, "PCA")
